"""Console output for the CLI."""

from multiquant.cli.ui.tables import console, err_console, print_error, render_table

__all__ = ["console", "err_console", "print_error", "render_table"]
