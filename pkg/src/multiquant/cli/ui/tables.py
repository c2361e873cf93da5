"""Rich consoles and tables."""

from typing import Any, Iterable, Sequence

from rich.console import Console
from rich.markup import escape
from rich.table import Table

from multiquant.utils.formatting import format_cell

console = Console()
err_console = Console(stderr=True)

_TEXT_COLUMNS = ("method", "metric", "setting", "value", "description")


def print_error(message: str) -> None:
    """Error line on stderr."""
    err_console.print(f"[red]Error:[/red] {escape(message)}", highlight=False)


def render_table(title: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Table:
    table = Table(title=title, show_lines=False)
    for name in header:
        table.add_column(name, justify="left" if name in _TEXT_COLUMNS else "right")
    for row in rows:
        table.add_row(*(_short(v) for v in row))
    return table


def _short(value: Any) -> str:
    # Full precision lives in the written files
    if isinstance(value, float):
        return f"{value:.6g}"
    return format_cell(value)
