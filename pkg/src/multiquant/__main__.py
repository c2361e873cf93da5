"""Allow running as python -m multiquant."""

from multiquant.cli import cli_main

if __name__ == "__main__":
    cli_main()
