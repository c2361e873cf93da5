"""Allow running multiquant.cli as a module: python -m multiquant.cli"""

from multiquant.cli import cli_main

if __name__ == "__main__":
    cli_main()
