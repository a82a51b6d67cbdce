"""Run kone.cli.cli() from the command line."""
from kone.cli import cli

if __name__ == "__main__":
    cli()
