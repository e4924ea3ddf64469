"""Entry point for python -m jumping."""

from .cli import cli

if __name__ == "__main__":
    cli()
