"""Entry point for ``python -m treesieve``."""

from treesieve.cli import app

if __name__ == "__main__":
    app()
