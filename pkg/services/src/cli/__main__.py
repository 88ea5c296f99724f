# services/src/cli/__main__.py
"""Allows `python -m services.src.cli`."""

from .cli import main

if __name__ == "__main__":
    main()
