"""Module entry point: python -m nhk ..."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
