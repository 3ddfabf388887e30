"""Module entry point: python -m g2calc ..."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
