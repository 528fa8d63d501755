"""Module entry point: ``python -m wspgl1``."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
