"""Entry point for the physbound command line."""
import sys

from physbound.app.main import main

if __name__ == "__main__":
    sys.exit(main())
