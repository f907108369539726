"""
Entry point for running the SturmAsym command line from a checkout.
"""

import sys

from sturmasym.cli import main


if __name__ == "__main__":
    sys.exit(main())
