"""
Backward-compatible entry point that simply delegates to the real CLI.
All CLI logic lives in qchain/cli/.
"""

import sys

from qchain.cli import main

if __name__ == "__main__":
    sys.exit(main())
