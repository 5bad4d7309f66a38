"""
modalshift.py

Entry script: `python modalshift.py run|sweep|optimize|plot ...`
"""

import sys

from cli.main import main

if __name__ == "__main__":
    sys.exit(main())
