"""Allow running as: python -m mcp_pfr"""

import sys

from mcp_pfr.cli import main

sys.exit(main())
