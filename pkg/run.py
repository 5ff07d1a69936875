"""Entry point for the pfr command line (``python run.py mcp`` starts the MCP server)."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from mcp_pfr.cli import main

sys.exit(main())
