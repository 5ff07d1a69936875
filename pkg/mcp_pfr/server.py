"""MCP server for private function retrieval: stdio transport, FastMCP."""

from __future__ import annotations

import logging
import sys
from contextlib import asynccontextmanager

from mcp.server.fastmcp import FastMCP

from mcp_pfr.config import Settings

# ---------------------------------------------------------------------------
# Instructions: injected into agent context at MCP handshake
# ---------------------------------------------------------------------------
INSTRUCTIONS = """\
PFR MCP retrieves a linear combination v^T W of K replicated files from N
non-colluding servers without revealing v to any single server.

MENTAL MODEL:
  Database (K files x L layers x S elements over GF(q))
    → plan: one Query per server → Answer per server → decode → L records of v^T W

DATABASE TOOLS:
  generate_database: random database, sized for a scheme if L is omitted
  load_database / save_database: PFRD files under PFR_DB_DIR
  list_databases   : what is loaded
  oracle_function  : brute-force v^T W (ground truth)

RETRIEVAL TOOLS:
  plan_retrieval   : request counts and layer usage per server, no database needed
  private_retrieve : full run (in-memory servers, or TCP endpoints) checked against the oracle

AUDIT TOOLS:
  audit_privacy    : per-server query signatures compared across every theta
  audit_statistics : chi-square check of the transmission shuffle (advisory)

RATE TOOLS:
  rate_report, rate_table, compare_baselines: exact fractions, no floats

RULES:
  - theta indexes canonical vectors (first nonzero entry 1), 1-based
  - binary scheme: N=2 over GF(2); general scheme: any N >= 2 with q >= N
  - Units: downloads count answer records (S field elements each); rates are layers per download
  - Failures come back as strings starting with ERROR:

For workflows and formats: read the pfr://cookbook resource.
"""


@asynccontextmanager
async def lifespan(server: FastMCP):
    """Create the Workspace once at startup."""
    from mcp_pfr.helpers import Workspace

    yield {"workspace": Workspace(Settings.from_env())}


mcp = FastMCP("pfr", instructions=INSTRUCTIONS, lifespan=lifespan)

# ---------------------------------------------------------------------------
# Tools: database, retrieval, audit, rates
# ---------------------------------------------------------------------------
from mcp_pfr import helpers
from mcp_pfr.tools import audit, database, rates, retrieval

for mod in [database, retrieval, audit, rates]:
    mod.register(mcp, helpers)

# ---------------------------------------------------------------------------
# Prompts: guided retrieval, audit and rate workflows
# ---------------------------------------------------------------------------
from mcp_pfr import prompts

prompts.register(mcp)

# ---------------------------------------------------------------------------
# Resources: the cookbook, read on demand
# ---------------------------------------------------------------------------
from mcp_pfr import resources

resources.register(mcp)


def main():
    # stdout carries the stdio transport
    settings = Settings.from_env()
    logging.basicConfig(level=getattr(logging, settings.log_level, logging.WARNING), stream=sys.stderr)
    mcp.run(transport="stdio")


if __name__ == "__main__":
    main()
