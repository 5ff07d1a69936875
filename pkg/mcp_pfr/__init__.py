"""Private function retrieval: schemes, servers, audits, rates, and an MCP server over stdio."""

__version__ = "0.1.0"
