"""Tool modules for the mcp_pfr server."""
