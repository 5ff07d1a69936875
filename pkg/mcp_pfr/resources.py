"""MCP Resources: on-demand context the agent can read."""

from __future__ import annotations

from mcp.server.fastmcp import FastMCP

COOKBOOK = """\
# PFR MCP Cookbook

## Workflow: Retrieve a Function Privately

1. `generate_database(name, K, S)`: L is sized for the scheme when omitted
2. `plan_retrieval(K, theta)`: see what each server will receive
3. `private_retrieve(name, theta)`: runs N in-memory servers, decodes, compares with the oracle
4. `oracle_function(name, theta)`: ground truth, if you want to eyeball it

For the N-server scheme pass `scheme="general", N=3, p=3` (needs q >= N) and
generate the database with the same `scheme`, `N`, `p`.

## Workflow: Real Servers

Outside MCP, in separate shells:

    python -m mcp_pfr gen-db --k 2 --l 8 --s 4 --seed 1 --out db.pfrd
    python -m mcp_pfr serve --db db.pfrd --listen 127.0.0.1:7001
    python -m mcp_pfr serve --db db.pfrd --listen 127.0.0.1:7002

Then `load_database("db", "db.pfrd")` and
`private_retrieve("db", theta, endpoints="127.0.0.1:7001,127.0.0.1:7002")`.

## Workflow: Privacy Audit

- `audit_privacy(K)`: compares every server's query signature for every theta
- `audit_privacy(K, mutation="drop_pairs")`: a broken planner; must FAIL
- `audit_statistics(K, trials=2000)`: chi-square on transmission positions

Binary scheme and every N=2 general run pass. For N >= 3 the general
scheme's shifted requests can carry zero coefficient vectors whose placement
depends on theta, so servers 2..N are reported as leaking.

## Workflow: Rates

- `rate_report(K, scheme, N, p)`: L, Q, R = L/Q, capacity, PIR baseline
- `rate_table(scheme, N, p, k_min, k_max, format="csv")`: sweep over K
- `compare_baselines(K, N, p)`: scheme vs virtual-file PIR vs 1 - 1/N

## Units & Indexing

- theta is 1-based over canonical vectors (first nonzero entry 1), ordered as
  base-q integers: for q=2, K=2 theta 1,2,3 are (0,1), (1,0), (1,1)
- layers are 1-based; a layer record is S field elements
- Q counts answer records; bytes on the wire are u16 per element plus framing

## Files

- PFRD database files: relative paths resolve against PFR_DB_DIR
- Fields up to q = 65536 with p <= 255 for files and the wire format

## Error Handling

- All tools return "ERROR: ..." on failure (not exceptions)
- Common errors: q < N, theta out of range, database field or K mismatch with the query
"""


def register(mcp: FastMCP):

    @mcp.resource("pfr://cookbook")
    def cookbook() -> str:
        """Workflow cookbook for PFR MCP: recipes, units, indexing, error handling."""
        return COOKBOOK
