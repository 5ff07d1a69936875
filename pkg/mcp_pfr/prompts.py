"""MCP Prompts: user-facing slash commands bundled with the server."""

from __future__ import annotations

from mcp.server.fastmcp import FastMCP


def register(mcp: FastMCP):

    @mcp.prompt()
    def retrieve_function(K: str = "2", theta: str = "1", scheme: str = "binary", N: str = "2", p: str = "2") -> str:
        """Generate a database and privately retrieve one linear combination of its files.

        Args:
            K: Number of files.
            theta: Canonical vector index (1-based).
            scheme: binary or general.
            N: Number of servers.
            p: Field characteristic.
        """
        parts = [
            "You are running a private function retrieval.",
            "",
            f'1. Call `generate_database` with name="demo", K={K}, S=4, scheme="{scheme}", N={N}, p={p}, seed=1.',
            f'2. Call `plan_retrieval` with K={K}, theta={theta}, scheme="{scheme}", N={N}, p={p}.',
            f'3. Call `private_retrieve` with name="demo", theta={theta}, scheme="{scheme}", N={N}.',
            "",
            "Report whether the decoded stream matches the oracle, the measured Q and the rate L/Q.",
        ]
        return "\n".join(parts)

    @mcp.prompt()
    def verify_privacy(K: str = "2", scheme: str = "binary", N: str = "2", p: str = "2") -> str:
        """Audit a scheme's privacy, then show that a broken planner is caught.

        Args:
            K: Number of files.
            scheme: binary or general.
            N: Number of servers.
            p: Field characteristic.
        """
        mutation = "drop_pairs" if scheme == "binary" else "skip_step3"
        return (
            f'Call `audit_privacy` with K={K}, scheme="{scheme}", N={N}, p={p}.\n'
            f'Then call it again with mutation="{mutation}" and confirm the audit fails.\n'
            f'Finally call `audit_statistics` with K={K}, scheme="{scheme}", N={N}, p={p}, trials=2000\n'
            "and say whether any p-value is below 0.001."
        )

    @mcp.prompt()
    def rate_study(N: str = "3", p: str = "3", k_max: str = "5") -> str:
        """Tabulate rates against K and compare with the PIR baseline.

        Args:
            N: Number of servers.
            p: Field characteristic.
            k_max: Largest K in the sweep.
        """
        return (
            f'Call `rate_table` with scheme="general", N={N}, p={p}, k_min=1, k_max={k_max}.\n'
            f"Then call `compare_baselines` with K=2, N={N}, p={p}.\n"
            "Summarise how the rate approaches 1 - 1/N and where it beats the PIR baseline."
        )
