"""Audit tools: structural signature audit, statistical shuffle check."""

from __future__ import annotations

from mcp.server.fastmcp import Context

from mcp_pfr.audit import audit_statistical, audit_theta_invariance


def register(mcp, helpers):

    @mcp.tool()
    def audit_privacy(
        ctx: Context,
        K: int,
        scheme: str = "binary",
        N: int = 2,
        p: int = 2,
        m: int = 1,
        seed: int = 0,
        mutation: str = "",
    ) -> str:
        """Check that no server's view of its query depends on theta.

        Args:
            K: Number of files.
            scheme: binary or general.
            N: Number of servers.
            p: Field characteristic.
            m: Extension degree.
            seed: Setup seed.
            mutation: Deliberately broken planner to audit (drop_pairs, drop_direct, skip_step3, no_shift).
        """
        try:
            report = audit_theta_invariance(scheme, N, K, p, m, seed, mutation or None)
            return report.to_text()
        except Exception as e:
            return f"ERROR: {e}"

    @mcp.tool()
    def audit_statistics(
        ctx: Context,
        K: int,
        scheme: str = "binary",
        N: int = 2,
        p: int = 2,
        m: int = 1,
        trials: int = 1000,
        theta: int = 1,
        seed: int = 0,
    ) -> str:
        """Chi-square test of request-class positions against a uniform shuffle (advisory).

        Args:
            K: Number of files.
            scheme: binary or general.
            N: Number of servers.
            p: Field characteristic.
            m: Extension degree.
            trials: Number of fresh plans.
            theta: Canonical vector index (1-based).
            seed: Seed for the trials.
        """
        try:
            return audit_statistical(scheme, N, K, p, m, trials, seed, theta).to_text()
        except Exception as e:
            return f"ERROR: {e}"
