"""Rate tools: exact rate reports, K sweeps, baseline comparison."""

from __future__ import annotations

from mcp.server.fastmcp import Context

from mcp_pfr import rates


def register(mcp, helpers):

    @mcp.tool()
    def rate_report(ctx: Context, K: int, scheme: str = "binary", N: int = 2, p: int = 2, m: int = 1) -> str:
        """Exact L, Q and R = L/Q with capacity and baselines for one parameter set.

        Args:
            K: Number of files.
            scheme: binary or general.
            N: Number of servers.
            p: Field characteristic.
            m: Extension degree.
        """
        try:
            return rates.rate_report(scheme, N, K, p**m).to_text()
        except Exception as e:
            return f"ERROR: {e}"

    @mcp.tool()
    def rate_table(
        ctx: Context,
        scheme: str = "binary",
        N: int = 2,
        p: int = 2,
        m: int = 1,
        k_min: int = 1,
        k_max: int = 6,
        format: str = "markdown",
    ) -> str:
        """Rates for a range of K.

        Args:
            scheme: binary or general.
            N: Number of servers.
            p: Field characteristic.
            m: Extension degree.
            k_min: Smallest K.
            k_max: Largest K.
            format: markdown, csv or kv.
        """
        try:
            reports = rates.rate_table(scheme, N, p**m, k_min, k_max)
            if format == "csv":
                return rates.to_csv(reports)
            if format == "kv":
                return rates.to_kv(reports)
            return helpers.rates_table(reports)
        except Exception as e:
            return f"ERROR: {e}"

    @mcp.tool()
    def compare_baselines(ctx: Context, K: int, N: int = 2, p: int = 2, m: int = 1) -> str:
        """Compare the general scheme with the virtual-file PIR baseline and the 1 - 1/N limit.

        Args:
            K: Number of files.
            N: Number of servers.
            p: Field characteristic.
            m: Extension degree.
        """
        try:
            q = p**m
            r = rates.general_rate(N, K, q)
            pir = rates.pir_virtual_rate(N, K, q)
            limit = rates.asymptotic_capacity(N)
            lines = [
                f"N={N} K={K} q={q}",
                f"  scheme rate      {r} ({rates.as_decimal(r)})",
                f"  PIR baseline     {pir} ({rates.as_decimal(pir)})",
                f"  1 - 1/N          {limit}",
                f"  excess over limit {rates.excess(N, K, q)}",
            ]
            if (N, q) == (2, 2):
                lines.append(f"  binary capacity  {rates.binary_capacity(K)}")
            if r > pir:
                lines.append(f"scheme beats PIR by {r - pir}")
            elif r == pir:
                lines.append("degenerate: scheme and PIR baseline coincide")
            else:
                lines.append(f"PIR baseline is ahead by {pir - r}")
            return "\n".join(lines)
        except Exception as e:
            return f"ERROR: {e}"
