"""Retrieval tools: plan queries, run a private retrieval end to end."""

from __future__ import annotations

from mcp.server.fastmcp import Context

from mcp_pfr.audit import request_signature
from mcp_pfr.database import db_oracle
from mcp_pfr.field import field_make
from mcp_pfr.projspace import theta_vector
from mcp_pfr.rates import BINARY, check_scheme, scheme_counts
from mcp_pfr.scheme_binary import plan_binary
from mcp_pfr.scheme_general import plan_general, setup_general
from mcp_pfr.transport import LoopbackTransport, RetrievalParams, TcpTransport, parse_endpoints, retrieve


def register(mcp, helpers):

    @mcp.tool()
    def plan_retrieval(
        ctx: Context,
        K: int,
        theta: int,
        scheme: str = "binary",
        N: int = 2,
        p: int = 2,
        m: int = 1,
        seed: int = 0,
    ) -> str:
        """Plan the per-server queries without contacting any server.

        Args:
            K: Number of files.
            theta: Canonical vector index (1-based).
            scheme: binary or general.
            N: Number of servers.
            p: Field characteristic.
            m: Extension degree.
            seed: Planning seed.

        Returns a markdown table: server | requests | terms/request | layers touched
        """
        try:
            q = p**m
            check_scheme(scheme, N, K, q)
            if scheme == BINARY:
                q1, q2, _ = plan_binary(K, theta, seed)
                queries = [q1, q2]
            else:
                setup = setup_general(N, K, field_make(p, m), seed)
                queries, plan = plan_general(setup, theta, seed)
            L, Q = scheme_counts(scheme, N, K, q)
            lines = [
                f"{scheme} scheme, N={N} K={K} q={q}, theta={theta} -> v={theta_vector(theta, q, K)}",
                f"L={L} layers, Q={Q} downloads, R={L}/{Q}",
                "",
                "| server | requests | terms/request | layers touched |",
                "|--------|----------|---------------|----------------|",
            ]
            for query in queries:
                terms = {len(r.layers) for r in query.requests}
                sig = request_signature(query)
                lines.append(
                    f"| {query.server_id} | {len(query.requests)} | {','.join(map(str, sorted(terms)))} "
                    f"| {sig.layers_touched} |"
                )
            if scheme != BINARY:
                rm = plan.round_map
                lines.append("")
                lines.append(f"rounds: {rm.step2_rounds} shifted + {rm.step3_rounds} parallel-class")
            return "\n".join(lines)
        except Exception as e:
            return f"ERROR: {e}"

    @mcp.tool()
    def private_retrieve(
        ctx: Context,
        name: str,
        theta: int,
        scheme: str = "binary",
        N: int = 2,
        endpoints: str = "",
        seed: int = -1,
        max_rows: int = 8,
    ) -> str:
        """Privately retrieve v(theta)^T W and check it against the oracle.

        Args:
            name: Loaded database name (replicated to every in-memory server; also the oracle reference).
            theta: Canonical vector index (1-based).
            scheme: binary or general.
            N: Number of servers.
            endpoints: Comma-separated HOST:PORT list; empty runs in-memory servers.
            seed: Client seed; -1 draws from OS entropy.
            max_rows: Decoded layers to show.
        """
        try:
            settings = helpers.get_settings(ctx)
            db = helpers.get_database(ctx, name)
            f = db.field
            params = RetrievalParams(scheme, N, db.K, theta, f.p, f.m, db.S)
            if endpoints:
                transport = TcpTransport(parse_endpoints(endpoints), settings.timeout)
            else:
                transport = LoopbackTransport.replicated(db, N)
            stream, transcript = retrieve(params, transport, None if seed < 0 else seed)
            expected = db_oracle(db, theta_vector(theta, f.q, db.K))
            verdict = "matches oracle" if stream == expected else "DOES NOT match oracle"
            lines = [
                f"Retrieved theta={theta} ({scheme}, N={N}): {verdict}, digest {stream.digest()}",
                f"Q={transcript.measured_q} downloads, {transcript.answer_elements} answer elements, "
                f"R={stream.L}/{transcript.measured_q}",
                "",
                helpers.transcript_table(transcript),
                "",
                helpers.stream_table(stream, max_rows),
            ]
            return "\n".join(lines)
        except Exception as e:
            return f"ERROR: {e}"
