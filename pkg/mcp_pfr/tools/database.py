"""Database tools: generate, load, save, list, brute-force oracle."""

from __future__ import annotations

from mcp.server.fastmcp import Context

from mcp_pfr.database import Database, db_generate, db_oracle
from mcp_pfr.field import field_make
from mcp_pfr.projspace import theta_vector
from mcp_pfr.rates import scheme_counts


def register(mcp, helpers):

    @mcp.tool()
    def generate_database(
        ctx: Context,
        name: str,
        K: int,
        S: int = 1,
        p: int = 2,
        m: int = 1,
        L: int = 0,
        scheme: str = "binary",
        N: int = 2,
        seed: int = -1,
    ) -> str:
        """Create a random database and keep it under a name.

        Args:
            name: Name to register the database under.
            K: Number of files.
            S: Field elements per layer record.
            p: Field characteristic (prime).
            m: Extension degree; the field is GF(p^m).
            L: Layers per file. 0 sizes it for `scheme` with N servers.
            scheme: binary or general, used only when L is 0.
            N: Number of servers, used only when L is 0.
            seed: Random seed; -1 draws from OS entropy.
        """
        try:
            f = field_make(p, m)
            if L <= 0:
                L, _ = scheme_counts(scheme, N, K, f.q)
            db = db_generate(f, K, L, S, None if seed < 0 else seed)
            helpers.get_workspace(ctx).databases[name] = db
            return f"Generated '{name}': {f}, K={K} L={L} S={S}, digest {db.digest()}"
        except Exception as e:
            return f"ERROR: {e}"

    @mcp.tool()
    def load_database(ctx: Context, name: str, path: str) -> str:
        """Load a PFRD database file.

        Args:
            name: Name to register the database under.
            path: File path; relative paths resolve against PFR_DB_DIR.
        """
        try:
            ws = helpers.get_workspace(ctx)
            db = Database.load(ws.resolve(path))
            ws.databases[name] = db
            return f"Loaded '{name}' from {path}: {db.field}, K={db.K} L={db.L} S={db.S}"
        except Exception as e:
            return f"ERROR: {e}"

    @mcp.tool()
    def save_database(ctx: Context, name: str, path: str) -> str:
        """Write a loaded database to a PFRD file.

        Args:
            name: Loaded database name.
            path: Target path; relative paths resolve against PFR_DB_DIR.
        """
        try:
            ws = helpers.get_workspace(ctx)
            db = helpers.get_database(ctx, name)
            out = db.save(ws.resolve(path))
            return f"Saved '{name}' to {out} ({len(db.to_bytes())} bytes)"
        except Exception as e:
            return f"ERROR: {e}"

    @mcp.tool()
    def list_databases(ctx: Context) -> str:
        """List loaded databases.

        Returns a markdown table: name | field | K | L | S | digest
        """
        try:
            dbs = helpers.get_workspace(ctx).databases
            if not dbs:
                return "No databases loaded."
            return helpers.databases_table(dbs)
        except Exception as e:
            return f"ERROR: {e}"

    @mcp.tool()
    def oracle_function(ctx: Context, name: str, theta: int = 0, vector: str = "", max_rows: int = 16) -> str:
        """Compute v^T W directly from the database (no privacy, ground truth).

        Args:
            name: Loaded database name.
            theta: Canonical vector index (1-based). Ignored when vector is given.
            vector: Explicit coefficient vector, e.g. "1,0,2" ("102" also works when q <= 10).
            max_rows: Layers to show.
        """
        try:
            db = helpers.get_database(ctx, name)
            if vector:
                v = helpers.parse_vector(vector, db.field.q)
            elif theta > 0:
                v = theta_vector(theta, db.field.q, db.K)
            else:
                return "ERROR: give theta or vector"
            stream = db_oracle(db, v)
            head = f"v = {v}, digest {stream.digest()}"
            return head + "\n\n" + helpers.stream_table(stream, max_rows)
        except Exception as e:
            return f"ERROR: {e}"
