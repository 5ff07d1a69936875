"""Shared helpers: workspace/context accessors and markdown table builders."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from mcp.server.fastmcp import Context

from mcp_pfr.config import Settings
from mcp_pfr.database import Database, DecodedStream
from mcp_pfr.errors import ValidationError
from mcp_pfr.rates import RateReport, as_decimal
from mcp_pfr.transport import Transcript


@dataclass
class Workspace:
    """Named databases loaded into this server process."""

    settings: Settings
    databases: dict[str, Database] = field(default_factory=dict)

    def resolve(self, path: str) -> Path:
        p = Path(path).expanduser()
        return p if p.is_absolute() else Path(self.settings.db_dir) / p


# ---------------------------------------------------------------------------
# Context accessors
# ---------------------------------------------------------------------------

def get_workspace(ctx: Context) -> Workspace:
    """Return the Workspace stored in lifespan context."""
    return ctx.request_context.lifespan_context["workspace"]


def get_settings(ctx: Context) -> Settings:
    return get_workspace(ctx).settings


def get_database(ctx: Context, name: str) -> Database:
    """Return a loaded database by name."""
    dbs = get_workspace(ctx).databases
    if name not in dbs:
        known = ", ".join(sorted(dbs)) or "none"
        raise ValidationError(f"no database named '{name}' (loaded: {known})")
    return dbs[name]


def parse_vector(text: str, q: int) -> tuple[int, ...]:
    """'1,0,2' -> (1, 0, 2). Bare digits ('102') are only read when q <= 10."""
    text = text.strip()
    if "," in text or q > 10:
        parts = text.split(",")
    else:
        parts = list(text)
    try:
        return tuple(int(x) for x in parts if x.strip())
    except ValueError:
        raise ValidationError(f"cannot read a coefficient vector from '{text}'") from None


# ---------------------------------------------------------------------------
# Markdown table builders
# ---------------------------------------------------------------------------

def databases_table(dbs: dict[str, Database]) -> str:
    header = "| name | field | K | L | S | digest |"
    sep = "|------|-------|---|---|---|--------|"
    lines = [header, sep]
    for name in sorted(dbs):
        db = dbs[name]
        lines.append(f"| {name} | {db.field} | {db.K} | {db.L} | {db.S} | {db.digest()} |")
    return "\n".join(lines)


def stream_table(stream: DecodedStream, max_rows: int = 16) -> str:
    """First ``max_rows`` layers of a decoded stream.

    Returns a string like:
        | layer | record |
        |-------|--------|
        | 1     | 0 1 1  |
    """
    lines = ["| layer | record |", "|-------|--------|"]
    for t, row in enumerate(stream.values[:max_rows], start=1):
        lines.append(f"| {t} | {' '.join(str(int(x)) for x in row)} |")
    if stream.L > max_rows:
        lines.append(f"| ... | {stream.L - max_rows} more layers |")
    return "\n".join(lines)


def transcript_table(transcript: Transcript) -> str:
    lines = [
        "| server | requests | upload_bytes | download_bytes | answer_elements | seconds |",
        "|--------|----------|--------------|----------------|-----------------|---------|",
    ]
    for e in transcript.exchanges:
        lines.append(
            f"| {e.server_id} | {e.requests} | {e.upload_bytes} | {e.download_bytes} "
            f"| {e.answer_elements} | {e.seconds:.4f} |"
        )
    return "\n".join(lines)


def rates_table(reports: list[RateReport]) -> str:
    lines = [
        "| K | L | Q | R | R (dec) | capacity | PIR baseline | excess | verdict |",
        "|---|---|---|---|---------|----------|--------------|--------|---------|",
    ]
    for r in reports:
        cap = "--" if r.capacity is None else str(r.capacity)
        lines.append(
            f"| {r.K} | {r.L} | {r.Q} | {r.rate} | {as_decimal(r.rate)} | {cap} "
            f"| {r.pir_baseline} | {r.excess} | {r.verdict} |"
        )
    return "\n".join(lines)
