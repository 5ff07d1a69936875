"""Command-line surface: gen-db, serve, retrieve, audit, rates, bench, mcp."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from fractions import Fraction

from mcp_pfr import rates
from mcp_pfr.audit import audit_statistical, audit_theta_invariance
from mcp_pfr.config import Settings
from mcp_pfr.database import Database, db_generate, db_oracle
from mcp_pfr.errors import PFRError, ValidationError
from mcp_pfr.field import field_make
from mcp_pfr.projspace import theta_vector
from mcp_pfr.scheme_binary import MUTATIONS as BINARY_MUTATIONS
from mcp_pfr.scheme_general import MUTATIONS as GENERAL_MUTATIONS
from mcp_pfr.transport import (
    LoopbackTransport,
    RetrievalParams,
    TcpTransport,
    parse_endpoint,
    parse_endpoints,
    retrieve,
    serve,
)

log = logging.getLogger(__name__)


def _layers_for(scheme: str, N: int, K: int, q: int) -> int:
    L, _ = rates.scheme_counts(scheme, N, K, q)
    return L


def _emit(args, kv: dict[str, object]) -> None:
    """Print a flat record as ``key = value`` lines or a two-line CSV."""
    if args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(kv)
        writer.writerow(kv.values())
    else:
        for k, v in kv.items():
            print(f"{k} = {v}")


def _emit_rows(args, head: dict[str, object], rows: list[dict[str, object]], kind: str) -> None:
    """Header record plus rows, as ``[row.i]`` sections or one CSV line per row."""
    if args.format == "csv":
        writer = csv.DictWriter(sys.stdout, fieldnames=[*head, *(rows[0] if rows else {})], lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({**head, **row})
        return
    print(f"format = {kind}")
    for k, v in head.items():
        print(f"{k} = {v}")
    print(f"rows = {len(rows)}")
    for i, row in enumerate(rows):
        print()
        print(f"[row.{i}]")
        for k, v in row.items():
            print(f"{k} = {v}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_gen_db(args, settings: Settings) -> int:
    f = field_make(args.p, args.m)
    db = db_generate(f, args.k, args.l, args.s, args.seed)
    path = db.save(args.out)
    _emit(args, {"path": path, "field": f, "K": db.K, "L": db.L, "S": db.S, "digest": db.digest()})
    return 0


def cmd_serve(args, settings: Settings) -> int:
    db = Database.load(args.db)
    host, port = parse_endpoint(args.listen)
    server = serve(db, host, port, settings)
    print(f"listening on {server.endpoint}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _local_database(args, scheme: str) -> Database:
    if args.db:
        return Database.load(args.db)
    f = field_make(args.p, args.m)
    return db_generate(f, args.k, _layers_for(scheme, args.n, args.k, f.q), args.s, args.seed)


def cmd_retrieve(args, settings: Settings) -> int:
    db = None
    if args.simulate:
        db = _local_database(args, args.scheme)
        params = RetrievalParams(args.scheme, args.n, db.K, args.theta, db.field.p, db.field.m, db.S)
        transport = LoopbackTransport.replicated(db, args.n)
    else:
        if not args.servers:
            raise ValidationError("retrieve needs --servers HOST:PORT,... or --simulate")
        params = RetrievalParams(args.scheme, args.n, args.k, args.theta, args.p, args.m, args.s)
        transport = TcpTransport(parse_endpoints(args.servers), settings.timeout)

    stream, transcript = retrieve(params, transport, args.seed)
    _, Q = rates.scheme_counts(params.scheme, params.N, params.K, params.q)
    record = {
        "scheme": params.scheme,
        "N": params.N,
        "K": params.K,
        "q": params.q,
        "theta": params.theta,
        "v": ",".join(map(str, theta_vector(params.theta, params.q, params.K))),
        "L": stream.L,
        "S": transcript.S,
        "Q_measured": transcript.measured_q,
        "Q_expected": Q,
        "answer_elements": transcript.answer_elements,
        "upload_bytes": transcript.upload_bytes,
        "download_bytes": transcript.download_bytes,
        "rate": Fraction(stream.L, transcript.measured_q),
        "digest": stream.digest(),
    }
    if db is not None:
        expected = db_oracle(db, theta_vector(params.theta, params.q, params.K))
        record["oracle"] = "match" if expected == stream else "MISMATCH"
    _emit(args, record)
    if record.get("oracle") == "MISMATCH":
        raise PFRError("decoded stream does not match the brute-force oracle")
    return 0


def cmd_audit(args, settings: Settings) -> int:
    # fixed default so repeated audits print the same report
    seed = 0 if args.seed is None else args.seed
    if args.trials:
        report = audit_statistical(args.scheme, args.n, args.k, args.p, args.m, args.trials, seed, args.theta)
        log.info("%s", report.to_text())
        if args.out:
            report.write(args.out)
        sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_kv())
        return 0
    report = audit_theta_invariance(args.scheme, args.n, args.k, args.p, args.m, seed, args.mutation)
    if args.out:
        report.write(args.out)
    log.info("%s", report.to_text())
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_kv())
    report.raise_for_failure()
    return 0


def cmd_rates(args, settings: Settings) -> int:
    q = args.p**args.m
    reports = rates.rate_table(args.scheme, args.n, q, args.k_min, args.k_max)
    sys.stdout.write(rates.to_csv(reports) if args.format == "csv" else rates.to_kv(reports))
    return 0


def cmd_bench(args, settings: Settings) -> int:
    db = _local_database(args, args.scheme)
    f = db.field
    L, Q = rates.scheme_counts(args.scheme, args.n, db.K, f.q)
    transport = LoopbackTransport.replicated(db, args.n)
    rows = []
    for run in range(args.runs):
        seed = None if args.seed is None else args.seed + run
        params = RetrievalParams(args.scheme, args.n, db.K, args.theta, f.p, f.m, db.S)
        start = time.perf_counter()
        _, transcript = retrieve(params, transport, seed)
        total = time.perf_counter() - start
        answer = max(e.seconds for e in transcript.exchanges)
        rows.append({
            "run": run,
            "plan_s": f"{transcript.plan_seconds:.6f}",
            "answer_s": f"{answer:.6f}",
            "decode_s": f"{transcript.decode_seconds:.6f}",
            "total_s": f"{total:.6f}",
            "Q": transcript.measured_q,
        })
    head = {"scheme": args.scheme, "N": args.n, "K": db.K, "q": f.q, "L": L, "S": db.S, "Q_expected": Q}
    _emit_rows(args, head, rows, "pfr-bench/1")
    return 0


def cmd_mcp(args, settings: Settings) -> int:
    from mcp_pfr.server import main as mcp_main

    mcp_main()
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _scheme_args(p: argparse.ArgumentParser, k_required: bool = True) -> None:
    p.add_argument("--scheme", choices=rates.SCHEMES, default=rates.BINARY)
    p.add_argument("--n", type=int, default=2, help="number of servers")
    p.add_argument("--k", type=int, required=k_required, help="number of files")
    p.add_argument("--p", type=int, default=2, help="field characteristic")
    p.add_argument("--m", type=int, default=1, help="extension degree")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default from PFR_LOG_LEVEL)")
    common.add_argument("--format", choices=("kv", "csv"), default="kv", help="machine-readable output style")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (omit for OS entropy)")

    parser = argparse.ArgumentParser(prog="pfr", description="Private function retrieval toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-db", parents=[common], help="write a random database in PFRD format")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_db)

    p = sub.add_parser("serve", parents=[common], help="answer queries over TCP")
    p.add_argument("--db", required=True)
    p.add_argument("--listen", default="127.0.0.1:7070")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("retrieve", parents=[common], help="privately retrieve v(theta)^T W")
    _scheme_args(p, k_required=False)
    p.add_argument("--theta", type=int, required=True)
    p.add_argument("--s", type=int, default=1, help="record length (0 lets the servers decide)")
    p.add_argument("--db", default=None, help="database file for --simulate")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--servers", help="HOST:PORT,HOST:PORT,...")
    target.add_argument("--simulate", action="store_true", help="in-memory servers")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("audit", parents=[common], help="check per-server query signatures are theta-invariant")
    _scheme_args(p)
    p.add_argument("--trials", type=int, default=0, help="run the statistical audit instead")
    p.add_argument("--theta", type=int, default=1, help="theta for the statistical audit")
    p.add_argument("--mutation", choices=BINARY_MUTATIONS + GENERAL_MUTATIONS, default=None)
    p.add_argument("--out", default=None, help="write the key-value report here")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("rates", parents=[common], help="exact rate table with capacity and baselines")
    _scheme_args(p, k_required=False)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=6)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("bench", parents=[common], help="time in-memory retrievals")
    _scheme_args(p)
    p.add_argument("--theta", type=int, default=1)
    p.add_argument("--s", type=int, default=64)
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--db", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("mcp", parents=[common], help="run the MCP server on stdio")
    p.set_defaults(func=cmd_mcp)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = Settings.from_env().override(log_level=args.log_level and args.log_level.upper())
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.command == "retrieve" and not args.simulate and args.k is None:
        print("error: retrieve --servers needs --k", file=sys.stderr)
        return ValidationError.exit_code
    if args.command == "retrieve" and args.simulate and args.k is None and not args.db:
        print("error: retrieve --simulate needs --k or --db", file=sys.stderr)
        return ValidationError.exit_code
    try:
        return args.func(args, settings)
    except PFRError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
