"""Privacy audits over planner output.

A server sees its requests only up to the secret layer relabelling and the
transmission shuffle, so what it can learn is captured by a ``Signature``:
the sorted multiset of each request's sorted coefficient vectors plus the
number of distinct layers touched. ``audit_theta_invariance`` checks those
signatures are identical for every θ; ``audit_statistical`` is an advisory
chi-square check on the shuffle itself.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from mcp_pfr.errors import AuditFailure, ValidationError
from mcp_pfr.field import field_make
from mcp_pfr.messages import Query
from mcp_pfr.projspace import canonical_count
from mcp_pfr.rates import BINARY, check_scheme
from mcp_pfr.rng import make_rng
from mcp_pfr.scheme_binary import plan_binary
from mcp_pfr.scheme_general import plan_general, setup_general

log = logging.getLogger(__name__)

MIN_EXPECTED = 5
REPORT_FORMAT = "pfr-audit/1"
STAT_REPORT_FORMAT = "pfr-stat-audit/1"
AUDIT_CSV_COLUMNS = (
    "scheme", "N", "K", "p", "m", "mutation", "thetas",
    "server", "requests", "layers_touched", "counterexamples", "passed",
)
STAT_CSV_COLUMNS = ("scheme", "N", "K", "q", "theta", "trials", "server", "class", "key", "position", "count")

RequestKey = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Signature:
    requests: tuple[RequestKey, ...]
    layers_touched: int

    def multiplicities(self) -> dict[RequestKey, int]:
        counts: dict[RequestKey, int] = {}
        for key in self.requests:
            counts[key] = counts.get(key, 0) + 1
        return counts


def request_key(coeffs) -> RequestKey:
    return tuple(sorted(tuple(c) for c in coeffs))


def format_key(key: RequestKey) -> str:
    """(1,0),(0,1) -> '1,0;0,1'."""
    return ";".join(",".join(map(str, v)) for v in key)


def request_signature(query: Query) -> Signature:
    seen: set[int] = set()
    for r in query.requests:
        for layer in r.layers:
            if layer in seen:
                raise ValidationError(f"server {query.server_id} query touches layer {layer} twice")
            seen.add(layer)
    keys = sorted(request_key(r.coeffs) for r in query.requests)
    return Signature(tuple(keys), len(seen))


# ---------------------------------------------------------------------------
# Structural audit
# ---------------------------------------------------------------------------

@dataclass
class AuditReport:
    scheme: str
    N: int
    K: int
    p: int
    m: int
    thetas: int
    mutation: str | None = None
    layers_touched: list[int] = field(default_factory=list)
    requests: list[int] = field(default_factory=list)
    counterexamples: list[tuple[int, int, int]] = field(default_factory=list)  # (server, θ, θ′)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def failing_servers(self) -> list[int]:
        return sorted({n for n, _, _ in self.counterexamples})

    def raise_for_failure(self) -> None:
        if not self.passed:
            n, a, b = self.counterexamples[0]
            raise AuditFailure(
                f"{len(self.counterexamples)} counterexample(s); first: server {n} sees theta={a} and theta={b} differently"
            )

    def to_text(self) -> str:
        head = f"{self.scheme} scheme N={self.N} K={self.K} GF({self.p}^{self.m})"
        if self.mutation:
            head += f" [mutation: {self.mutation}]"
        lines = [head, f"thetas compared: {self.thetas}"]
        for n, (r, t) in enumerate(zip(self.requests, self.layers_touched), start=1):
            status = "LEAKS" if n in self.failing_servers() else "ok"
            lines.append(f"  server {n}: {r} requests, {t} layers touched, {status}")
        if self.passed:
            lines.append("PASS: every server's signature is independent of theta")
        else:
            lines.append(f"FAIL: {len(self.counterexamples)} counterexample(s)")
            for n, a, b in self.counterexamples[:10]:
                lines.append(f"  server {n}: theta={a} vs theta={b}")
        return "\n".join(lines)

    def to_kv(self) -> str:
        lines = [
            f"format = {REPORT_FORMAT}",
            f"scheme = {self.scheme}",
            f"N = {self.N}",
            f"K = {self.K}",
            f"p = {self.p}",
            f"m = {self.m}",
            f"mutation = {self.mutation or ''}",
            f"thetas = {self.thetas}",
            f"passed = {str(self.passed).lower()}",
            f"requests = {','.join(map(str, self.requests))}",
            f"layers_touched = {','.join(map(str, self.layers_touched))}",
            f"counterexamples = {len(self.counterexamples)}",
        ]
        lines += [f"counterexample.{i} = {n},{a},{b}" for i, (n, a, b) in enumerate(self.counterexamples)]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        """One row per server."""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=AUDIT_CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for n, (r, t) in enumerate(zip(self.requests, self.layers_touched), start=1):
            writer.writerow({
                "scheme": self.scheme,
                "N": self.N,
                "K": self.K,
                "p": self.p,
                "m": self.m,
                "mutation": self.mutation or "",
                "thetas": self.thetas,
                "server": n,
                "requests": r,
                "layers_touched": t,
                "counterexamples": sum(1 for s, _, _ in self.counterexamples if s == n),
                "passed": str(n not in self.failing_servers()).lower(),
            })
        return buf.getvalue()

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_kv(), encoding="utf-8")
        return path


def _structural_queries(scheme: str, N: int, K: int, p: int, m: int, seed, mutation):
    """Yield (θ, queries) with the layer permutation and shuffle held to identity."""
    if scheme == BINARY:
        for theta in range(1, 2**K):
            q1, q2, _ = plan_binary(K, theta, seed, randomize=False, mutation=mutation)
            yield theta, [q1, q2]
        return
    f = field_make(p, m)
    setup = setup_general(N, K, f, seed)
    for theta in range(1, canonical_count(f.q, K) + 1):
        queries, _ = plan_general(setup, theta, seed, randomize=False, mutation=mutation)
        yield theta, queries


def audit_theta_invariance(
    scheme: str,
    N: int,
    K: int,
    p: int = 2,
    m: int = 1,
    seed: int | None = 0,
    mutation: str | None = None,
) -> AuditReport:
    """Compare every server's signature across all θ.

    Signature equality is transitive, so each θ is compared with θ=1 and a
    counterexample (n, 1, θ′) is recorded for every θ′ that differs.
    """
    check_scheme(scheme, N, K, p**m)
    report = AuditReport(scheme, N, K, p, m, thetas=0, mutation=mutation)
    reference: list[Signature] = []
    for theta, queries in _structural_queries(scheme, N, K, p, m, seed, mutation):
        sigs = [request_signature(q) for q in queries]
        report.thetas += 1
        if not reference:
            reference = sigs
            report.requests = [len(s.requests) for s in sigs]
            report.layers_touched = [s.layers_touched for s in sigs]
            continue
        for n, (ref, sig) in enumerate(zip(reference, sigs), start=1):
            if sig != ref:
                report.counterexamples.append((n, 1, theta))
    if report.passed:
        log.info("audit passed: %s N=%d K=%d q=%d over %d thetas", scheme, N, K, p**m, report.thetas)
    else:
        log.warning(
            "audit found %d counterexample(s) at servers %s", len(report.counterexamples), report.failing_servers()
        )
    return report


# ---------------------------------------------------------------------------
# Statistical audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositionFit:
    """Per-server goodness of fit of (request class -> transmission position) to uniform."""

    server_id: int
    classes: tuple[RequestKey, ...]
    counts: np.ndarray  # (classes, positions)
    statistic: float
    dof: int
    p_value: float
    min_expected: float

    @property
    def underpowered(self) -> bool:
        return self.min_expected < MIN_EXPECTED


@dataclass(frozen=True)
class StatisticalReport:
    scheme: str
    N: int
    K: int
    q: int
    theta: int
    trials: int
    fits: tuple[PositionFit, ...]

    def to_text(self) -> str:
        lines = [f"{self.scheme} scheme N={self.N} K={self.K} q={self.q} theta={self.theta}, {self.trials} trials"]
        for fit in self.fits:
            flag = " (underpowered)" if fit.underpowered else ""
            lines.append(
                f"  server {fit.server_id}: chi2={fit.statistic:.3f} dof={fit.dof} "
                f"p={fit.p_value:.4g} min_expected={fit.min_expected:.2f}{flag}"
            )
        lines.append("advisory only: a small p-value points at a biased shuffle, it is not a proof either way")
        return "\n".join(lines)

    def to_kv(self) -> str:
        """Versioned ``key = value`` document with a ``[server.n]`` section per server.

        ``counts.i`` lists how often class ``i`` landed at each transmission
        position, position 1 first.
        """
        lines = [
            f"format = {STAT_REPORT_FORMAT}",
            f"scheme = {self.scheme}",
            f"N = {self.N}",
            f"K = {self.K}",
            f"q = {self.q}",
            f"theta = {self.theta}",
            f"trials = {self.trials}",
            f"servers = {len(self.fits)}",
        ]
        for fit in self.fits:
            lines += [
                "",
                f"[server.{fit.server_id}]",
                f"chi2 = {fit.statistic:.6f}",
                f"dof = {fit.dof}",
                f"p_value = {fit.p_value:.6g}",
                f"min_expected = {fit.min_expected:.6g}",
                f"underpowered = {str(fit.underpowered).lower()}",
                f"classes = {len(fit.classes)}",
                f"positions = {fit.counts.shape[1]}",
            ]
            for i, key in enumerate(fit.classes):
                lines.append(f"class.{i} = {format_key(key)}")
                lines.append(f"counts.{i} = {','.join(str(int(c)) for c in fit.counts[i])}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        """Long-form frequency table: one row per (server, class, position)."""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=STAT_CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for fit in self.fits:
            for i, key in enumerate(fit.classes):
                for pos, count in enumerate(fit.counts[i], start=1):
                    writer.writerow({
                        "scheme": self.scheme,
                        "N": self.N,
                        "K": self.K,
                        "q": self.q,
                        "theta": self.theta,
                        "trials": self.trials,
                        "server": fit.server_id,
                        "class": i,
                        "key": format_key(key),
                        "position": pos,
                        "count": int(count),
                    })
        return buf.getvalue()

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_kv(), encoding="utf-8")
        return path


def _position_fit(server_id: int, orders: list[list[RequestKey]], trials: int) -> PositionFit:
    classes = sorted(set(orders[0]))
    index = {c: i for i, c in enumerate(classes)}
    R = len(orders[0])
    counts = np.zeros((len(classes), R), dtype=np.int64)
    for keys in orders:
        counts[[index[k] for k in keys], np.arange(R)] += 1
    mult = np.zeros(len(classes))
    for k in orders[0]:
        mult[index[k]] += 1
    expected = np.outer(mult * trials / R, np.ones(R))
    # each position is a multinomial draw over classes; sum the per-position fits
    dof = R * (len(classes) - 1)
    if dof == 0:
        return PositionFit(server_id, tuple(classes), counts, 0.0, 0, 1.0, float(expected.min()))
    statistic = float(((counts - expected) ** 2 / expected).sum())
    return PositionFit(
        server_id, tuple(classes), counts, statistic, dof, float(stats.chi2.sf(statistic, dof)), float(expected.min())
    )


def audit_statistical(
    scheme: str,
    N: int,
    K: int,
    p: int = 2,
    m: int = 1,
    trials: int = 1000,
    seed: int | None = 0,
    theta: int = 1,
) -> StatisticalReport:
    """Plan ``trials`` times with fresh randomness and test positions for uniformity."""
    if trials < 1:
        raise ValidationError(f"trials={trials} must be >= 1")
    check_scheme(scheme, N, K, p**m)
    rng = make_rng(seed)
    setup = None
    if scheme != BINARY:
        setup = setup_general(N, K, field_make(p, m), rng.getrandbits(64))

    orders: list[list[list[RequestKey]]] = [[] for _ in range(N)]
    for _ in range(trials):
        trial_seed = rng.getrandbits(64)
        if setup is None:
            q1, q2, _ = plan_binary(K, theta, trial_seed)
            queries = [q1, q2]
        else:
            queries, _ = plan_general(setup, theta, trial_seed)
        for n, query in enumerate(queries):
            orders[n].append([request_key(r.coeffs) for r in query.requests])

    fits = tuple(_position_fit(n, orders[n - 1], trials) for n in range(1, N + 1))
    return StatisticalReport(scheme, N, K, p**m, theta, trials, fits)
