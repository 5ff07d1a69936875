"""Exact-rational rates, capacities and baselines.

Everything here is ``fractions.Fraction``; decimals are rendered with
``decimal.Decimal`` only for display.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

import galois

from mcp_pfr.errors import ValidationError

BINARY = "binary"
GENERAL = "general"
SCHEMES = (BINARY, GENERAL)

CSV_COLUMNS = (
    "scheme", "N", "K", "q", "L", "Q",
    "rate", "rate_decimal",
    "capacity", "asymptotic", "excess",
    "pir_baseline", "pir_baseline_decimal", "verdict",
)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check_k(K: int) -> None:
    if K < 1:
        raise ValidationError(f"K={K} must be >= 1")


def _check_general(N: int, K: int, q: int) -> None:
    _check_k(K)
    if N < 2:
        raise ValidationError(f"N={N} must be >= 2")
    if not galois.is_prime_power(q):
        raise ValidationError(f"q={q} is not a prime power")
    if q < N:
        raise ValidationError(f"q={q} < N={N}: the general scheme needs q >= N")


def check_scheme(scheme: str, N: int, K: int, q: int) -> None:
    if scheme == BINARY:
        _check_k(K)
        if (N, q) != (2, 2):
            raise ValidationError(f"the binary scheme runs on N=2 servers over GF(2), got N={N} q={q}")
    elif scheme == GENERAL:
        _check_general(N, K, q)
    else:
        raise ValidationError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def binary_capacity(K: int) -> Fraction:
    """½(1 - 1/2^K)^{-1} = 2^{K-1}/(2^K - 1)."""
    _check_k(K)
    return Fraction(2 ** (K - 1), 2**K - 1)


def general_rate(N: int, K: int, q: int) -> Fraction:
    """(1 - 1/N)(1 + (1/(N-1)) / ((q^K-1)/(q-1))^{N-1})."""
    _check_general(N, K, q)
    classes = Fraction(q**K - 1, q - 1)
    return (1 - Fraction(1, N)) * (1 + Fraction(1, N - 1) / classes ** (N - 1))


def pir_virtual_rate(N: int, K: int, q: int) -> Fraction:
    """Rate of treating every canonical combination as its own file and running capacity PIR."""
    _check_general(N, K, q)
    files = (q**K - 1) // (q - 1)
    return (1 - Fraction(1, N)) / (1 - Fraction(1, N**files))


def virtual_pir_binary(K: int) -> Fraction:
    """½(1 - 1/2^{2^K-1})^{-1}."""
    return pir_virtual_rate(2, K, 2)


def asymptotic_capacity(N: int) -> Fraction:
    if N < 2:
        raise ValidationError(f"N={N} must be >= 2")
    return Fraction(N - 1, N)


def excess(N: int, K: int, q: int) -> Fraction:
    """general_rate - (1 - 1/N), which is (1/N)((q-1)/(q^K-1))^{N-1}."""
    return general_rate(N, K, q) - asymptotic_capacity(N)


def scheme_counts(scheme: str, N: int, K: int, q: int) -> tuple[int, int]:
    """Analytical (L, Q): layers retrieved and answer records downloaded."""
    check_scheme(scheme, N, K, q)
    if scheme == BINARY:
        return 2 ** (K + 1), 4 * (2**K - 1)
    rounds = (q**K - 1) ** (N - 1)
    return (N - 1) * rounds + (q - 1) ** (N - 1), N * rounds


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def as_decimal(x: Fraction, places: int = 6) -> str:
    with localcontext() as ctx:
        ctx.prec = places + 12
        return f"{Decimal(x.numerator) / Decimal(x.denominator):.{places}f}"


@dataclass(frozen=True)
class RateReport:
    scheme: str
    N: int
    K: int
    q: int
    L: int
    Q: int
    rate: Fraction
    capacity: Fraction | None  # known capacity; only for the two-server binary setting
    asymptotic: Fraction
    excess: Fraction
    pir_baseline: Fraction
    verdict: str

    def row(self) -> dict[str, str]:
        return {
            "scheme": self.scheme,
            "N": str(self.N),
            "K": str(self.K),
            "q": str(self.q),
            "L": str(self.L),
            "Q": str(self.Q),
            "rate": str(self.rate),
            "rate_decimal": as_decimal(self.rate),
            "capacity": "" if self.capacity is None else str(self.capacity),
            "asymptotic": str(self.asymptotic),
            "excess": str(self.excess),
            "pir_baseline": str(self.pir_baseline),
            "pir_baseline_decimal": as_decimal(self.pir_baseline),
            "verdict": self.verdict,
        }

    def to_text(self) -> str:
        lines = [
            f"{self.scheme} scheme, N={self.N} K={self.K} q={self.q}",
            f"  L = {self.L} layers, Q = {self.Q} downloads",
            f"  R = L/Q = {self.rate} ({as_decimal(self.rate)})",
        ]
        if self.capacity is not None:
            lines.append(f"  capacity = {self.capacity}")
        lines += [
            f"  1 - 1/N = {self.asymptotic}, excess = {self.excess}",
            f"  PIR baseline = {self.pir_baseline} ({as_decimal(self.pir_baseline)})",
            f"  verdict: {self.verdict}",
        ]
        return "\n".join(lines)


def _verdict(rate: Fraction, baseline: Fraction) -> str:
    if rate > baseline:
        return "beats-pir"
    if rate == baseline:
        return "degenerate"
    return "below-pir"


def rate_report(scheme: str, N: int, K: int, q: int) -> RateReport:
    L, Q = scheme_counts(scheme, N, K, q)
    rate = Fraction(L, Q)
    if rate != general_rate(N, K, q):
        raise ValidationError(f"counted rate {rate} disagrees with the closed form at N={N} K={K} q={q}")
    capacity = binary_capacity(K) if (N, q) == (2, 2) else None
    baseline = pir_virtual_rate(N, K, q)
    return RateReport(
        scheme=scheme, N=N, K=K, q=q, L=L, Q=Q,
        rate=rate,
        capacity=capacity,
        asymptotic=asymptotic_capacity(N),
        excess=excess(N, K, q),
        pir_baseline=baseline,
        verdict=_verdict(rate, baseline),
    )


def rate_table(scheme: str, N: int, q: int, k_min: int, k_max: int) -> list[RateReport]:
    if k_min < 1 or k_max < k_min:
        raise ValidationError(f"bad K range [{k_min}, {k_max}]")
    return [rate_report(scheme, N, K, q) for K in range(k_min, k_max + 1)]


def to_csv(reports: list[RateReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue()


def to_kv(reports: list[RateReport]) -> str:
    """Versioned ``key = value`` document, one ``[row.i]`` section per report."""
    lines = ["format = pfr-rates/1", f"rows = {len(reports)}"]
    for i, r in enumerate(reports):
        lines.append("")
        lines.append(f"[row.{i}]")
        lines += [f"{k} = {v}" for k, v in r.row().items()]
    return "\n".join(lines) + "\n"
