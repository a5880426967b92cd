"""Chebyshev-weight density machinery.

The scan weight at a prime p for a family of m forms is

    U(p) = (1 + 3*(A_1(p) + ... + A_m(p)) + 5*A4_1(p))^2,

a perfect square, so nonnegative.  At a prime where every member
violates the Ramanujan bound, each A_j exceeds 3 and A4_1 exceeds 5, so
U(p) > (1 + 9m + 25)^2; for m = 2 that threshold is 44^2 = 1936.
Averaging U against its expansion through the Hecke identities converts
that pointwise largeness into the density bounds 1 - 1/(26 + 9m).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import sieve
from .bounds import FormMeta
from .errors import CrossCheckError, DataGapError, InvalidInputError
from .satake import CoeffTriple

# primes with |lambda| within this guard of the closed boundary count as
# satisfying the Ramanujan bound in scans
RAMANUJAN_GUARD = 1e-9

TWO_FORM_THRESHOLD = 44 ** 2

REMARK_VARIANT_NOTE = "conditional: rests on an unestablished zero-free region"


@dataclass
class FormFamily:
    """Family of forms scanned together.

    The pairwise-distinctness hypothesis (no two members share their
    Ramanujan-exceptional prime set) cannot be decided from finite data;
    it is carried as a recorded assumption.
    """

    members: list[FormMeta]
    distinct_rp_assumed: bool = True

    def __post_init__(self):
        if len(self.members) < 2:
            raise InvalidInputError("a family needs at least 2 members")

    @property
    def m(self) -> int:
        return len(self.members)

    def assumptions(self) -> list[str]:
        out = []
        if self.distinct_rp_assumed:
            out.append("pairwise distinct Ramanujan-exceptional prime sets "
                       "(asserted, not verified from data)")
        return out


@dataclass
class DensityReport:
    """Outcome of an exceptional-prime scan up to X."""

    X: int
    pi_X: int
    exceptional_count: int
    running_mean_U: float
    implied_upper: float
    theory_bound: float
    assumptions: list[str] = field(default_factory=list)
    exceptional_primes: list[int] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "X": self.X,
            "pi_X": self.pi_X,
            "exceptional_count": self.exceptional_count,
            "running_mean_U": self.running_mean_U,
            "implied_upper": self.implied_upper,
            "theory_bound": self.theory_bound,
            "assumptions": self.assumptions,
        }, sort_keys=True)


def chebyshev_weight(coeffs: Sequence[CoeffTriple], m: int) -> float:
    """U = (1 + 3*sum_j A_j + 5*A4_1)^2 for a list of m coefficient triples."""
    if m < 2:
        raise InvalidInputError(f"m must be >= 2, got {m}")
    if len(coeffs) != m:
        raise InvalidInputError(
            f"expected {m} coefficient triples, got {len(coeffs)}")
    linear = 1.0 + 3.0 * sum(c.a2 for c in coeffs) + 5.0 * coeffs[0].a4
    return linear * linear


def expansion_residual(coeffs: tuple[CoeffTriple, CoeffTriple]) -> float:
    """|squared form - Hecke-identity expansion| for a pair of triples.

    The expansion substitutes A^2 = A4 + A + 1 for both members and
    A*A4 = |A3|^2 - 1 for the first, leaving
    -11 + 15 A1 + 15 A2 + 19 A4_1 + 9 A4_2 + 18 A1 A2 + 30 A4_1 A2
    + 30 |A3_1|^2 + 25 A4_1^2.
    """
    c1, c2 = coeffs
    for c in (c1, c2):
        r1, r2 = c.identity_residuals()
        if max(r1, r2) > 1e-10:
            raise InvalidInputError(
                f"coefficient triple violates the Hecke identities: "
                f"residuals ({r1}, {r2})")
    squared = chebyshev_weight((c1, c2), 2)
    expanded = (-11.0 + 15.0 * c1.a2 + 15.0 * c2.a2 + 19.0 * c1.a4
                + 9.0 * c2.a4 + 18.0 * c1.a2 * c2.a2 + 30.0 * c1.a4 * c2.a2
                + 30.0 * c1.a3_abs_sq + 25.0 * c1.a4 ** 2)
    return abs(squared - expanded)


def density_lower_bound(m: int, variant: str = "paper") -> Fraction:
    """Exact lower bound for the density of primes where some member
    satisfies the Ramanujan bound: 1 - 1/(26 + 9m), or the conditional
    variant 1 - 1/(1 + 9m + 25m^2)."""
    if m < 1:
        raise InvalidInputError(f"m must be >= 1, got {m}")
    if variant == "paper":
        return 1 - Fraction(1, 26 + 9 * m)
    if variant == "remark":
        return 1 - Fraction(1, 1 + 9 * m + 25 * m * m)
    raise InvalidInputError(f"variant must be 'paper' or 'remark', got {variant!r}")


def pigeonhole_intersection(d1: Fraction, d2: Fraction) -> Fraction:
    """max(d1 + d2 - 1, 0): lower density of an intersection from two
    lower densities."""
    d1, d2 = Fraction(d1), Fraction(d2)
    for d in (d1, d2):
        if not 0 <= d <= 1:
            raise InvalidInputError(f"density out of [0, 1]: {d}")
    return max(d1 + d2 - 1, Fraction(0))


def _triples_from_eigenvalues(ps: np.ndarray, lams: np.ndarray
                              ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (A, |A3|^2, A4) from real eigenvalues via the literal
    parameter sums (trigonometric for tempered, hyperbolic beyond)."""
    mod = np.abs(lams)
    a2 = lams * lams - 1.0
    a3sq = np.empty_like(a2)
    a4 = np.empty_like(a2)

    t = mod <= 2.0
    # tempered: alpha/beta = e^{2i theta}, 2 cos(k theta) sums
    c2 = np.clip(mod[t] ** 2 / 2.0 - 1.0, -1.0, 1.0)     # cos(2 theta)
    two_theta = np.arccos(c2)
    a3 = 2.0 * np.cos(1.5 * two_theta) + 2.0 * np.cos(0.5 * two_theta)
    a3sq[t] = a3 * a3
    a4[t] = 2.0 * np.cos(2.0 * two_theta) + 2.0 * c2 + 1.0

    nt = ~t
    if np.any(nt):
        # non-tempered: alpha/beta = p^{2 nu}, hyperbolic sums in w = p^nu + p^-nu
        w = mod[nt]
        r = (w / 2.0 + np.sqrt(np.maximum(w * w / 4.0 - 1.0, 0.0))) ** 2
        a3w = w ** 3 - 2.0 * w
        a3sq[nt] = a3w * a3w
        a4[nt] = r * r + r + 1.0 + 1.0 / r + 1.0 / (r * r)
    return a2, a3sq, a4


def exceptional_scan(family: FormFamily, X: int,
                     table: sieve.SieveTable | None = None,
                     threads: int = 1) -> DensityReport:
    """Scan primes up to X, count those where every member violates the
    Ramanujan bound, and average the Chebyshev weight.

    Primes dividing any member's level are excluded.  Missing
    coefficients raise DataGapError listing the gaps.  At every
    exceptional prime the weight is checked against the (1 + 9m + 25)^2
    threshold.
    """
    if X < 2:
        raise InvalidInputError(f"X must be >= 2, got {X}")
    primes = (table.primes[table.primes <= X] if table is not None
              else sieve.primes_upto(X))
    level_prod = 1
    for mem in family.members:
        level_prod *= mem.level
    mask = np.array([level_prod % int(p) != 0 for p in primes], dtype=bool)
    primes = primes[mask]

    lam_rows = []
    gaps = []
    for mem in family.members:
        coeffs = mem.coefficients or {}
        row = np.empty(primes.size)
        for i, p in enumerate(primes.tolist()):
            if p in coeffs:
                row[i] = coeffs[p]
            else:
                gaps.append((mem.label or f"level-{mem.level}", p))
        if gaps:
            continue
        lam_rows.append(row)
    if gaps:
        raise DataGapError(
            f"missing coefficients at {len(gaps)} primes "
            f"(first: {gaps[:5]})", gaps=gaps)

    def scan_chunk(lo_hi: tuple[int, int]) -> tuple[float, np.ndarray, np.ndarray]:
        lo, hi = lo_hi
        a2_sum = np.zeros(hi - lo)
        a4_first = None
        non_rp_all = np.ones(hi - lo, dtype=bool)
        for j, row in enumerate(lam_rows):
            lams = row[lo:hi]
            a2, _, a4 = _triples_from_eigenvalues(primes[lo:hi], lams)
            a2_sum += a2
            if j == 0:
                a4_first = a4
            non_rp_all &= np.abs(lams) > 2.0 + RAMANUJAN_GUARD
        linear = 1.0 + 3.0 * a2_sum + 5.0 * a4_first
        u_vals = linear * linear
        return float(np.sum(u_vals)), non_rp_all, u_vals

    n = primes.size
    threshold = (1.0 + 9.0 * family.m + 25.0) ** 2
    if n == 0:
        return DensityReport(X=X, pi_X=0, exceptional_count=0,
                             running_mean_U=float("nan"), implied_upper=0.0,
                             theory_bound=1.0 / (26 + 9 * family.m),
                             assumptions=family.assumptions())
    # fixed chunk size: identical partitioning (and float summation
    # order) no matter how many workers run the chunks
    chunk = 4096
    bounds_list = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    if threads > 1 and len(bounds_list) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(scan_chunk, bounds_list))
    else:
        results = [scan_chunk(b) for b in bounds_list]

    u_total = 0.0
    exceptional: list[int] = []
    for (lo, hi), (s, non_rp, u_vals) in zip(bounds_list, results):
        u_total += s
        idx = np.flatnonzero(non_rp)
        for i in idx:
            p = int(primes[lo + i])
            u_p = float(u_vals[i])
            if u_p <= threshold - 1e-6:
                raise CrossCheckError(
                    f"exceptional prime {p} has U = {u_p} <= {threshold}")
            exceptional.append(p)

    return DensityReport(
        X=X, pi_X=n, exceptional_count=len(exceptional),
        running_mean_U=u_total / n,
        implied_upper=len(exceptional) / n,
        theory_bound=1.0 / (26 + 9 * family.m),
        assumptions=family.assumptions(),
        exceptional_primes=exceptional)


def pnt_trend(stream: Mapping[int, float], x_grid: Sequence[int]) -> list[dict]:
    """Running averages sum_{p <= X} a_p / pi(X) along a grid of X values.

    Report-only: trends toward 0 for first moments of the symmetric-power
    coefficients and toward limits <= 1 for their normalized second
    moments are expected, not asserted.
    """
    if not stream:
        raise InvalidInputError("empty coefficient stream")
    x_max = max(x_grid)
    required = sieve.primes_upto(x_max)
    missing = [int(p) for p in required if int(p) not in stream]
    if missing:
        raise InvalidInputError(
            f"stream must cover all primes <= {x_max}; missing "
            f"{len(missing)} (first: {missing[:5]})")
    ps = np.sort(np.fromiter((p for p in stream if p <= x_max), dtype=np.int64))
    vals = np.array([stream[int(p)] for p in ps])
    csum = np.cumsum(vals)
    rows = []
    for X in x_grid:
        k = int(np.searchsorted(ps, X, side="right"))
        if k == 0:
            raise InvalidInputError(f"no primes <= {X} in stream")
        rows.append({"X": int(X), "pi_X": k, "ratio": float(csum[k - 1] / k)})
    return rows
