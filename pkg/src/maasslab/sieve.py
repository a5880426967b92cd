"""Brute-force laboratory for squarefree-supported multiplicative functions.

Everything here is exact enumeration against a smallest-prime-factor
table: threshold weights h (chi0 on primes up to a cutoff y, chi1
beyond), coefficient tables, Dirichlet convolutions and their Moebius
inversions, the partial sums H(t), the log-weighted sums, the Euler
product constant c(a), and the local factor of the auxiliary Euler
product whose x^1 coefficient cancels identically.

Convolution identities are evaluated in exact rational arithmetic
(Fraction); enumerations use float64, whose sums stay exact for the
integer-valued weights and sizes handled here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import dde
from .errors import (CrossCheckError, InvalidInputError, PreconditionError,
                     ResourceLimitError)

DENSE_LIMIT = 10 ** 7
HARD_LIMIT = 2 * 10 ** 8


def primes_upto(n: int) -> np.ndarray:
    """Primes <= n as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _squarefree_flags(limit: int, primes: np.ndarray) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[0] = False
    for p in primes[primes <= math.isqrt(limit)]:
        flags[p * p::p * p] = False
    return flags


@dataclass
class SieveTable:
    """Immutable factorization tables up to a limit.

    spf[n] is the smallest prime factor of n (dense range only); above
    the dense range the table keeps primes and squarefree flags and
    factors by trial division over the stored primes.
    """

    limit: int
    spf: np.ndarray
    squarefree: np.ndarray
    primes: np.ndarray
    dense_limit: int

    def factor(self, n: int) -> dict[int, int]:
        """Prime factorization {p: e}; O(log n) in the dense range."""
        n = int(n)
        if not 1 <= n <= self.limit:
            raise InvalidInputError(f"n must lie in [1, {self.limit}], got {n}")
        out: dict[int, int] = {}
        if n <= self.dense_limit:
            while n > 1:
                p = int(self.spf[n])
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out[p] = e
            return out
        for p in self.primes:
            p = int(p)
            if p * p > n:
                break
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out[p] = e
        if n > 1:
            out[n] = 1
        return out

    def is_squarefree(self, n: int) -> bool:
        return bool(self.squarefree[int(n)])

    def radical(self, n: int) -> int:
        r = 1
        for p in self.factor(n):
            r *= p
        return r

    def prime_count(self, x: float) -> int:
        """pi(x) over the stored primes."""
        return int(np.searchsorted(self.primes, x, side="right"))


def build_table(limit: int, allow_large: bool = False) -> SieveTable:
    """Build factorization tables up to limit.

    Limits above 10^7 need allow_large=True and are capped at 2*10^8;
    their spf array covers only the dense prefix.
    """
    if limit < 2:
        raise InvalidInputError(f"limit must be >= 2, got {limit}")
    if limit > HARD_LIMIT:
        raise ResourceLimitError(
            f"limit {limit} exceeds the hard cap {HARD_LIMIT}")
    if limit > DENSE_LIMIT and not allow_large:
        raise ResourceLimitError(
            f"limit {limit} exceeds {DENSE_LIMIT}; pass allow_large=True")

    dense = min(limit, DENSE_LIMIT)
    spf = np.zeros(dense + 1, dtype=np.int32)
    for p in range(2, math.isqrt(dense) + 1):
        if spf[p] == 0:
            sl = spf[p * p::p]
            sl[sl == 0] = p
    ns = np.arange(dense + 1, dtype=np.int32)
    unmarked = spf == 0
    spf[unmarked] = ns[unmarked]
    spf[0] = spf[1] = 0

    if limit <= DENSE_LIMIT:
        primes = np.flatnonzero(spf == ns).astype(np.int64)
        primes = primes[primes >= 2]
    else:
        primes = primes_upto(limit)
    squarefree = _squarefree_flags(limit, primes)
    return SieveTable(limit=limit, spf=spf, squarefree=squarefree,
                      primes=primes, dense_limit=dense)


@dataclass(frozen=True)
class MultFuncSpec:
    """A squarefree-supported multiplicative function.

    Kinds: threshold-weight (chi0 at primes <= y, chi1 beyond),
    coefficient-table (explicit per-prime values, 0 where absent),
    convolution (Dirichlet product of two specs) and moebius-quotient
    (the g with numerator = weight * g).  The value at squarefree n is
    the product of the prime values; non-squarefree n gives 0.
    q is the default coprimality modulus: values at n with (n, q) > 1
    are dropped by the summation operations.
    """

    kind: str
    y: int = 0
    chi0: float = 0.0
    chi1: float = 0.0
    table: Mapping[int, float] | None = None
    left: "MultFuncSpec | None" = None
    right: "MultFuncSpec | None" = None
    q: int = 1

    @classmethod
    def threshold(cls, y: int, chi0: float, chi1: float, q: int = 1) -> "MultFuncSpec":
        if y < 2:
            raise InvalidInputError(f"threshold y must be >= 2, got {y}")
        return cls(kind="threshold-weight", y=int(y), chi0=float(chi0),
                   chi1=float(chi1), q=int(q))

    @classmethod
    def from_table(cls, values: Mapping[int, float], q: int = 1) -> "MultFuncSpec":
        return cls(kind="coefficient-table", table=dict(values), q=int(q))

    @classmethod
    def convolution(cls, left: "MultFuncSpec", right: "MultFuncSpec",
                    q: int = 1) -> "MultFuncSpec":
        return cls(kind="convolution", left=left, right=right, q=int(q))

    @classmethod
    def moebius_quotient(cls, numerator: "MultFuncSpec", weight: "MultFuncSpec",
                         q: int = 1) -> "MultFuncSpec":
        return cls(kind="moebius-quotient", left=numerator, right=weight, q=int(q))

    def prime_value(self, p: int) -> float:
        if self.kind == "threshold-weight":
            return self.chi0 if p <= self.y else self.chi1
        if self.kind == "coefficient-table":
            return float(self.table.get(int(p), 0.0))
        if self.kind == "convolution":
            return self.left.prime_value(p) + self.right.prime_value(p)
        if self.kind == "moebius-quotient":
            return self.left.prime_value(p) - self.right.prime_value(p)
        raise InvalidInputError(f"unknown spec kind {self.kind!r}")

    def prime_value_exact(self, p: int) -> Fraction:
        if self.kind == "threshold-weight":
            return Fraction(self.chi0 if p <= self.y else self.chi1)
        if self.kind == "coefficient-table":
            return Fraction(self.table.get(int(p), 0.0))
        if self.kind == "convolution":
            return self.left.prime_value_exact(p) + self.right.prime_value_exact(p)
        if self.kind == "moebius-quotient":
            return self.left.prime_value_exact(p) - self.right.prime_value_exact(p)
        raise InvalidInputError(f"unknown spec kind {self.kind!r}")

    def value(self, n: int, table: SieveTable) -> float:
        """Multiplicative value at n; 0 off the squarefree support."""
        n = int(n)
        if n == 1:
            return 1.0
        if not table.is_squarefree(n):
            return 0.0
        v = 1.0
        for p in table.factor(n):
            v *= self.prime_value(p)
        return v

    def value_exact(self, n: int, table: SieveTable) -> Fraction:
        n = int(n)
        if n == 1:
            return Fraction(1)
        if not table.is_squarefree(n):
            return Fraction(0)
        v = Fraction(1)
        for p in table.factor(n):
            v *= self.prime_value_exact(p)
        return v


def _coprimality_primes(q: int, table: SieveTable) -> list[int]:
    if q < 1:
        raise InvalidInputError(f"q must be >= 1, got {q}")
    if q == 1:
        return []
    if q <= table.limit:
        return sorted(table.factor(q))
    out = []
    qq = q
    for p in table.primes:
        p = int(p)
        if p * p > qq:
            break
        if qq % p == 0:
            out.append(p)
            while qq % p == 0:
                qq //= p
    if qq > 1:
        out.append(qq)
    return out


def values_upto(spec: MultFuncSpec, t: float, q: int | None,
                table: SieveTable) -> np.ndarray:
    """Array v with v[n] = spec value at n for squarefree (n, q) = 1, else 0."""
    t = int(t)
    if not 1 <= t <= table.limit:
        raise InvalidInputError(f"t must lie in [1, {table.limit}], got {t}")
    q_eff = spec.q if q is None else int(q)
    vals = np.where(table.squarefree[:t + 1], 1.0, 0.0)
    ps = table.primes[table.primes <= t]
    if spec.kind == "threshold-weight":
        weights = np.where(ps <= spec.y, spec.chi0, spec.chi1)
        for p, w in zip(ps.tolist(), weights.tolist()):
            vals[p::p] *= w
    else:
        for p in ps.tolist():
            vals[p::p] *= spec.prime_value(p)
    for p in _coprimality_primes(q_eff, table):
        if p <= t:
            vals[p::p] = 0.0
    return vals


def h_sum(spec: MultFuncSpec, t: float, q: int | None, table: SieveTable) -> float:
    """Exact sum of spec values over squarefree n <= t with (n, q) = 1."""
    return float(np.sum(values_upto(spec, t, q, table)))


def log_weighted_sum(spec: MultFuncSpec, x: float, q: int | None,
                     table: SieveTable) -> float:
    """Sum of value(n) * log(x/n) over n <= x, computed two ways.

    The direct sum and the exact piecewise-constant integral of H(t)/t
    must agree to 1e-9 relative; disagreement raises CrossCheckError.
    """
    if x < 1.0:
        raise InvalidInputError(f"x must be >= 1, got {x}")
    if x == 1.0:
        return 0.0
    m = int(x)
    vals = values_upto(spec, m, q, table)
    ns = np.arange(m + 1, dtype=np.float64)
    ns[0] = 1.0
    direct = float(np.dot(vals[1:], math.log(x) - np.log(ns[1:])))

    H = np.cumsum(vals)
    steps = np.log(ns[2:m + 1]) - np.log(ns[1:m])   # log((k+1)/k), k = 1..m-1
    integral = float(np.dot(H[1:m], steps))
    integral += float(H[m]) * (math.log(x) - math.log(m))

    scale = max(abs(direct), abs(integral), 1.0)
    if abs(direct - integral) > 1e-9 * scale:
        raise CrossCheckError(
            f"log-weighted sum routes disagree: {direct} vs {integral}")
    return direct


def _divisors(n: int, table: SieveTable) -> list[int]:
    divs = [1]
    for p, e in table.factor(n).items():
        pk = 1
        new = []
        for _ in range(e):
            pk *= p
            new.extend(d * pk for d in divs)
        divs.extend(new)
    return divs


def dirichlet_convolve(left: MultFuncSpec, right: MultFuncSpec, n: int,
                       table: SieveTable) -> Fraction:
    """Exact divisor-sum convolution sum_{d|n} left(d) * right(n/d)."""
    n = int(n)
    if not 1 <= n <= table.limit:
        raise InvalidInputError(f"n must lie in [1, {table.limit}], got {n}")
    total = Fraction(0)
    for d in _divisors(n, table):
        total += left.value_exact(d, table) * right.value_exact(n // d, table)
    return total


def moebius_factor(b: MultFuncSpec, h: MultFuncSpec, n: int,
                   table: SieveTable) -> Fraction:
    """g(n) with b = h * g (Dirichlet); at primes g(p) = b(p) - h(p)."""
    n = int(n)
    if not 1 <= n <= table.limit:
        raise InvalidInputError(f"n must lie in [1, {table.limit}], got {n}")
    if not table.is_squarefree(n):
        raise InvalidInputError(f"n must be squarefree, got {n}")
    g = Fraction(1)
    for p in table.factor(n):
        g *= b.prime_value_exact(p) - h.prime_value_exact(p)
    return g


def euler_constant_c(a: int, truncation: int) -> tuple[float, float]:
    """Truncated Euler product c(a) and a bound on its log tail.

    c(a) = (phi(a)/a)^2 * prod_{p not dividing a, p <= truncation}
    (1 - 1/p)^2 (1 + 2/p).  Each omitted log factor is O(3/p^2), so the
    tail bound returned is 3 / (truncation * log(truncation)).
    """
    if a < 1:
        raise InvalidInputError(f"a must be >= 1, got {a}")
    if truncation < 10 ** 3:
        raise InvalidInputError(f"truncation must be >= 10^3, got {truncation}")
    ps = primes_upto(truncation)
    a_primes = _prime_divisors(a)
    val = 1.0
    for p in a_primes:
        val *= (1.0 - 1.0 / p) ** 2
    mask = np.ones(ps.size, dtype=bool)
    for p in a_primes:
        mask &= ps != p
    psf = ps[mask].astype(np.float64)
    log_prod = float(np.sum(2.0 * np.log1p(-1.0 / psf) + np.log1p(2.0 / psf)))
    tail = 3.0 / (truncation * math.log(truncation))
    return val * math.exp(log_prod), tail


def euler_constant_c_exact(a: int, truncation: int) -> Fraction:
    """c(a) as an exact rational of the truncated product (small truncations)."""
    if a < 1:
        raise InvalidInputError(f"a must be >= 1, got {a}")
    ps = primes_upto(truncation)
    a_primes = set(_prime_divisors(a))
    val = Fraction(1)
    for p in a_primes:
        val *= Fraction(p - 1, p) ** 2
    for p in ps.tolist():
        if p in a_primes:
            continue
        val *= Fraction(p - 1, p) ** 2 * Fraction(p + 2, p)
    return val


def _prime_divisors(a: int) -> list[int]:
    out = []
    x = a
    p = 2
    while p * p <= x:
        if x % p == 0:
            out.append(p)
            while x % p == 0:
                x //= p
        p += 1 if p == 2 else 2
    if x > 1:
        out.append(x)
    return out


def asymptotic_report(y: int, u_grid: list[float], q: int,
                      weights: tuple[float, float], table: SieveTable,
                      c_truncation: int = 10 ** 6) -> list[dict]:
    """Exact H(y^u) against the mean-value prediction c(q)*sigma(u)*log(y)*y^u.

    Report-only: the error term of the asymptotic carries no rate, so the
    rows record the relative error without asserting a bound.
    """
    if y < 2:
        raise InvalidInputError(f"y must be >= 2, got {y}")
    chi0, chi1 = weights
    u_max = max(u_grid)
    if y ** u_max > table.limit:
        raise InvalidInputError(
            f"y^max(u) = {y ** u_max:.0f} exceeds table limit {table.limit}")
    spec = MultFuncSpec.threshold(y, chi0, chi1, q=q)
    c_q, _ = euler_constant_c(q, c_truncation)
    sol = dde.solve(dde.DdeSpec(chi0, chi1), max(u_max, 1.0), 1e-4)
    rows = []
    for u in u_grid:
        t = y ** u
        exact = h_sum(spec, t, q, table)
        sigma_u = sol.at(u) if u > 0 else 0.0
        predicted = c_q * sigma_u * math.log(y) * (y ** u)
        rel = abs(exact - predicted) / abs(predicted) if predicted != 0 else math.inf
        rows.append({"y": y, "u": u, "exact": exact,
                     "predicted": predicted, "rel_error": rel})
    return rows


def lower_bound_check(b: MultFuncSpec, h: MultFuncSpec, z: float, q: int,
                      table: SieveTable) -> bool:
    """Check S(z) >= sum of h(n) log(z/n) after verifying the preconditions.

    Preconditions (verified by enumeration, violations raise
    PreconditionError with a witness): g = b/h has g(p) >= 0 for all
    primes p <= z with p coprime to q, and the partial sums of h stay
    nonnegative for every coprimality modulus r*q with r <= z.
    """
    z_int = int(z)
    if not 2 <= z_int <= table.limit:
        raise InvalidInputError(f"z must lie in [2, {table.limit}], got {z}")
    for p in table.primes[table.primes <= z_int].tolist():
        if q % p == 0:
            continue
        if b.prime_value(p) - h.prime_value(p) < 0:
            raise PreconditionError(
                f"g(p) < 0 at p = {p}: b(p) = {b.prime_value(p)}, "
                f"h(p) = {h.prime_value(p)}", witness=("g", p))

    base = values_upto(h, z_int, q, table)
    seen: set[int] = set()
    for r in range(1, z_int + 1):
        if not table.is_squarefree(r):
            continue
        rad = r
        if rad in seen:
            continue
        seen.add(rad)
        vals = base.copy()
        for p in table.factor(r):
            if q % p != 0:
                vals[p::p] = 0.0
        H = np.cumsum(vals)
        worst = int(np.argmin(H[1:])) + 1
        if H[worst] < 0:
            raise PreconditionError(
                f"partial sum of h negative at t = {worst} for r = {r}",
                witness=(worst, r))

    lhs = log_weighted_sum(b, z, q, table)
    rhs = log_weighted_sum(h, z, q, table)
    return lhs >= rhs - 1e-9 * max(1.0, abs(lhs), abs(rhs))


def local_factor_coeffs(a1: float, a2: float, p: int, order: int = 6) -> list[Fraction]:
    """Power-series coefficients of the auxiliary local Euler factor.

    Expands (1 - a1 x + a1 x^2 - x^3)(1 - a2 x + a2 x^2 - x^3)(1 + (a1+a2) x)
    in x = p^{-s}, exactly.  The x^1 coefficient cancels identically and
    the x^2 coefficient is a1*a2 + a1 + a2 - (a1+a2)^2.
    """
    if order < 0 or order > 6:
        raise InvalidInputError(f"order must lie in [0, 6], got {order}")
    if p < 2:
        raise InvalidInputError(f"p must be a prime >= 2, got {p}")
    f1 = Fraction(a1)
    f2 = Fraction(a2)
    poly1 = [Fraction(1), -f1, f1, Fraction(-1)]
    poly2 = [Fraction(1), -f2, f2, Fraction(-1)]
    poly3 = [Fraction(1), f1 + f2]
    prod = _poly_mul(_poly_mul(poly1, poly2), poly3)
    prod += [Fraction(0)] * (order + 1 - len(prod))
    return prod[:order + 1]


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out
