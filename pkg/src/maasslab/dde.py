"""Method-of-steps integrator for the sieve delay differential equations.

The family solved here is parametrized by a weight pair (chi0, chi1) with
chi0 > 0 > chi1.  Writing e0 = chi0 - 1 and kappa = chi0 - chi1, the
solution sigma satisfies

    sigma(u) = u^e0                                   on (0, 1],
    (u^{-e0} sigma(u))' = -kappa * sigma(u-1) / u^{e0+1}   for u > 1.

The weight pair (2, -2) gives (u^{-1} sigma)' = -(4/u^2) sigma(u-1) with
sigma(u) = u initially; (1, -3) gives sigma' = -(4/u) sigma(u-1) with
sigma = 1 initially.  Within each unit interval the right-hand side
depends only on the previous segment, so classical fourth-order stepping
reduces to composite Simpson quadrature of a known function; the delayed
value at half-grid points is obtained by cubic interpolation on the
stored previous segment.  Breakpoints at integers are respected exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import spence

from .errors import InvalidInputError, SignChangeNotFoundError, UnsupportedRangeError

STEP_MIN = 1e-7
STEP_MAX = 1e-2
DEFAULT_FIRST_ZERO_TOL = 1e-6
DEFAULT_U_CAP = 10.0


@dataclass(frozen=True)
class DdeSpec:
    """Weight pair defining one delay differential equation instance."""

    chi0: float
    chi1: float

    def __post_init__(self):
        if not (self.chi0 > 0.0 > self.chi1):
            raise InvalidInputError(
                f"weights must satisfy chi0 > 0 > chi1, got ({self.chi0}, {self.chi1})")

    @property
    def initial_exponent(self) -> float:
        """Exponent e0 = chi0 - 1 of the initial segment u^e0."""
        return self.chi0 - 1.0

    @property
    def delay_coefficient(self) -> float:
        """Coefficient kappa = chi0 - chi1 of the delayed term."""
        return self.chi0 - self.chi1


@dataclass
class PiecewiseSolution:
    """Numeric solution stored per unit interval on a uniform grid."""

    spec: DdeSpec
    grid_step: float
    segments: list[np.ndarray]     # segment k holds sigma at k + j*grid_step
    u_max: float
    first_zero: float | None = field(default=None)

    def at(self, u: float) -> float:
        """Evaluate sigma(u) by cubic interpolation on the stored grid."""
        if not 0.0 < u <= len(self.segments):
            raise InvalidInputError(
                f"u must lie in (0, {len(self.segments)}], got {u}")
        return _eval_cubic(self.segments, self.grid_step, u)

    def nodes(self):
        """Yield (u, sigma(u)) grid pairs in increasing u, without duplicates."""
        for k, seg in enumerate(self.segments):
            start = 1 if k > 0 else 0
            for j in range(start, seg.size):
                yield k + j * self.grid_step, float(seg[j])


def _eval_cubic(segments: list[np.ndarray], h: float, u: float) -> float:
    k = min(int(u), len(segments) - 1)
    if u == k and k > 0:
        k -= 1                           # integer point: shared boundary node
    seg = segments[k]
    n = seg.size - 1
    x = (u - k) / h
    j = min(max(int(x) - 1, 0), n - 3)
    t = x - j
    # Lagrange cubic on nodes j..j+3
    w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0
    w1 = t * (t - 2) * (t - 3) / 2.0
    w2 = -t * (t - 1) * (t - 3) / 2.0
    w3 = t * (t - 1) * (t - 2) / 6.0
    return float(w0 * seg[j] + w1 * seg[j + 1] + w2 * seg[j + 2] + w3 * seg[j + 3])


def _midpoints(seg: np.ndarray) -> np.ndarray:
    """Cubic interpolation at half-grid points of a uniform segment."""
    n = seg.size - 1
    mid = np.empty(n)
    if n >= 3:
        mid[1:-1] = (-seg[:-3] + 9.0 * seg[1:-2] + 9.0 * seg[2:-1] - seg[3:]) / 16.0
        # one-sided cubics at the ends
        mid[0] = (5.0 * seg[0] + 15.0 * seg[1] - 5.0 * seg[2] + seg[3]) / 16.0
        mid[-1] = (seg[-4] - 5.0 * seg[-3] + 15.0 * seg[-2] + 5.0 * seg[-1]) / 16.0
    else:
        mid[:] = 0.5 * (seg[:-1] + seg[1:])
    return mid


def solve(spec: DdeSpec, u_max: float, step: float) -> PiecewiseSolution:
    """Integrate sigma up to u_max with the given grid step.

    The step is snapped to 1/n so that integer breakpoints are grid
    nodes.  Output is reproducible bit-for-bit for a fixed step.
    """
    if u_max < 1.0:
        raise InvalidInputError(f"u_max must be >= 1, got {u_max}")
    if not STEP_MIN <= step <= STEP_MAX:
        raise InvalidInputError(
            f"step must lie in [{STEP_MIN}, {STEP_MAX}], got {step}")
    if spec.chi0 < 1.0:
        raise InvalidInputError(
            "integrator requires chi0 >= 1 (bounded initial segment)")
    n = max(int(round(1.0 / step)), 2)
    h = 1.0 / n
    e0 = spec.initial_exponent
    kappa = spec.delay_coefficient

    xs0 = np.arange(n + 1) * h
    segments = [xs0 ** e0 if e0 != 0.0 else np.ones(n + 1)]
    n_seg = max(1, math.ceil(u_max) - 1) + 1

    for k in range(1, n_seg):
        prev = segments[k - 1]
        us = k + np.arange(n + 1) * h
        g_nodes = -kappa * prev / us ** (e0 + 1.0)
        g_mid = -kappa * _midpoints(prev) / (us[:-1] + 0.5 * h) ** (e0 + 1.0)
        # f = u^{-e0} sigma;  f' = g known, so RK4 collapses to Simpson steps
        incr = (h / 6.0) * (g_nodes[:-1] + 4.0 * g_mid + g_nodes[1:])
        f = np.empty(n + 1)
        f[0] = prev[-1] / float(k) ** e0
        f[1:] = f[0] + np.cumsum(incr)
        sigma = us ** e0 * f
        sigma[0] = prev[-1]              # exact continuity at the breakpoint
        segments.append(sigma)

    sol = PiecewiseSolution(spec=spec, grid_step=h, segments=segments,
                            u_max=float(u_max))
    sol.first_zero = _locate_zero(sol)
    return sol


def _locate_zero(sol: PiecewiseSolution) -> float | None:
    """First sign change among grid nodes, refined by bisection."""
    h = sol.grid_step
    for k, seg in enumerate(sol.segments):
        if k == 0:
            continue
        sign_flip = np.nonzero(np.signbit(seg[1:]) != np.signbit(seg[:-1]))[0]
        if sign_flip.size == 0:
            continue
        j = int(sign_flip[0])
        lo, hi = k + j * h, k + (j + 1) * h
        f_lo = _eval_cubic(sol.segments, h, lo)
        if f_lo == 0.0:
            return lo
        for _ in range(200):
            midp = 0.5 * (lo + hi)
            f_mid = _eval_cubic(sol.segments, h, midp)
            if f_mid == 0.0 or hi - lo < 1e-15:
                return midp
            if (f_mid > 0) == (f_lo > 0):
                lo, f_lo = midp, f_mid
            else:
                hi = midp
        return 0.5 * (lo + hi)
    return None


def first_zero(spec: DdeSpec, tol: float = DEFAULT_FIRST_ZERO_TOL,
               u_cap: float = DEFAULT_U_CAP, initial_step: float = 1e-3) -> float:
    """Smallest u > 1 with sigma(u) = 0, to tolerance tol.

    Successive solves with halved integration steps are compared until
    two estimates differ by less than tol.
    """
    if tol < 1e-9:
        raise InvalidInputError(f"tol must be >= 1e-9, got {tol}")
    if not STEP_MIN <= initial_step <= STEP_MAX:
        raise InvalidInputError(f"initial_step out of [{STEP_MIN}, {STEP_MAX}]")
    step = initial_step
    prev_est = None
    while True:
        sol = solve(spec, u_cap, step)
        est = sol.first_zero
        if est is None or est > u_cap:
            raise SignChangeNotFoundError(
                f"no sign change of sigma below u = {u_cap} at step {step}")
        if prev_est is not None and abs(est - prev_est) < tol:
            return est
        if step / 2.0 < STEP_MIN:
            return est
        prev_est = est
        step /= 2.0


def _li2(x: float) -> float:
    return float(spence(1.0 - x))


def analytic_segment(spec: DdeSpec, u: float) -> float:
    """Closed-form sigma(u), available on (0, 2] for integer initial
    exponents 0 and 1, and on (2, 3] as well via one further exact
    integration (dilogarithm terms).

    Serves as an independent oracle for the numeric integrator.
    """
    e0 = spec.initial_exponent
    kappa = spec.delay_coefficient
    if abs(e0 - round(e0)) > 1e-12 or round(e0) not in (0, 1):
        raise UnsupportedRangeError(
            f"closed forms implemented for initial exponents 0 and 1, got {e0}")
    e0 = int(round(e0))
    if not 0.0 < u <= 3.0:
        raise UnsupportedRangeError(f"u must lie in (0, 3], got {u}")
    if u <= 1.0:
        return u ** e0 if e0 else 1.0
    if u <= 2.0:
        if e0 == 1:
            return u * (1.0 + kappa - kappa * math.log(u)) - kappa
        return 1.0 - kappa * math.log(u)
    if e0 == 1:
        # f = sigma/u;  f(u) = f(2) - kappa * (I(u) - I(2)) with
        # I the antiderivative of [(t-1)(1+kappa-kappa*ln(t-1)) - kappa]/t^2
        def J(t: float) -> float:
            return (math.log(t) ** 2 / 2.0 + _li2(1.0 / t)
                    + math.log(t - 1.0) / t - math.log(t - 1.0) + math.log(t))

        def I(t: float) -> float:
            return ((1.0 + kappa) * (math.log(t) + 1.0 / t)
                    - kappa * J(t) + kappa / t)

        f2 = (2.0 * (1.0 + kappa - kappa * math.log(2.0)) - kappa) / 2.0
        return u * (f2 - kappa * (I(u) - I(2.0)))
    # e0 == 0: sigma(u) = sigma(2) - kappa * int_2^u (1 - kappa*ln(t-1))/t dt
    def G(t: float) -> float:
        return math.log(t) ** 2 / 2.0 + _li2(1.0 / t)

    sigma2 = 1.0 - kappa * math.log(2.0)
    return (sigma2 - kappa * (math.log(u) - math.log(2.0))
            + kappa ** 2 * (G(u) - G(2.0)))


def closed_form_first_zero(spec: DdeSpec) -> float:
    """First zero of the closed-form segments, found by bisection on (1, 3]."""
    lo = None
    grid = np.linspace(1.0, 3.0, 4001)
    vals = [analytic_segment(spec, float(x)) for x in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            return float(a)
        if (fa > 0) != (fb > 0):
            lo, hi, f_lo = float(a), float(b), fa
            break
    if lo is None:
        raise SignChangeNotFoundError("no closed-form sign change on (1, 3]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = analytic_segment(spec, mid)
        if fm == 0.0 or hi - lo < 1e-15:
            return mid
        if (fm > 0) == (f_lo > 0):
            lo, f_lo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
