"""Conductor and exponent bookkeeping for the least-prime bounds.

The least-prime exponents come from first zeros of the sieve delay
differential equations: the two-form weight pair (2, -2) and the
three-form pair (1, -3).  Bounds are emitted as (base, exponent) pairs;
the multiplicative constant in front is not extracted, and the payload
says so explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from . import dde
from .errors import InvalidInputError

# weight pairs backing the two supported form counts
_WEIGHTS = {2: (2.0, -2.0), 3: (1.0, -3.0)}


@dataclass(frozen=True)
class FormMeta:
    """Level, spectral parameter and optional coefficient table of a form."""

    level: int
    spectral_parameter: float
    coefficients: Mapping[int, float] | None = None
    label: str | None = None

    def __post_init__(self):
        if self.level < 1:
            raise InvalidInputError(f"level must be >= 1, got {self.level}")


def conductor(meta: FormMeta) -> float:
    """Analytic conductor N^2 (1 + |t|)^2."""
    return meta.level ** 2 * (1.0 + abs(meta.spectral_parameter)) ** 2


@dataclass(frozen=True)
class ExponentDetail:
    """How a least-prime exponent was derived from a first zero."""

    num_forms: int
    zero: float                 # numeric first zero of the weight pair's DDE
    u_used: float               # value of 1/exponent actually exported
    exponent: float             # rounded up at the 6th decimal
    closed_form_zero: float | None = None


def _round_up_6(x: float) -> float:
    # tiny guard so values already on the grid are not bumped a notch
    return math.ceil(x * 1e6 - 1e-9) / 1e6


@lru_cache(maxsize=None)
def exponent_detail(num_forms: int) -> ExponentDetail:
    """Exponent derivation for 2 or 3 forms.

    Two forms: the first zero (~2.2352796) is truncated at the 5th
    decimal to 2.23527, and the exponent is 1/U rounded up at the 6th
    decimal, giving 0.447374.  Three forms: the zero equals e^{1/4} in
    closed form; the 5-decimal truncation is too coarse there (it moves
    the exponent by 7e-6), so the exponent is taken from the zero itself
    with the same upward rounding, giving 0.778801.  Either way
    exponent * U >= 1, keeping the exported bound valid.
    """
    if num_forms not in _WEIGHTS:
        raise InvalidInputError(f"num_forms must be 2 or 3, got {num_forms}")
    spec = dde.DdeSpec(*_WEIGHTS[num_forms])
    zero = dde.first_zero(spec, tol=1e-8, initial_step=1e-4)
    closed = dde.closed_form_first_zero(spec)
    if num_forms == 2:
        u_used = math.floor(zero * 1e5) / 1e5
    else:
        u_used = zero
    exponent = _round_up_6(1.0 / u_used)
    return ExponentDetail(num_forms=num_forms, zero=zero, u_used=u_used,
                          exponent=exponent, closed_form_zero=closed)


def least_prime_exponent(num_forms: int) -> float:
    """Exported least-prime exponent: 0.447374 (two forms), 0.778801 (three)."""
    return exponent_detail(num_forms).exponent


@dataclass(frozen=True)
class BoundResult:
    """A least-prime bound of the shape constant * base^exponent."""

    base: float
    exponent: float
    source_zero: float
    u_used: float
    implied_constant: str = "unspecified"

    def to_json_dict(self) -> dict:
        return {
            "base": self.base,
            "exponent": self.exponent,
            "implied_constant": self.implied_constant,
            "source_zero": self.source_zero,
            "U_used": self.u_used,
        }


def least_prime_bound(metas: list[FormMeta]) -> BoundResult:
    """Bound pair for 2 or 3 forms: base = prod N_i (1 + |t_i|)."""
    if len(metas) not in _WEIGHTS:
        raise InvalidInputError(
            f"expected 2 or 3 forms, got {len(metas)}")
    base = 1.0
    for m in metas:
        base *= m.level * (1.0 + abs(m.spectral_parameter))
    det = exponent_detail(len(metas))
    return BoundResult(base=base, exponent=det.exponent,
                       source_zero=det.zero, u_used=det.u_used)


def convexity_exponent(sigma: float) -> float:
    """Exponent (1 - sigma)/2 of the conductor in the vertical-line bound."""
    if not 0.0 < sigma < 1.0:
        raise InvalidInputError(f"sigma must lie in (0, 1), got {sigma}")
    return (1.0 - sigma) / 2.0
