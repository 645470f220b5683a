"""Covering-number and generalization-bound calculators.

Covering numbers are astronomically large for any useful radius, so ``kappa``
and ``xi`` are handled through their base-2 logarithms as ``mpmath`` numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import e, log, sqrt

import mpmath

__all__ = [
    "DEFAULT_EXPONENT",
    "BoundQuery",
    "GeneralizationBound",
    "covering_k",
    "covering_number_log2",
    "xi_log2",
    "xi",
    "xi_inverse",
    "generalization_bound",
]

DEFAULT_EXPONENT = 9.0 / 4.0
XI_BRACKET = (1e-6, 10.0)
XI_TOL = 1e-9


def _check_eps_c(epsilon, c):
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")


def covering_k(epsilon: float, c: float = 1.0, exponent: float = DEFAULT_EXPONENT) -> mpmath.mpf:
    """``k = ceil(2 ** (exponent * c / epsilon**2))`` as an exact integer-valued mpf."""
    _check_eps_c(epsilon, c)
    x = mpmath.mpf(exponent) * mpmath.mpf(c) / mpmath.mpf(epsilon) ** 2
    with mpmath.workprec(int(x) + 80):
        return mpmath.ceil(mpmath.power(2, x))


def covering_number_log2(epsilon: float, c: float = 1.0, exponent: float = DEFAULT_EXPONENT) -> mpmath.mpf:
    """``log2 kappa = k**2``."""
    k = covering_k(epsilon, c, exponent)
    with mpmath.workprec(max(2 * int(mpmath.log(k, 2)) + 80, 53)):
        return k * k


def xi_log2(epsilon: float, c: float = 1.0, exponent: float = DEFAULT_EXPONENT) -> mpmath.mpf:
    """``log2 xi`` with ``xi = kappa**2 ln(kappa) / epsilon**2`` (natural log)."""
    lk = covering_number_log2(epsilon, c, exponent)
    return 2 * lk + mpmath.log(lk * mpmath.ln(2), 2) - 2 * mpmath.log(mpmath.mpf(epsilon), 2)


def xi(epsilon: float, c: float = 1.0, exponent: float = DEFAULT_EXPONENT) -> mpmath.mpf:
    return mpmath.power(2, xi_log2(epsilon, c, exponent))


def xi_inverse(target, c: float = 1.0, exponent: float = DEFAULT_EXPONENT, log2: bool = False) -> float:
    """Smallest ``epsilon`` (to within 1e-9) with ``xi(epsilon) <= target``.

    ``xi`` is strictly decreasing but jumps wherever ``k`` changes, so this is
    the generalized inverse; it is a true inverse away from the jumps. Pass
    ``log2=True`` to give the target as its base-2 logarithm.
    """
    lt = mpmath.mpf(target) if log2 else None
    if lt is None:
        if not target > 0:
            raise ValueError(f"target must be positive, got {target}")
        lt = mpmath.log(mpmath.mpf(target), 2)
    lo, hi = XI_BRACKET
    if xi_log2(hi, c, exponent) > lt:
        raise ValueError(
            f"target 2**{mpmath.nstr(lt, 6)} is below xi({hi}); outside the invertible range"
        )
    if xi_log2(lo, c, exponent) <= lt:
        raise ValueError(f"target is above xi({lo}); outside the invertible range")
    while hi - lo > XI_TOL:
        mid = 0.5 * (lo + hi)
        if xi_log2(mid, c, exponent) <= lt:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class BoundQuery:
    N: float
    C: int
    L: float
    loss_at_zero: float = 0.0
    p: float = 2.0 / e
    c: float = 1.0
    exponent: float = DEFAULT_EXPONENT

    def __post_init__(self):
        if not self.C >= 1:
            raise ValueError(f"class count C must be at least 1, got {self.C}")
        if self.L < 0 or self.loss_at_zero < 0:
            raise ValueError("L and loss_at_zero must be nonnegative")
        if not 0 < self.p <= 2:
            raise ValueError(f"p must lie in (0, 2], got {self.p}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not mpmath.mpf(self.N) > 2 * self.C**2:
            raise ValueError(f"N must exceed 2*C**2 = {2 * self.C ** 2}, got {self.N}")


@dataclass(frozen=True)
class GeneralizationBound:
    value: float
    probability: float
    epsilon: float

    def to_dict(self) -> dict:
        return {"bound": self.value, "probability": self.probability, "epsilon": self.epsilon}


def generalization_bound(q: BoundQuery) -> GeneralizationBound:
    """Right-hand side ``xi^-1(N/2C) (2L + (L + E0)/sqrt(2) (1 + sqrt(ln(2/p))))``.

    Also returns the probability ``1 - C p - 2 C**2 / N`` of the event on
    which it holds (possibly negative, i.e. vacuous).
    """
    N = mpmath.mpf(q.N)
    eps = xi_inverse(N / (2 * q.C), q.c, q.exponent)
    factor = 2 * q.L + (q.L + q.loss_at_zero) / sqrt(2) * (1 + sqrt(log(2 / q.p)))
    prob = float(1 - q.C * q.p - 2 * q.C**2 / N)
    return GeneralizationBound(eps * factor, prob, eps)
