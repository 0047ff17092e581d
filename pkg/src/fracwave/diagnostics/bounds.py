"""Closed-form blow-up time bounds and the root of the auxiliary quadratic.

Every function here is pure arithmetic on its arguments, written exactly as
the formulas are stated (including their sign conventions), so they can be
regression-tested against independent evaluations.
"""

from __future__ import annotations

import math

__all__ = [
    "quadratic_root_r2",
    "tstar_log_bound",
    "tstar_b_zero",
    "tstar_b_positive",
    "tstar_b_positive_power",
    "bound_negative_slope",
    "bound_negative_log",
    "bound_zero_slope",
    "bound_zero_slope_plus",
    "bound_positive_sqrt",
    "bound_positive_power",
    "case_iii_r",
]


def quadratic_root_r2(delta: float) -> float:
    """r2 = 2(delta+1) - 2 sqrt((delta+1) delta)."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    return 2.0 * (delta + 1.0) - 2.0 * math.sqrt((delta + 1.0) * delta)


def case_iii_r(p: float) -> float:
    """r = p - 2 sqrt(p^2 - p), the factor in the positive-energy hypothesis."""
    if p <= 1.0:
        raise ValueError("p must exceed 1")
    return p - 2.0 * math.sqrt(p * p - p)


# -- bounds for J'(t)^2 >= alpha + b J^{2 + 1/delta} ---------------------------


def tstar_log_bound(t0: float, J0: float, alpha: float, b: float) -> float:
    """b < 0 and J0 < min{1, sqrt(alpha/-b)}:  t0 + ln(s / (s - J0)) / sqrt(-b), s = sqrt(alpha/-b)."""
    if not b < 0.0:
        raise ValueError("log bound needs b < 0")
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    s = math.sqrt(alpha / -b)
    if not J0 < min(1.0, s):
        raise ValueError("log bound needs J(t0) < min{1, sqrt(alpha/-b)}")
    return t0 + math.log(s / (s - J0)) / math.sqrt(-b)


def tstar_b_zero(t0: float, J0: float, alpha: float) -> float:
    """b = 0:  t0 + J0 / sqrt(alpha)."""
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    return t0 + J0 / math.sqrt(alpha)


def tstar_b_positive(J0: float, alpha: float) -> float:
    """b > 0:  J0 / sqrt(alpha)."""
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    return J0 / math.sqrt(alpha)


def tstar_b_positive_power(t0: float, J0: float, alpha: float, b: float, delta: float) -> float:
    """b > 0:  t0 + 2^{(3d+1)/(2d)} (d c / sqrt(alpha)) (1 - [1 + c J0]^{1/(2d)}),  c = (b/alpha)^{d/(2+d)}.

    Evaluated as stated; with the '+' inside the bracket the correction is
    negative, so the value can fall below t0.
    """
    if not (alpha > 0.0 and b > 0.0 and delta > 0.0):
        raise ValueError("power bound needs alpha > 0, b > 0, delta > 0")
    c = (b / alpha) ** (delta / (2.0 + delta))
    pre = 2.0 ** ((3.0 * delta + 1.0) / (2.0 * delta))
    return t0 + pre * delta * c / math.sqrt(alpha) * (1.0 - (1.0 + c * J0) ** (1.0 / (2.0 * delta)))


# -- Theorem-level bounds in terms of J(t0), J'(t0), sigma, b, gamma1 ----------


def bound_negative_slope(t0: float, J0: float, Jp0: float) -> float:
    """Case (i):  t0 - J(t0)/J'(t0)."""
    if Jp0 == 0.0:
        raise ValueError("J'(t0) = 0")
    return t0 - J0 / Jp0


def bound_negative_log(t0: float, J0: float, sigma: float, b: float) -> float:
    """Case (i), J(t0) < min{1, sqrt(sigma/-b)}:  t0 + ln(s/(s - J0))/sqrt(-b)."""
    return tstar_log_bound(t0, J0, sigma, b)


def bound_zero_slope(t0: float, J0: float, Jp0: float) -> float:
    """Case (ii), first form:  t0 - J(t0)/J'(t0)."""
    return bound_negative_slope(t0, J0, Jp0)


def bound_zero_slope_plus(t0: float, J0: float, Jp0: float) -> float:
    """Case (ii), second form:  t0 + J(t0)/J'(t0)."""
    if Jp0 == 0.0:
        raise ValueError("J'(t0) = 0")
    return t0 + J0 / Jp0


def bound_positive_sqrt(J0: float, sigma: float) -> float:
    """Case (iii):  J(t0)/sqrt(sigma)."""
    return tstar_b_positive(J0, sigma)


def bound_positive_power(t0: float, J0: float, sigma: float, b: float, gamma1: float) -> float:
    """Case (iii):  t0 + 2^{(3g+1)/(2g)} (g c/sqrt(sigma)) {1 - [1 - c J0]^{1/(2g)}},  c = (b/sigma)^{g/(2+g)}."""
    if not (sigma > 0.0 and b > 0.0 and gamma1 > 0.0):
        raise ValueError("needs sigma > 0, b > 0, gamma1 > 0")
    c = (b / sigma) ** (gamma1 / (2.0 + gamma1))
    if c * J0 > 1.0:
        raise ValueError("1 - c J(t0) < 0: bound undefined")
    pre = 2.0 ** ((3.0 * gamma1 + 1.0) / (2.0 * gamma1))
    return t0 + pre * gamma1 * c / math.sqrt(sigma) * (1.0 - (1.0 - c * J0) ** (1.0 / (2.0 * gamma1)))
