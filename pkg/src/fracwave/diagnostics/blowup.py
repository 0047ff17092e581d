"""Blow-up functionals: case classification, J(t), the J' inequality and T* bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gamma as gamma_fn

from ..wavesolver import RunConfig
from . import bounds as bf
from .functionals import F_prime, LevelData, energy, functional_F, kernel_mass
from .stability import DomainConstants

__all__ = [
    "BlowupAssessment",
    "BoundRecord",
    "ZERO_ENERGY_BAND",
    "classify_blowup_case",
    "blowup_J",
    "blowup_bounds",
    "blowup_inequality_residual",
    "lemma10_bound_check",
    "lemma11_F_second_check",
]

ZERO_ENERGY_BAND = 1e-10

NEGATIVE = "NegativeEnergy"
ZERO = "ZeroEnergy"
POSITIVE = "PositiveEnergy"
UNCLASSIFIED = "NotClassified"


@dataclass
class BoundRecord:
    formula: str
    value: Optional[float]
    reason: str = ""


@dataclass
class BlowupAssessment:
    case: str
    t0: float
    lower_t_star: float
    E0: float
    F0: float
    Fp0: float
    u0_l2sq: float
    sigma: Optional[float] = None
    b_coef: Optional[float] = None
    gamma1: float = 0.0
    J0: Optional[float] = None
    Jp0: Optional[float] = None
    T_window: Optional[float] = None
    bounds: list = field(default_factory=list)
    T_numeric: Optional[float] = None
    notes: list = field(default_factory=list)

    @property
    def j_bounds_applicable(self) -> bool:
        return self.gamma1 > 0.0


def _energy_scale(q0: LevelData, cfg: RunConfig) -> float:
    return float(0.5 * abs(q0.ut2) + 0.5 * abs(q0.ux2) + abs(q0.up) / cfg.p + 0.5 * cfg.b1 * abs(q0.phi_en))


def classify_blowup_case(q: LevelData, cfg: RunConfig) -> BlowupAssessment:
    """Label the initial data by the sign of E(0) and the matching hypothesis.

    F'(0) uses the analytic expression at t = 0 (memory and phi terms vanish).
    """
    q0 = q.row(0) if np.ndim(q.t) else q
    a = cfg.a
    E0 = float(energy(q0, cfg))
    F0 = float(functional_F(q0, cfg))
    Fp0 = float(F_prime(q0, cfg))
    u0sq = float(q0.u2)
    g1 = (cfg.p - 4.0) / 4.0
    scale = max(_energy_scale(q0, cfg), 1e-300)
    excess = Fp0 - a * u0sq
    notes = []
    if abs(E0) <= ZERO_ENERGY_BAND * scale:
        case = ZERO if excess > 0.0 else UNCLASSIFIED
        t_star = 0.0
    elif E0 < 0.0:
        case = NEGATIVE
        t_star = max(0.0, excess / (2.0 * cfg.p * E0))
    else:
        r = bf.case_iii_r(cfg.p)
        l0 = a * u0sq - 2.0 * E0
        notes.append("positive-energy hypothesis read as F'(0) > r [F(0) + l0] + a||u0||^2")
        case = POSITIVE if Fp0 > r * (F0 + l0) + a * u0sq else UNCLASSIFIED
        t_star = 0.0
    t0 = t_star if case == NEGATIVE else 0.0
    if g1 <= 0.0:
        notes.append("gamma1 = (p-4)/4 <= 0: J-based bounds inapplicable")
    return BlowupAssessment(
        case=case, t0=t0, lower_t_star=t_star, E0=E0, F0=F0, Fp0=Fp0, u0_l2sq=u0sq, gamma1=g1, notes=notes
    )


def blowup_J(q: LevelData, cfg: RunConfig, T: float, u0_l2sq: float, gamma1: float):
    """J(t) = [F(t) + a (T - t) ||u0||^2]^{-gamma1}; NaN where the bracket is not positive."""
    base = np.asarray(functional_F(q, cfg) + cfg.a * (T - np.asarray(q.t)) * u0_l2sq, dtype=float)
    out = np.full(base.shape, np.nan)
    pos = base > 0.0
    out[pos] = base[pos] ** (-gamma1)
    return out


def _sigma_b(Fp_t0: float, J0: float, E0: float, u0sq: float, a: float, p: float, g1: float):
    b = p * (p - 4.0) ** 2 / (2.0 * p - 4.0) * E0
    sigma = ((p - 4.0) ** 2 / 16.0 * (Fp_t0 - a * u0sq) ** 2 - b * J0 ** (-1.0 / g1)) * J0 ** (2.0 + 2.0 / g1)
    return sigma, b


def blowup_bounds(assess: BlowupAssessment, q: LevelData, cfg: RunConfig, T_window: float) -> BlowupAssessment:
    """Fill J(t0), J'(t0), sigma, b and every applicable T* bound.

    sigma carries a ||u0||^2 (with the damping factor a, as the derivation of
    the J' inequality requires); for a = 1 this is the stated form.
    """
    assess.T_window = T_window
    if assess.gamma1 <= 0.0:
        assess.bounds.append(BoundRecord("all-J", None, "gamma1 <= 0 (p <= 4)"))
        return assess
    t = np.asarray(q.t, dtype=float)
    J = blowup_J(q, cfg, T_window, assess.u0_l2sq, assess.gamma1)
    Jp = np.gradient(J, t, edge_order=2) if t.size >= 3 else np.full_like(J, np.nan)
    J0 = float(np.interp(assess.t0, t, J))
    Jp0 = float(np.interp(assess.t0, t, Jp))
    # stated F' expression at t0 = 0, discrete derivative of F for a later t0
    Fp_t0 = assess.Fp0 if assess.t0 == 0.0 else float(np.interp(assess.t0, t, np.gradient(functional_F(q, cfg), t)))
    assess.J0, assess.Jp0 = J0, Jp0
    if not (math.isfinite(J0) and J0 > 0.0):
        assess.bounds.append(BoundRecord("all-J", None, "J(t0) undefined: F(t0) + a(T-t0)||u0||^2 <= 0"))
        return assess
    sigma, b = _sigma_b(Fp_t0, J0, assess.E0, assess.u0_l2sq, cfg.a, cfg.p, assess.gamma1)
    assess.sigma, assess.b_coef = sigma, b
    t0 = assess.t0

    def attempt(name, fn, *args):
        try:
            assess.bounds.append(BoundRecord(name, float(fn(*args))))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            assess.bounds.append(BoundRecord(name, None, str(exc)))

    if assess.case == NEGATIVE:
        attempt("(5.34)", bf.bound_negative_slope, t0, J0, Jp0)
        attempt("(5.35)", bf.bound_negative_log, t0, J0, sigma, b)
    elif assess.case == ZERO:
        attempt("(5.36)", bf.bound_zero_slope, t0, J0, Jp0)
        attempt("(5.37)", bf.bound_zero_slope_plus, t0, J0, Jp0)
    elif assess.case == POSITIVE:
        attempt("(5.38)", bf.bound_positive_sqrt, J0, sigma)
        attempt("(5.39)", bf.bound_positive_power, t0, J0, sigma, b, assess.gamma1)
    else:
        assess.bounds.append(BoundRecord("none", None, "case not classified"))
    return assess


def blowup_inequality_residual(q: LevelData, assess: BlowupAssessment, cfg: RunConfig):
    """r(t) = J'(t)^2 - sigma - b J(t)^{2 + 1/gamma1} for t >= t0 (NaN before t0)."""
    if assess.sigma is None or assess.T_window is None:
        raise ValueError("run blowup_bounds first")
    t = np.asarray(q.t, dtype=float)
    J = blowup_J(q, cfg, assess.T_window, assess.u0_l2sq, assess.gamma1)
    Jp = np.gradient(J, t, edge_order=2)
    r = Jp**2 - assess.sigma - assess.b_coef * J ** (2.0 + 1.0 / assess.gamma1)
    r[t < assess.t0] = np.nan
    return r


def lemma10_bound_check(q: LevelData, cfg: RunConfig, constants: DomainConstants, T: float, C2: Optional[float] = None):
    """H(t) <= (1/2) C1 B e^{-eta C2} [C2^{2a-1} a + C2^{3-2a} eta] Gamma(a) T^4, C1 = sup{||u_x||^2, 1}.

    Diagnostic only.  Returns (holds, max H, rhs).
    """
    if C2 is None:
        C2 = cfg.time_step
    al, eta = cfg.alpha, cfg.eta
    C1 = max(float(np.max(q.ux2)), 1.0)
    rhs = 0.5 * C1 * constants.B_q * math.exp(-eta * C2) * (C2 ** (2 * al - 1) * al + C2 ** (3 - 2 * al) * eta)
    rhs *= gamma_fn(al) * T**4
    hmax = float(np.max(q.H))
    return bool(hmax <= rhs), hmax, rhs


def lemma11_F_second_check(q: LevelData, cfg: RunConfig, E0: float, tol: float = 0.0):
    """Per-level F'' >= (p+2)||u_t||^2 + 2p{-E(0) + a int||u_s||^2 - (1/2)[(1-int g)||u_x||^2 + g o u_x] + b1 int dissipation}.

    F'' is the centred second difference (interior levels only; endpoints
    reported True).  Returns (flags, margin) with margin = F'' - rhs.
    """
    t = np.asarray(q.t, dtype=float)
    F = np.asarray(functional_F(q, cfg), dtype=float)
    G = kernel_mass(q, cfg)
    p = cfg.p
    rhs = (p + 2.0) * q.ut2 + 2.0 * p * (
        -E0 + cfg.a * q.int_ut2 - 0.5 * ((1.0 - G) * q.ux2 + q.gcirc) + cfg.b1 * q.int_diss
    )
    margin = np.full(t.shape, np.inf)
    if t.size >= 3:
        dt = np.diff(t)
        F2 = 2.0 * ((F[2:] - F[1:-1]) / dt[1:] - (F[1:-1] - F[:-2]) / dt[:-1]) / (dt[1:] + dt[:-1])
        margin[1:-1] = F2 - rhs[1:-1]
    return margin >= -tol, margin
