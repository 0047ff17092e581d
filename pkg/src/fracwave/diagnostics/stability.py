"""Domain constants, global-existence test, Lyapunov functional and decay fit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from ..fracdiff import DiffusiveGrid, quad_A
from ..wavesolver import Domain1D, RunConfig
from .functionals import LevelData, energy, functional_I, snapshot

__all__ = [
    "NotApplicableError",
    "DomainConstants",
    "poincare_constant",
    "trace_constant",
    "domain_constants",
    "global_beta",
    "check_global_conditions",
    "global_bound_check",
    "LyapunovParams",
    "lyapunov_params",
    "lyapunov",
    "sandwich_check",
    "DecayRate",
    "decay_rate_constants",
    "lyapunov_decay_check",
    "DecayFit",
    "fit_decay",
]


class NotApplicableError(ValueError):
    """Hypotheses of the requested check are not met."""


@dataclass(frozen=True)
class DomainConstants:
    C_star: float
    B_q: float
    A0: float


def _stiffness(domain: Domain1D):
    """Tridiagonal stiffness of ||u_x||^2 and lumped mass of ||u||^2 on nodes 1..N."""
    n = domain.nx - 1
    dx = domain.dx
    diag = np.full(n, 2.0 / dx)
    diag[-1] = 1.0 / dx
    off = np.full(n - 1, -1.0 / dx)
    mass = np.full(n, dx)
    mass[-1] = 0.5 * dx
    return diag, off, mass


def poincare_constant(domain: Domain1D) -> float:
    """C* = max ||u|| / ||u_x|| over discrete fields with u(0) = 0.

    Smallest eigenvalue of the symmetrized pencil (K, M), via LAPACK's
    tridiagonal solver.
    """
    diag, off, mass = _stiffness(domain)
    s = 1.0 / np.sqrt(mass)
    d = diag * s * s
    e = off * s[:-1] * s[1:]
    try:
        lam = linalg.eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 0))
    except linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError("eigenvalue iteration did not converge") from exc
    return float(1.0 / math.sqrt(lam[0]))


def trace_constant(domain: Domain1D) -> float:
    """B = max |u(L)| / ||u_x||, i.e. sqrt(e_N^T K^{-1} e_N)."""
    diag, off, _ = _stiffness(domain)
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    y = linalg.solve_banded((1, 1), ab, rhs)
    return float(math.sqrt(y[-1]))


def domain_constants(domain: Domain1D, grid: DiffusiveGrid) -> DomainConstants:
    """C*, B and A0; A0 is infinite for eta = 0, where it diverges."""
    A0 = quad_A(grid, 0.0) if grid.params.eta > 0.0 else math.inf
    return DomainConstants(poincare_constant(domain), trace_constant(domain), A0)


def global_beta(C_star: float, p: float, E0: float) -> float:
    """beta = C*^p ((2p/(p-2)) E(0))^{(p-2)/2}."""
    if E0 < 0.0:
        raise NotApplicableError("E(0) < 0: global-existence test does not apply")
    return C_star**p * (2.0 * p / (p - 2.0) * E0) ** ((p - 2.0) / 2.0)


def check_global_conditions(u0, u1, cfg: RunConfig, constants: DomainConstants):
    """(beta, I(u0) > 0) for initial data; global regime iff beta < 1 and the flag is set."""
    q0 = snapshot(np.asarray(u0, dtype=float), np.asarray(u1, dtype=float), cfg)
    E0 = float(energy(q0, cfg))
    beta = global_beta(constants.C_star, cfg.p, E0)
    return beta, bool(functional_I(q0, cfg) > 0.0)


def global_bound_check(q: LevelData, cfg: RunConfig, E0: float, slack: float = 0.01):
    """||u_t||^2 + ||u_x||^2 + b1 int|phi|^2 <= C1 E(0), C1 = max{2/b1, 2p/(p-2), 2}.

    Returns (all_ok, max ratio lhs / (C1 E(0))).
    """
    b1 = cfg.b1
    cands = [2.0 * cfg.p / (cfg.p - 2.0), 2.0]
    if b1 > 0.0:
        cands.append(2.0 / b1)
    C1 = max(cands)
    lhs = np.asarray(q.ut2 + q.ux2 + b1 * q.phi_en, dtype=float)
    ratio = float(np.max(lhs)) / (C1 * E0) if E0 > 0 else math.inf
    return ratio <= 1.0 + slack, ratio


@dataclass(frozen=True)
class LyapunovParams:
    eps1: float
    eps2: float
    N: float
    delta: float

    @property
    def alpha1(self) -> float:
        return self.eps1 - self.N * self.eps2

    @property
    def alpha2(self) -> float:
        return self.eps1 + self.N * self.eps2


def lyapunov_params(
    cfg: RunConfig, constants: DomainConstants, delta: float = 1.0, eps2: float = 1.0, margin: float = 1.05
) -> LyapunovParams:
    """N and eps1 at ``margin`` times their lower bounds."""
    if not (delta > 0.0 and eps2 > 0.0 and margin > 1.0):
        raise ValueError("need delta > 0, eps2 > 0, margin > 1")
    b1 = cfg.b1
    p = cfg.p
    n_low = max(
        (2.0 * delta + 1.0) / (2.0 * delta * cfg.eta) if cfg.eta > 0 else math.inf,
        2.0 * p * (constants.A0 * constants.B_q * b1 * (2.0 * delta + 1.0) + constants.C_star) / (p - 2.0),
        1.0,
    )
    if not math.isfinite(n_low):
        raise NotApplicableError("eta = 0: N has no finite lower bound")
    N = margin * n_low
    return LyapunovParams(eps1=margin * N * eps2, eps2=eps2, N=N, delta=delta)


def lyapunov(q: LevelData, cfg: RunConfig, params: LyapunovParams):
    """L = eps1 E + eps2 psi1 + (eps2 b1 / 2) psi2 with psi1 = <u, u_t>."""
    return params.eps1 * energy(q, cfg) + params.eps2 * q.uut + 0.5 * params.eps2 * cfg.b1 * q.psi2


def sandwich_check(q: LevelData, cfg: RunConfig, params: LyapunovParams, rtol: float = 1e-12):
    """alpha1 E <= L <= alpha2 E at every level.  Returns (ok, min L/E, max L/E)."""
    E = np.asarray(energy(q, cfg), dtype=float)
    L = np.asarray(lyapunov(q, cfg, params), dtype=float)
    scale = np.abs(E) * rtol + 1e-300
    lo = params.alpha1 * E - scale
    hi = params.alpha2 * E + scale
    ok = bool(np.all((L >= lo) & (L <= hi)))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = L / E
    return ok, float(np.nanmin(r)), float(np.nanmax(r))


@dataclass(frozen=True)
class DecayRate:
    delta_prime: float
    d: float
    M: float
    k: float
    eps1_required: float


def decay_rate_constants(cfg: RunConfig, constants: DomainConstants, params: LyapunovParams, fraction: float = 0.9) -> DecayRate:
    """Constants of the Lyapunov decay argument.

    d = 1 - delta' C* a - C*^p (2p/(p-2))^{(p-2)/2} with delta' taking half of
    the available room, M = fraction * min{2, 2d}, k = eps2 M / alpha2.
    """
    C = constants.C_star
    p = cfg.p
    beta_nodata = C**p * (2.0 * p / (p - 2.0)) ** ((p - 2.0) / 2.0)
    room = 1.0 - beta_nodata
    if room <= 0.0:
        raise NotApplicableError("C*^p (2p/(p-2))^{(p-2)/2} >= 1: no admissible d")
    if cfg.a <= 0.0:
        raise NotApplicableError("decay argument needs a > 0")
    dp = 0.5 * room / (C * cfg.a)
    d = 1.0 - dp * C * cfg.a - beta_nodata
    M = fraction * min(2.0, 2.0 * d)
    req = params.eps2 * (1.0 + cfg.a / (4.0 * dp) + 0.5 * M) / cfg.a
    return DecayRate(dp, d, M, params.eps2 * M / params.alpha2, req)


def lyapunov_decay_check(q: LevelData, cfg: RunConfig, params: LyapunovParams, rate: DecayRate, tol: float = 1e-6):
    """Discrete L' <= -k L + tol * L(0) with centred differences.  Returns (ok, worst excess / L(0))."""
    t = np.asarray(q.t, dtype=float)
    L = np.asarray(lyapunov(q, cfg, params), dtype=float)
    Lp = np.gradient(L, t)
    excess = (Lp + rate.k * L) / abs(L[0])
    worst = float(np.max(excess))
    return worst <= tol, worst


@dataclass(frozen=True)
class DecayFit:
    K: float
    k: float
    r_squared: float


def fit_decay(t, E, window=None) -> DecayFit:
    """Least squares of ln E against t on ``window`` (default [0.1 t_end, t_end])."""
    t = np.asarray(t, dtype=float)
    E = np.asarray(E, dtype=float)
    if window is None:
        window = (0.1 * t[-1], t[-1]) if t.size else (0.0, 0.0)
    sel = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    if np.count_nonzero(sel) < 10:
        raise ValueError("decay-fit window holds fewer than 10 samples")
    if np.any(E[sel] <= 0.0):
        raise ValueError("nonpositive energy in decay-fit window")
    res = stats.linregress(t[sel], np.log(E[sel]))
    return DecayFit(K=float(math.exp(res.intercept)), k=float(-res.slope), r_squared=float(res.rvalue**2))
