"""Manufactured smooth solution and refinement studies for the solver.

The exact field is u(x, t) = A sin(k x) T(t) with a trigonometric T.  The
interior forcing and the boundary data are chosen so that u solves

    u_tt + a u_t = u_xx - (g * u_xx) + |u|^{p-2} u + F(x, t)
    u(0, t) = 0,   u_x(L, t) - (g * u_x)(L, t) = -b O(t) + h(t)

exactly, where O is the tempered Caputo derivative of u(L, .).  The memory
convolution with g(t) = g0 e^{-kappa t} has a closed form for trig T; O is
computed with scipy's algebraic-weight quadrature.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .wavesolver import RunConfig, simulate

__all__ = [
    "ManufacturedSolution",
    "manufactured_config",
    "mms_base",
    "final_field",
    "OrderStudy",
    "spatial_study",
    "temporal_study",
    "observed_orders",
]


@dataclass(frozen=True)
class ManufacturedSolution:
    """u = A sin(k x) [cos(w1 t) + c sin(w2 t)]."""

    A: float = 0.5
    k: float = 1.0
    w1: float = 2.0
    w2: float = 3.0
    c: float = 0.5

    # time factor and its derivatives
    def T(self, t):
        return np.cos(self.w1 * t) + self.c * np.sin(self.w2 * t)

    def Tp(self, t):
        return -self.w1 * np.sin(self.w1 * t) + self.c * self.w2 * np.cos(self.w2 * t)

    def Tpp(self, t):
        return -self.w1**2 * np.cos(self.w1 * t) - self.c * self.w2**2 * np.sin(self.w2 * t)

    def X(self, x):
        return self.A * np.sin(self.k * x)

    def Xp(self, x):
        return self.A * self.k * np.cos(self.k * x)

    def Xpp(self, x):
        return -self.k**2 * self.X(x)

    def u(self, x, t):
        return self.X(x) * self.T(t)

    def ut(self, x, t):
        return self.X(x) * self.Tp(t)

    def memory_T(self, t: float, kappa: float) -> float:
        """int_0^t e^{-kappa (t-s)} T(s) ds."""
        e = math.exp(-kappa * t)
        d1 = kappa**2 + self.w1**2
        d2 = kappa**2 + self.w2**2
        cos_part = (kappa * math.cos(self.w1 * t) + self.w1 * math.sin(self.w1 * t) - kappa * e) / d1
        sin_part = (kappa * math.sin(self.w2 * t) - self.w2 * math.cos(self.w2 * t) + self.w2 * e) / d2
        return cos_part + self.c * sin_part

    def caputo_T(self, t: float, alpha: float, eta: float) -> float:
        """(1/Gamma(1-alpha)) int_0^t tau^{-alpha} e^{-eta tau} T'(t - tau) dtau."""
        if t <= 0.0:
            return 0.0
        val, _ = integrate.quad(
            lambda tau: math.exp(-eta * tau) * float(self.Tp(t - tau)),
            0.0, t, weight="alg", wvar=(-alpha, 0.0), epsabs=1e-14, epsrel=1e-12, limit=200,
        )
        return val / special.gamma(1.0 - alpha)


def manufactured_config(base: RunConfig, sol: ManufacturedSolution | None = None) -> RunConfig:
    """Attach forcing and boundary data realizing ``sol`` to ``base``."""
    sol = sol or ManufacturedSolution()
    a, b, g0, kappa, p = base.a, base.b, base.g0, base.kappa, base.p
    alpha, eta, L = base.alpha, base.eta, base.L
    use_source = base.source

    @lru_cache(maxsize=None)
    def mem(t: float) -> float:
        return sol.memory_T(t, kappa) if g0 != 0.0 else 0.0

    def forcing(x, t):
        T, Tp, Tpp = sol.T(t), sol.Tp(t), sol.Tpp(t)
        X, Xpp = sol.X(x), sol.Xpp(x)
        f = X * Tpp + a * X * Tp - Xpp * T + g0 * Xpp * mem(t)
        if use_source:
            ue = X * T
            f = f - np.abs(ue) ** (p - 2.0) * ue
        return f

    xpl = float(sol.Xp(L))
    xl = float(sol.X(L))

    def boundary(t):
        h = xpl * (float(sol.T(t)) - g0 * mem(t))
        if b != 0.0:
            h += b * xl * sol.caputo_T(t, alpha, eta)
        return h

    return base.with_(
        u0_profile=lambda x: sol.u(x, 0.0),
        u1_profile=lambda x: sol.ut(x, 0.0),
        forcing=forcing,
        boundary_data=boundary,
        right_bc="fractional",
        blowup_threshold=1e12,
    )


def mms_base(**overrides) -> RunConfig:
    """Default setting for refinement studies."""
    # a wide xi window keeps the diffusive truncation below the discretization error
    kw = dict(L=1.0, t_end=1.0, K_nodes=300, xi_min=1e-6, xi_max=1e6)
    kw.update(overrides)
    return RunConfig(**kw)


@dataclass
class OrderStudy:
    h: list
    errors: list
    orders: list

    @property
    def min_order(self) -> float:
        return min(self.orders) if self.orders else float("nan")


def observed_orders(h, errors):
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    return [float(v) for v in np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])]


def final_field(base: RunConfig, sol: ManufacturedSolution, backend=None):
    """(u at t_end, t_end, nodes) of the manufactured run built on ``base``.

    Module-level and free of closures in its arguments, so it can run in a
    worker process.
    """
    cfg = manufactured_config(base, sol)
    raw, term, state = simulate(cfg, backend=backend)
    if term.reason != "Completed":
        raise RuntimeError(f"manufactured run ended with {term.reason}: {term.detail}")
    # the state has advanced one level past the last record
    return state.u_prev.copy(), float(raw.t[-1]), cfg.domain.x


def _map(jobs: int, bases, sol, backend):
    if jobs <= 1:
        return [final_field(b, sol, backend) for b in bases]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futs = [pool.submit(final_field, b, sol, backend) for b in bases]
        return [f.result() for f in futs]


def spatial_study(base: RunConfig | None = None, levels: int = 4, nx0: int = 21, dt: float | None = None,
                  sol=None, backend=None, jobs: int = 1) -> OrderStudy:
    """Max-norm error against the exact field on ``levels`` halvings of dx at fixed small dt."""
    base = base or mms_base()
    nxs = [(nx0 - 1) * 2**i + 1 for i in range(levels)]
    if dt is None:
        dt = 0.125 * base.L / (nxs[-1] - 1)
    sol = sol or ManufacturedSolution()
    runs = _map(jobs, [base.with_(nx=nx, dt=dt) for nx in nxs], sol, backend)
    hs = [base.L / (nx - 1) for nx in nxs]
    errs = [float(np.max(np.abs(u - sol.u(x, t)))) for u, t, x in runs]
    return OrderStudy(hs, errs, observed_orders(hs, errs))


def temporal_study(base: RunConfig | None = None, levels: int = 4, nx: int = 101, ref_factor: int = 8,
                   sol=None, backend=None, jobs: int = 1) -> OrderStudy:
    """Max-norm error on a fixed mesh against a run with dt / ref_factor below the finest level."""
    base = (base or mms_base()).with_(nx=nx, dt=None)
    dt0 = base.time_step
    sol = sol or ManufacturedSolution()
    dts = [dt0 / 2**i for i in range(levels)]
    bases = [base.with_(dt=d) for d in dts] + [base.with_(dt=dts[-1] / ref_factor)]
    runs = _map(jobs, bases, sol, backend)
    u_ref, t_ref, _ = runs[-1]
    errs = []
    for u, t, _ in runs[:-1]:
        if abs(t - t_ref) > 1e-9:
            raise RuntimeError("refinement levels do not share a final time")
        errs.append(float(np.max(np.abs(u - u_ref))))
    return OrderStudy(dts, errs, observed_orders(dts, errs))
