"""Leapfrog solver for the viscoelastic wave equation on [0, L].

    u_tt - u_xx + int_0^t g(t-s) u_xx(s) ds + a u_t = |u|^{p-2} u      in (0, L)
    u(0, t) = 0,    u_x(L, t) = -b1 int phi(xi, t) mu(xi) dxi

with phi the diffusive variables driven by u_t(L, t).  Norms are
trapezoid (mass-lumped) sums and gradients live on cells, so the discrete
Laplacian with the ghost-node flux condition is a summation-by-parts operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from . import kernels
from ._layout import (
    N_COEF, N_PRM, N_REC, N_SCAL, RECORD_FIELDS,
    C_DECAY, C_GAIN, C_SGAIN, C_IDECAY, C_IGAIN, C_ISGAIN, C_OUTW, C_MEAS, C_RATES, C_MU,
    P_DX, P_DT, P_A, P_B, P_P, P_G0, P_EKDT, P_FLUX_EXTRA, P_SOURCE, P_DIRICHLET,
    S_Q, S_S, S_INT_UT2, S_INT_U2, S_H, S_INT_DISS, S_VB_PREV,
    Q_FINITE, Q_UX2_NEXT,
)
from .fracdiff import (
    DiffusiveGrid,
    DiffusiveState,
    FracParams,
    build_diffusive_grid,
    new_state,
    step_coefficients,
)
from .viscomem import ExpKernel, MemoryAccumulators, new_accumulators

__all__ = [
    "ConfigError",
    "UnstableError",
    "Domain1D",
    "RunConfig",
    "SimState",
    "Termination",
    "RawSeries",
    "laplacian_1d",
    "source_term",
    "discrete_norms",
    "detect_blowup",
    "make_profile",
    "initial_fields",
    "make_grid",
    "init_state",
    "step",
    "simulate",
    "run",
    "estimate_blowup_time",
]


class ConfigError(ValueError):
    """Invalid run configuration."""


class UnstableError(FloatingPointError):
    """A non-finite value appeared during stepping."""


@dataclass(frozen=True)
class Domain1D:
    """Uniform grid on [0, L]; node 0 carries u = 0, node nx-1 the fractional flux."""

    L: float = 1.0
    nx: int = 201

    def __post_init__(self):
        if not self.L > 0.0:
            raise ConfigError(f"L must be positive, got {self.L!r}")
        if int(self.nx) != self.nx or self.nx < 3:
            raise ConfigError(f"nx must be an integer >= 3, got {self.nx!r}")

    @property
    def dx(self) -> float:
        return self.L / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.nx)


ProfileSpec = Union[str, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class RunConfig:
    L: float = 1.0
    nx: int = 201
    dt: Optional[float] = None  # None -> cfl_safety * dx
    cfl_safety: float = 0.5
    t_end: float = 10.0
    a: float = 1.0
    b: float = 1.0
    p: float = 3.0
    alpha: float = 0.5
    eta: float = 1.0
    g0: float = 0.5
    kappa: float = 1.0
    K_nodes: int = 200
    xi_min: float = 1e-4
    xi_max: float = 1e4
    blowup_threshold: float = 1e6
    u0_profile: ProfileSpec = "sine:0.1"
    u1_profile: ProfileSpec = "zero"
    seed: int = 0
    output_dir: str = "out"
    source: bool = True
    right_bc: str = "fractional"  # or "dirichlet" (conservation harness)
    # manufactured-solution hooks, not settable from config files
    forcing: Optional[Callable[[np.ndarray, float], np.ndarray]] = field(default=None, compare=False)
    boundary_data: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        Domain1D(self.L, self.nx)
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ConfigError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety!r}")
        if self.dt is not None:
            if not self.dt > 0.0:
                raise ConfigError(f"dt must be positive, got {self.dt!r}")
            limit = self.cfl_safety * self.L / (self.nx - 1)
            if self.dt > limit * (1.0 + 1e-12):
                raise ConfigError(f"dt = {self.dt:g} violates the CFL limit cfl_safety*dx = {limit:g}")
        if not self.t_end >= 0.0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end!r}")
        if self.a < 0.0 or self.b < 0.0:
            raise ConfigError("damping coefficients a, b must be >= 0")
        if not self.p > 2.0:
            raise ConfigError(f"source exponent must satisfy p>2, got p = {self.p!r}")
        if not self.blowup_threshold > 0.0:
            raise ConfigError("blowup_threshold must be positive")
        if self.right_bc not in ("fractional", "dirichlet"):
            raise ConfigError(f"right_bc must be 'fractional' or 'dirichlet', got {self.right_bc!r}")
        try:
            FracParams(self.alpha, self.eta)
            ExpKernel(self.g0, self.kappa)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if int(self.K_nodes) != self.K_nodes or self.K_nodes < 2:
            raise ConfigError("K_nodes must be an integer >= 2")
        if not 0.0 < self.xi_min < self.xi_max:
            raise ConfigError("need 0 < xi_min < xi_max")

    @property
    def domain(self) -> Domain1D:
        return Domain1D(self.L, self.nx)

    @property
    def time_step(self) -> float:
        return self.dt if self.dt is not None else self.cfl_safety * self.domain.dx

    @property
    def frac(self) -> FracParams:
        return FracParams(self.alpha, self.eta)

    @property
    def kernel(self) -> ExpKernel:
        return ExpKernel(self.g0, self.kappa)

    @property
    def b1(self) -> float:
        return self.b * math.sin(self.alpha * math.pi) / math.pi

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


@dataclass
class Termination:
    reason: str  # Completed | BlowUp | Unstable
    t_final: float
    detail: str = ""
    T_numeric: Optional[float] = None


# ----------------------------------------------------------------------------
# discrete operators


def laplacian_1d(u: np.ndarray, domain: Domain1D, boundary_flux: float) -> np.ndarray:
    """Second difference with u[0] = 0 and a ghost node imposing u_x(L) = boundary_flux."""
    u = np.asarray(u, dtype=float)
    dx = domain.dx
    out = np.zeros_like(u)
    out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / dx**2
    ghost = u[-2] + 2.0 * dx * boundary_flux
    out[-1] = (u[-2] - 2.0 * u[-1] + ghost) / dx**2
    return out


def source_term(u, p: float):
    u = np.asarray(u, dtype=float)
    return np.abs(u) ** (p - 2.0) * u


def _trap(f: np.ndarray, dx: float) -> float:
    return dx * (float(np.sum(f)) - 0.5 * (f[0] + f[-1]))


def discrete_norms(u, domain: Domain1D, p: float):
    """Return (||u||^2, ||u_x||^2, ||u||_p^p); u_x is taken cell by cell."""
    u = np.asarray(u, dtype=float)
    dx = domain.dx
    du = np.diff(u) / dx
    return _trap(u * u, dx), float(du @ du) * dx, _trap(np.abs(u) ** p, dx)


def detect_blowup(state: "SimState", threshold: float) -> bool:
    """True iff ||u_x|| >= threshold (closed condition)."""
    if not threshold > 0.0:
        raise ValueError("threshold must be positive")
    _, gx2, _ = discrete_norms(state.u, state.domain, 2.0)
    return math.sqrt(gx2) >= threshold


# ----------------------------------------------------------------------------
# initial data


def make_profile(spec: ProfileSpec, domain: Domain1D) -> np.ndarray:
    """Materialize an initial field.

    Accepted strings ('name:arg1:arg2...'):
      zero
      sine[:A[:k]]                 A sin(k pi x / (2L)), default A=1, k=1
      bump[:A[:c[:w]]]             A cos^2 bump of half-width w centred at c
      poly:c0,c1,...  (alias custom-polynomial)   sum_j c_j x^j, needs c0 = 0
      plateau[:A[:s]]              A tanh(s x / L), a ramp to a flat top
    A callable receives the node coordinates.
    """
    x = domain.x
    L = domain.L
    if callable(spec):
        out = np.asarray(spec(x), dtype=float)
        if out.shape != x.shape:
            raise ConfigError("profile callable returned the wrong shape")
        return out
    parts = str(spec).strip().split(":")
    name = parts[0].strip().lower()
    try:
        args = [float(v) for v in parts[1:]] if name not in ("poly", "custom-polynomial") else []
    except ValueError as exc:
        raise ConfigError(f"bad profile arguments in {spec!r}") from exc
    if name == "zero":
        return np.zeros_like(x)
    if name == "sine":
        amp = args[0] if args else 1.0
        k = args[1] if len(args) > 1 else 1.0
        return amp * np.sin(k * np.pi * x / (2.0 * L))
    if name == "bump":
        amp = args[0] if args else 1.0
        c = args[1] if len(args) > 1 else 0.5 * L
        w = args[2] if len(args) > 2 else 0.25 * L
        if w <= 0.0 or c - w < 0.0:
            raise ConfigError("bump must have w > 0 and support inside [0, L]")
        s = np.clip((x - c) / w, -1.0, 1.0)
        return amp * np.cos(0.5 * np.pi * s) ** 2
    if name == "plateau":
        amp = args[0] if args else 1.0
        steep = args[1] if len(args) > 1 else 10.0
        return amp * np.tanh(steep * x / L)
    if name in ("poly", "custom-polynomial"):
        if len(parts) < 2:
            raise ConfigError("polynomial profile needs coefficients")
        try:
            coeffs = [float(c) for c in parts[1].split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad polynomial coefficients in {spec!r}") from exc
        if coeffs[0] != 0.0:
            raise ConfigError("polynomial profile must vanish at x = 0 (c0 = 0)")
        return np.polynomial.polynomial.polyval(x, coeffs)
    raise ConfigError(f"unknown profile {spec!r}")


def initial_fields(cfg: RunConfig):
    dom = cfg.domain
    u0 = make_profile(cfg.u0_profile, dom)
    u1 = make_profile(cfg.u1_profile, dom)
    u0[0] = 0.0
    u1[0] = 0.0
    if cfg.right_bc == "dirichlet":
        u0[-1] = 0.0
        u1[-1] = 0.0
    return u0, u1


def make_grid(cfg: RunConfig) -> DiffusiveGrid:
    return build_diffusive_grid(cfg.frac, K=int(cfg.K_nodes), xi_min=cfg.xi_min, xi_max=cfg.xi_max)


# ----------------------------------------------------------------------------
# state and stepping


@dataclass
class SimState:
    """Solver state at level n: u = u^n, u_prev = u^{n-1}."""

    u: np.ndarray
    u_prev: np.ndarray
    t: float
    diffusive: DiffusiveState
    mem: MemoryAccumulators
    domain: Domain1D
    step_count: int = 0
    # packed scalars (memory Q, S; running integrals; last boundary velocity)
    scal: np.ndarray = field(default_factory=lambda: np.zeros(N_SCAL))
    work: dict = field(default_factory=dict, repr=False)

    @property
    def int_ut2(self) -> float:
        return float(self.scal[S_INT_UT2])

    @property
    def int_u2(self) -> float:
        return float(self.scal[S_INT_U2])

    @property
    def H(self) -> float:
        return float(self.scal[S_H])

    @property
    def int_dissipation(self) -> float:
        return float(self.scal[S_INT_DISS])

    def sync(self) -> None:
        """Copy packed scalars into the accumulator dataclass."""
        self.mem.Q = float(self.scal[S_Q])
        self.mem.S = float(self.scal[S_S])
        self.mem.t = self.t
        self.diffusive.t = self.t


def _pack_coefficients(grid: DiffusiveGrid, dt: float) -> np.ndarray:
    sc = step_coefficients(grid, dt)
    coef = np.empty((N_COEF, grid.K))
    coef[C_DECAY] = sc.decay
    coef[C_GAIN] = sc.gain
    coef[C_SGAIN] = sc.slope_gain
    coef[C_IDECAY] = sc.int_decay
    coef[C_IGAIN] = sc.int_gain
    coef[C_ISGAIN] = sc.int_slope_gain
    coef[C_OUTW] = grid.out_weights
    coef[C_MEAS] = grid.measure
    coef[C_RATES] = grid.rates
    coef[C_MU] = grid.mu
    return coef


def _params(cfg: RunConfig, flux_extra: float = 0.0) -> np.ndarray:
    dt = cfg.time_step
    prm = np.zeros(N_PRM)
    prm[P_DX] = cfg.domain.dx
    prm[P_DT] = dt
    prm[P_A] = cfg.a
    prm[P_B] = cfg.b
    prm[P_P] = cfg.p
    prm[P_G0] = cfg.g0
    prm[P_EKDT] = math.exp(-cfg.kappa * dt)
    prm[P_FLUX_EXTRA] = flux_extra
    prm[P_SOURCE] = 1.0 if cfg.source else 0.0
    prm[P_DIRICHLET] = 1.0 if cfg.right_bc == "dirichlet" else 0.0
    return prm


def _boundary_flux(cfg: RunConfig, grid: DiffusiveGrid, phi: np.ndarray, t: float) -> float:
    if cfg.right_bc == "dirichlet":
        return 0.0
    flux = -cfg.b * float(grid.out_weights @ phi)
    if cfg.boundary_data is not None:
        flux += cfg.boundary_data(t)
    return flux


def _acceleration(u, cfg, grid, phi, R, t):
    """Spatial right-hand side u_xx - M + f(u) (+ forcing) at level t."""
    dom = cfg.domain
    acc = laplacian_1d(u, dom, _boundary_flux(cfg, grid, phi, t))
    if cfg.g0 != 0.0:
        acc -= cfg.g0 * laplacian_1d(R, dom, 0.0)
    if cfg.source:
        acc += source_term(u, cfg.p)
    if cfg.forcing is not None:
        acc += cfg.forcing(dom.x, t)
    return acc


def init_state(cfg: RunConfig, grid: Optional[DiffusiveGrid] = None, u0=None, u1=None) -> SimState:
    """Level-0 state; u_prev is set so the centred velocity at t = 0 equals u1."""
    if grid is None:
        grid = make_grid(cfg)
    if u0 is None or u1 is None:
        f0, f1 = initial_fields(cfg)
        u0 = f0 if u0 is None else np.asarray(u0, dtype=float).copy()
        u1 = f1 if u1 is None else np.asarray(u1, dtype=float).copy()
    dom = cfg.domain
    dt = cfg.time_step
    if u0.shape != (dom.nx,) or u1.shape != (dom.nx,):
        raise ConfigError("initial fields do not match the grid")
    if u0[0] != 0.0:
        raise ConfigError("u0 must vanish at x = 0")
    dstate = new_state(grid)
    mem = new_accumulators(dom.nx)
    acc0 = _acceleration(u0, cfg, grid, dstate.phi, mem.R, 0.0)
    u_prev = u0 - dt * u1 + 0.5 * dt * dt * (acc0 - cfg.a * u1)
    u_prev[0] = 0.0
    if cfg.right_bc == "dirichlet":
        u_prev[-1] = 0.0
    st = SimState(u=u0.copy(), u_prev=u_prev, t=0.0, diffusive=dstate, mem=mem, domain=dom)
    st.scal[S_VB_PREV] = (u0[-1] - u_prev[-1]) / dt
    st.work = {
        "coef": _pack_coefficients(grid, dt),
        "prm": _params(cfg),
        "u_next": np.empty(dom.nx),
        "row": np.zeros(N_REC),
        "grid": grid,
    }
    return st


def step(state: SimState, cfg: RunConfig, grid: DiffusiveGrid, advance=None, row=None) -> SimState:
    """Advance one level; the record of level n is left in ``state.work['row']`` (or ``row``)."""
    w = state.work
    if not w or w.get("grid") is not grid:
        w.update(
            coef=_pack_coefficients(grid, cfg.time_step),
            prm=_params(cfg),
            u_next=np.empty(state.domain.nx),
            row=np.zeros(N_REC),
            grid=grid,
        )
    if advance is None:
        advance = kernels.advance
    if row is None:
        row = w["row"]
    prm = w["prm"]
    if cfg.boundary_data is not None:
        prm[P_FLUX_EXTRA] = cfg.boundary_data(state.t)
    forcing = None
    if cfg.forcing is not None:
        forcing = np.ascontiguousarray(cfg.forcing(state.domain.x, state.t), dtype=float)
    u_next = w["u_next"]
    advance(
        state.u_prev, state.u, u_next,
        state.mem.R, state.mem.P, state.diffusive.phi, state.diffusive.phi_time_integral,
        w["coef"], forcing, state.scal, prm, row,
    )
    if row[Q_FINITE] == 0.0:
        raise UnstableError(f"non-finite value after t = {state.t:g}")
    # rotate buffers: the old u_prev becomes next step's scratch
    w["u_next"] = state.u_prev
    state.u_prev = state.u
    state.u = u_next
    state.step_count += 1
    state.t = state.step_count * cfg.time_step
    state.sync()
    return state


@dataclass
class RawSeries:
    """Per-level records straight from the kernel (one row per level)."""

    t: np.ndarray
    rec: np.ndarray  # shape (n_levels, N_REC)

    def __len__(self) -> int:
        return self.t.shape[0]

    def col(self, name: str) -> np.ndarray:
        return self.rec[:, RECORD_FIELDS.index(name)]


def estimate_blowup_time(t: np.ndarray, grad_norm: np.ndarray) -> Optional[float]:
    """Extrapolate 1/||u_x|| to zero from its last three samples.

    Fits y ~ C (T - t)^beta through the log-slopes of y = 1/||u_x|| on the two
    trailing intervals.  Returns None when the samples do not support a
    finite extrapolation.
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(grad_norm, dtype=float)
    if t.size < 3 or np.any(g[-3:] <= 0.0):
        return None
    y = np.log(1.0 / g[-3:])
    tt = t[-3:]
    s1 = (y[1] - y[0]) / (tt[1] - tt[0])
    s2 = (y[2] - y[1]) / (tt[2] - tt[1])
    if not (s1 < 0.0 and s2 < 0.0):
        return None
    q1, q2 = -1.0 / s1, -1.0 / s2
    m1, m2 = 0.5 * (tt[0] + tt[1]), 0.5 * (tt[1] + tt[2])
    if not q1 > q2:
        return None
    beta = (m2 - m1) / (q1 - q2)
    T = m2 + beta * q2
    if not math.isfinite(T) or T < tt[-1]:
        return None
    return float(T)


def simulate(cfg: RunConfig, backend: Optional[str] = None, grid: Optional[DiffusiveGrid] = None):
    """Run to t_end, blow-up or instability.  Returns (RawSeries, Termination, final SimState)."""
    if grid is None:
        grid = make_grid(cfg)
    advance = kernels.get_advance(backend)
    dt = cfg.time_step
    n_steps = int(math.floor(cfg.t_end / dt + 1e-9))
    # a level's record needs the next level, so reaching t_end takes one extra step
    n_rows = n_steps + 1 if n_steps > 0 else 0
    state = init_state(cfg, grid)
    rec = np.zeros((n_rows, N_REC))
    thr2 = cfg.blowup_threshold**2 if cfg.blowup_threshold < 1e150 else math.inf
    term = Termination("Completed", 0.0)
    n_done = 0
    for n in range(n_rows):
        try:
            step(state, cfg, grid, advance=advance, row=rec[n])
        except UnstableError as exc:
            term = Termination("Unstable", state.t, str(exc))
            break
        n_done = n + 1
        if rec[n, Q_UX2_NEXT] >= thr2:
            tt = dt * np.arange(n + 2)
            gn = np.sqrt(np.append(rec[: n + 1, 1], rec[n, Q_UX2_NEXT]))
            T_est = estimate_blowup_time(tt, gn)
            t_cross = state.t
            term = Termination(
                "BlowUp",
                t_cross,
                f"||u_x|| crossed {cfg.blowup_threshold:g} at t = {t_cross:.6g}",
                T_numeric=T_est if T_est is not None else t_cross,
            )
            break
    else:
        term = Termination("Completed", dt * max(n_done - 1, 0))
    raw = RawSeries(dt * np.arange(n_done), rec[:n_done].copy())
    return raw, term, state


def run(cfg: RunConfig, backend: Optional[str] = None):
    """Run and evaluate all functionals.  Returns (FunctionalSeries, Termination)."""
    from .diagnostics import build_series

    grid = make_grid(cfg)
    raw, term, _ = simulate(cfg, backend=backend, grid=grid)
    return build_series(raw, cfg, grid), term
