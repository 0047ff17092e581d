"""Energy-type functionals evaluated on per-level quantities.

Functions take a :class:`LevelData` whose fields are scalars (one level) or
equal-length arrays (a whole run), so the same expression serves both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from ..fracdiff import DiffusiveGrid, DiffusiveState
from ..viscomem import MemoryAccumulators
from ..wavesolver import RawSeries, RunConfig, discrete_norms

__all__ = [
    "LevelData",
    "levels_from_raw",
    "snapshot",
    "kernel_mass",
    "kernel_now",
    "energy",
    "functional_I",
    "functional_J",
    "functional_F",
    "functional_H",
    "F_prime",
    "dissipation_rate",
    "lemma8_identity_residual",
    "lemma8_scalar_residual",
]


@dataclass
class LevelData:
    """Discrete norms and history integrals at one or more time levels.

    ut2, ux2, u2, up : ||u_t||^2, ||u_x||^2, ||u||^2, ||u||_p^p
    uut              : <u, u_t>
    gcirc            : (g o u_x)(t)
    phi_en, phi_diss : int |phi|^2 dxi and int (xi^2+eta)|phi|^2 dxi
    psi2, l8_lhs     : int (xi^2+eta) Phi^2 dxi and int (xi^2+eta) phi Phi dxi
    phimu, uL, O     : int phi mu dxi, u(L, t), fractional output O(t)
    int_ut2, int_u2  : int_0^t ||u_s||^2 ds, int_0^t ||u||^2 ds
    H, int_diss      : int_0^t psi2 ds, int_0^t phi_diss ds
    mem_S            : int_0^t e^{-kappa s} ds as the discrete history sees it
    """

    t: object = 0.0
    ut2: object = 0.0
    ux2: object = 0.0
    u2: object = 0.0
    up: object = 0.0
    uut: object = 0.0
    gcirc: object = 0.0
    phi_en: object = 0.0
    phi_diss: object = 0.0
    psi2: object = 0.0
    l8_lhs: object = 0.0
    phimu: object = 0.0
    uL: object = 0.0
    O: object = 0.0
    int_ut2: object = 0.0
    int_u2: object = 0.0
    H: object = 0.0
    int_diss: object = 0.0
    mem_S: object = 0.0

    def row(self, i: int) -> "LevelData":
        return LevelData(**{f.name: np.asarray(getattr(self, f.name))[i] for f in fields(self)})


def levels_from_raw(raw: RawSeries) -> LevelData:
    kw = {f.name: raw.col(f.name) for f in fields(LevelData) if f.name != "t"}
    return LevelData(t=raw.t, **kw)


def snapshot(
    u: np.ndarray,
    ut: np.ndarray,
    cfg: RunConfig,
    grid: DiffusiveGrid | None = None,
    diffusive: DiffusiveState | None = None,
    mem: MemoryAccumulators | None = None,
    t: float = 0.0,
) -> LevelData:
    """LevelData for explicit fields; history integrals default to their t = 0 values."""
    dom = cfg.domain
    u2, ux2, up = discrete_norms(u, dom, cfg.p)
    ut2, _, _ = discrete_norms(ut, dom, 2.0)
    dx = dom.dx
    w = np.full(u.shape, dx)
    w[0] = w[-1] = 0.5 * dx
    q = LevelData(t=t, ut2=ut2, ux2=ux2, u2=u2, up=up, uut=float(np.sum(w * u * ut)), uL=float(u[-1]))
    if mem is not None and cfg.g0 != 0.0:
        gx = np.diff(u) / dx
        q.gcirc = cfg.g0 * (ux2 * mem.S - 2.0 * float(gx @ mem.P) * dx + mem.Q)
        q.mem_S = mem.S
    if diffusive is not None and grid is not None:
        c = grid.measure
        phi, Phi = diffusive.phi, diffusive.phi_time_integral
        q.phi_en = float(c @ phi**2)
        q.phi_diss = float((c * grid.rates) @ phi**2)
        q.psi2 = float((c * grid.rates) @ Phi**2)
        q.l8_lhs = float((c * grid.rates) @ (phi * Phi))
        q.phimu = float((c * grid.mu) @ phi)
        q.O = float(grid.out_weights @ phi)
    return q


def kernel_mass(q: LevelData, cfg: RunConfig):
    """Discrete int_0^t g(s) ds."""
    return cfg.g0 * np.asarray(q.mem_S)


def kernel_now(q: LevelData, cfg: RunConfig):
    return cfg.g0 * np.exp(-cfg.kappa * np.asarray(q.t, dtype=float))


def _elastic(q: LevelData, cfg: RunConfig):
    """(1 - int g) ||u_x||^2 + (g o u_x)."""
    return (1.0 - kernel_mass(q, cfg)) * q.ux2 + q.gcirc


def energy(q: LevelData, cfg: RunConfig):
    """Total energy; the potential -||u||_p^p / p is dropped when the source is switched off."""
    pot = q.up / cfg.p if cfg.source else 0.0
    return 0.5 * q.ut2 + 0.5 * _elastic(q, cfg) - pot + 0.5 * cfg.b1 * q.phi_en


def functional_I(q: LevelData, cfg: RunConfig):
    return _elastic(q, cfg) - q.up


def functional_J(q: LevelData, cfg: RunConfig):
    return 0.5 * _elastic(q, cfg) - q.up / cfg.p


def functional_H(q: LevelData):
    return q.H


def functional_F(q: LevelData, cfg: RunConfig):
    return q.u2 + cfg.a * q.int_u2 - 0.5 * _elastic(q, cfg) + cfg.b1 * q.H


def F_prime(q: LevelData, cfg: RunConfig, int_l8=None):
    """The expression given for F'(t):

    2<u,u_t> + a||u||^2 + g(t)/2 ||u_x||^2 - (g' o u_x)/2 + 2 b1 int_0^t l8 ds.

    It omits -<u_xt, u_x - int g u_x(s) ds>, so it differs from the time
    derivative of :func:`functional_F` except when that term vanishes (for
    instance at t = 0 with u1 = 0).  ``int_l8`` supplies int_0^t l8_lhs ds
    (zero at t = 0).
    """
    hist = 0.0 if int_l8 is None else int_l8
    return (
        2.0 * q.uut
        + cfg.a * q.u2
        + 0.5 * kernel_now(q, cfg) * q.ux2
        + 0.5 * cfg.kappa * q.gcirc
        + 2.0 * cfg.b1 * hist
    )


def dissipation_rate(q: LevelData, cfg: RunConfig):
    """-a||u_t||^2 - g(t)/2 ||u_x||^2 + (g' o u_x)/2 - b1 int (xi^2+eta)|phi|^2."""
    return (
        -cfg.a * q.ut2
        - 0.5 * kernel_now(q, cfg) * q.ux2
        - 0.5 * cfg.kappa * q.gcirc
        - cfg.b1 * q.phi_diss
    )


def lemma8_identity_residual(q: LevelData, u_L0: float = 0.0):
    """|int (xi^2+eta) phi Phi - (u(L,t) - u(L,0)) int phi mu + int |phi|^2|.

    With ``u_L0 = 0`` this is the identity as usually stated; the exact
    relation carries the initial boundary trace.
    """
    return np.abs(q.l8_lhs - (q.uL - u_L0) * q.phimu + q.phi_en)


def lemma8_scalar_residual(xi: float, eta: float, mu_val: float, u_now: float, phi: float, Phi: float, u0: float = 0.0):
    """Pointwise (xi^2+eta) Phi - mu (u - u0) + phi."""
    return (xi * xi + eta) * Phi - mu_val * (u_now - u0) + phi
