"""Per-level functional series assembled from a solver run."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..fracdiff import DiffusiveGrid
from ..wavesolver import RawSeries, RunConfig, make_grid
from .functionals import (
    LevelData,
    dissipation_rate,
    energy,
    functional_F,
    functional_I,
    functional_J,
    levels_from_raw,
)
from .stability import LyapunovParams, domain_constants, lyapunov, lyapunov_params

__all__ = ["SERIES_COLUMNS", "FunctionalSeries", "build_series", "energy_dissipation_residual"]

SERIES_COLUMNS = (
    "t", "E", "I", "J", "Lyap", "F", "H", "u_l2sq", "grad_l2sq", "u_lp_p",
    "ut_l2sq", "g_circ", "phi_energy", "O_boundary", "dEdt_residual",
)


def energy_dissipation_residual(t, E, rate):
    """r_n = (E_{n+1} - E_n)/dt - (rate_n + rate_{n+1})/2 on each interval.

    One value per level: level n carries interval [t_n, t_{n+1}] and the
    last level repeats the final interval.  Empty for fewer than two levels.
    """
    t = np.asarray(t, dtype=float)
    E = np.asarray(E, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if t.size < 2:
        return np.zeros(t.size)
    r = np.diff(E) / np.diff(t) - 0.5 * (rate[1:] + rate[:-1])
    return np.append(r, r[-1])


@dataclass
class FunctionalSeries:
    """CSV columns plus the level data they came from."""

    columns: dict
    levels: LevelData
    params: Optional[LyapunovParams] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(np.asarray(self.columns["t"]).size)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    @property
    def E(self) -> np.ndarray:
        return self.columns["E"]


def build_series(raw: RawSeries, cfg: RunConfig, grid: Optional[DiffusiveGrid] = None,
                 params: Optional[LyapunovParams] = None) -> FunctionalSeries:
    if grid is None:
        grid = make_grid(cfg)
    q = levels_from_raw(raw)
    consts = domain_constants(cfg.domain, grid)
    if params is None:
        try:
            params = lyapunov_params(cfg, consts)
        except ValueError:
            params = None
    E = energy(q, cfg)
    cols = {
        "t": raw.t,
        "E": E,
        "I": functional_I(q, cfg),
        "J": functional_J(q, cfg),
        "Lyap": lyapunov(q, cfg, params) if params is not None else np.full(raw.t.shape, np.nan),
        "F": functional_F(q, cfg),
        "H": q.H,
        "u_l2sq": q.u2,
        "grad_l2sq": q.ux2,
        "u_lp_p": q.up,
        "ut_l2sq": q.ut2,
        "g_circ": q.gcirc,
        "phi_energy": q.phi_en,
        "O_boundary": q.O,
        "dEdt_residual": energy_dissipation_residual(raw.t, E, dissipation_rate(q, cfg)),
    }
    cols = {k: np.asarray(v, dtype=float) for k, v in cols.items()}
    meta = {"constants": consts, "dt": cfg.time_step}
    return FunctionalSeries(columns=cols, levels=q, params=params, meta=meta)
