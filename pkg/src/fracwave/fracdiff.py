"""Tempered Caputo boundary operator: direct quadrature and diffusive realization.

The diffusive realization replaces the weakly singular time convolution by a
family of scalar relaxation ODEs indexed by a frequency variable ``xi``::

    phi_t + (xi**2 + eta) * phi = mu(xi) * U(t),     phi(xi, 0) = 0
    O(t)  = varrho * integral(phi * mu, xi over R)

which reproduces ``O = I^{1-alpha, eta} U``.  Discretizing ``xi`` on a
geometric grid gives a finite ODE system advanced exactly per time step.

Weight conventions on :class:`DiffusiveGrid` (the grid stores only xi > 0;
the even half line xi < 0 is folded into a factor 2):

``measure``   c_k, quadrature weights for ``integral(f, xi over R)``
``weights``   w_k = varrho * mu_k**2 * c_k, so ``sum(w / (eta + lam + xi**2))``
              approximates ``(eta + lam)**(alpha - 1)``
``out_weights``  w_k / mu_k = varrho * mu_k * c_k, so ``sum(out_weights * phi)``
              is the output O(t).  Never multiply by mu again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "FracParams",
    "DiffusiveGrid",
    "DiffusiveState",
    "CalibrationError",
    "mu",
    "varrho",
    "closed_form_A",
    "build_diffusive_grid",
    "quad_A",
    "new_state",
    "StepCoefficients",
    "step_coefficients",
    "step_phi",
    "output_O",
    "caputo_direct",
    "frac_integral_I",
    "CALIBRATION_LAMBDAS",
]

CALIBRATION_LAMBDAS = (0.5, 1.0, 2.0)


class CalibrationError(ValueError):
    """A diffusive grid failed the closed-form calibration check."""


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


@dataclass(frozen=True)
class FracParams:
    alpha: float
    eta: float = 0.0

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.eta < 0.0:
            raise ValueError(f"eta must be >= 0, got {self.eta!r}")


def mu(xi, alpha: float):
    """Diffusive weight |xi|**((2 alpha - 1)/2); even in xi."""
    _check_alpha(alpha)
    return np.abs(xi) ** ((2.0 * alpha - 1.0) / 2.0)


def varrho(alpha: float) -> float:
    """Normalization sin(alpha pi)/pi of the diffusive output."""
    _check_alpha(alpha)
    return math.sin(alpha * math.pi) / math.pi


def closed_form_A(lam: float, params: FracParams) -> float:
    """Closed form of integral(mu**2 / (eta + lam + xi**2), xi over R), real lam."""
    s = params.eta + lam
    if s <= 0.0:
        raise ValueError(f"need eta + lambda > 0, got {s!r}")
    return math.pi / math.sin(params.alpha * math.pi) * s ** (params.alpha - 1.0)


@dataclass(frozen=True, eq=False)
class DiffusiveGrid:
    """Quadrature of the xi half line; see module docstring for the weight roles."""

    nodes: np.ndarray
    weights: np.ndarray
    params: FracParams
    varrho: float
    measure: np.ndarray
    tolerance: float
    calibration_error: float

    @property
    def K(self) -> int:
        return self.nodes.size

    @property
    def mu(self) -> np.ndarray:
        return mu(self.nodes, self.params.alpha)

    @property
    def out_weights(self) -> np.ndarray:
        return self.weights / self.mu

    @property
    def rates(self) -> np.ndarray:
        """Relaxation rates xi_k**2 + eta."""
        return self.nodes**2 + self.params.eta


def _grid_arrays(alpha: float, K: int, xi_min: float, xi_max: float):
    ratio = (xi_max / xi_min) ** (1.0 / (K - 1))
    h = math.log(ratio)
    nodes = xi_min * ratio ** np.arange(K)
    # cell k spans [xi_k r^-1/2, xi_k r^1/2]; its width in ln(xi) is h exactly
    measure = 2.0 * nodes * h
    lo = nodes[0] / math.sqrt(ratio)
    hi = nodes[-1] * math.sqrt(ratio)
    m = 2.0 * alpha - 1.0
    # analytic tails of mu^2 beyond the window, folded into the end nodes:
    # (0, lo) with 1/(c + xi^2) frozen at xi_0, (hi, inf) with xi^-2 decay
    tail_lo = 2.0 * lo ** (2.0 * alpha) / (2.0 * alpha)
    tail_hi = 2.0 * nodes[-1] ** 2 * hi ** (2.0 * alpha - 2.0) / (2.0 - 2.0 * alpha)
    measure[0] += tail_lo / nodes[0] ** m
    measure[-1] += tail_hi / nodes[-1] ** m
    return nodes, measure


def build_diffusive_grid(
    params: FracParams,
    K: int = 200,
    xi_min: float = 1e-4,
    xi_max: float = 1e4,
    tolerance: float = 1e-3,
) -> DiffusiveGrid:
    """Geometric xi grid calibrated against the closed form at lambda in {0.5, 1, 2}.

    Raises CalibrationError when the worst relative error exceeds ``tolerance``.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if not 0.0 < xi_min < xi_max:
        raise ValueError("need 0 < xi_min < xi_max")
    alpha = params.alpha
    nodes, measure = _grid_arrays(alpha, K, xi_min, xi_max)
    rho = varrho(alpha)
    weights = rho * nodes ** (2.0 * alpha - 1.0) * measure

    worst = 0.0
    for lam in CALIBRATION_LAMBDAS:
        target = (params.eta + lam) ** (alpha - 1.0)
        approx = float(np.sum(weights / (params.eta + lam + nodes**2)))
        worst = max(worst, abs(approx - target) / target)
    if worst > tolerance:
        raise CalibrationError(
            f"diffusive grid K={K} on [{xi_min:g}, {xi_max:g}] misses the closed form "
            f"by {worst:.3e} (tolerance {tolerance:.1e})"
        )
    return DiffusiveGrid(
        nodes=nodes,
        weights=weights,
        params=params,
        varrho=rho,
        measure=measure,
        tolerance=tolerance,
        calibration_error=worst,
    )


def quad_A(grid: DiffusiveGrid, lam: float) -> float:
    """Grid value of varrho * A_lambda; tends to (eta + lam)**(alpha - 1)."""
    s = grid.params.eta + lam
    if s <= 0.0:
        raise ValueError(f"need eta + lambda > 0, got {s!r}")
    return float(np.sum(grid.weights / (s + grid.nodes**2)))


@dataclass
class DiffusiveState:
    phi: np.ndarray
    phi_time_integral: np.ndarray
    t: float = 0.0

    def copy(self) -> "DiffusiveState":
        return DiffusiveState(self.phi.copy(), self.phi_time_integral.copy(), self.t)


def new_state(grid: DiffusiveGrid) -> DiffusiveState:
    return DiffusiveState(np.zeros(grid.K), np.zeros(grid.K), 0.0)


@dataclass(frozen=True, eq=False)
class StepCoefficients:
    """Per-dt factors of the exponential update, cached by the solver.

    Over one step the forcing is ``U(tau) = U_c + s (tau - dt/2)``; ``s = 0``
    is the frozen-forcing update.
    """

    decay: np.ndarray
    gain: np.ndarray
    slope_gain: np.ndarray
    int_decay: np.ndarray
    int_gain: np.ndarray
    int_slope_gain: np.ndarray
    dt: float


def _series(z: np.ndarray, coeffs) -> np.ndarray:
    out = np.zeros_like(z)
    for c in reversed(coeffs):
        out = out * z + c
    return out


_NSER = 14
# Taylor coefficients in z of the four step integrals (see _step_integrals)
_E1 = [(-1.0) ** k / math.factorial(k + 1) for k in range(_NSER)]
_E2 = [(-1.0) ** k / math.factorial(k + 2) for k in range(_NSER)]
_F1 = [
    (-1.0) ** k * (1.0 / (2.0 * math.factorial(k + 1)) - 1.0 / (math.factorial(k) * (k + 2)))
    for k in range(_NSER)
]
_F2 = [-c for c in _F1[1:]]


def _step_integrals(z: np.ndarray):
    """Dimensionless step integrals for z = rate * dt.

    e1 = int_0^1 e^{-z(1-y)} dy            f1 = int_0^1 e^{-z(1-y)} (y - 1/2) dy
    e2 = int_0^1 (1 - e^{-z(1-y)})/z dy    f2 = -f1 / z
    """
    z = np.asarray(z, dtype=float)
    e1 = np.empty_like(z)
    e2 = np.empty_like(z)
    f1 = np.empty_like(z)
    f2 = np.empty_like(z)
    small = z < 0.5
    zs = z[small]
    e1[small] = _series(zs, _E1)
    e2[small] = _series(zs, _E2)
    f1[small] = _series(zs, _F1)
    f2[small] = _series(zs, _F2)
    zb = z[~small]
    em = np.exp(-zb)
    e1b = -np.expm1(-zb) / zb
    g = (1.0 - em * (1.0 + zb)) / (zb * zb)
    e1[~small] = e1b
    e2[~small] = (1.0 - e1b) / zb
    f1[~small] = 0.5 * e1b - g
    f2[~small] = -(0.5 * e1b - g) / zb
    return e1, e2, f1, f2


def step_coefficients(grid: DiffusiveGrid, dt: float) -> StepCoefficients:
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    rates = grid.rates
    m = grid.mu
    e1, e2, f1, f2 = _step_integrals(rates * dt)
    return StepCoefficients(
        decay=np.exp(-rates * dt),
        gain=dt * e1 * m,
        slope_gain=dt * dt * f1 * m,
        int_decay=dt * e1,
        int_gain=dt * dt * e2 * m,
        int_slope_gain=dt**3 * f2 * m,
        dt=dt,
    )


def step_phi(
    state: DiffusiveState,
    grid: DiffusiveGrid,
    u_t_boundary: float,
    dt: float,
    coeffs: StepCoefficients | None = None,
    u_t_slope: float = 0.0,
) -> DiffusiveState:
    """Advance every phi_k exactly over dt; mutates ``state``.

    ``u_t_boundary`` is the forcing at the step midpoint and ``u_t_slope`` its
    rate of change over the step (0 freezes the forcing).  The running
    integral Phi_k takes the exact integral of the same solution, so
    (xi^2 + eta) Phi = mu (u(L,t) - u(L,0)) - phi holds to rounding.
    """
    if coeffs is None or coeffs.dt != dt:
        coeffs = step_coefficients(grid, dt)
    old = state.phi
    state.phi_time_integral += (
        coeffs.int_decay * old
        + coeffs.int_gain * u_t_boundary
        + coeffs.int_slope_gain * u_t_slope
    )
    state.phi = coeffs.decay * old + coeffs.gain * u_t_boundary + coeffs.slope_gain * u_t_slope
    state.t += dt
    return state


def output_O(state: DiffusiveState, grid: DiffusiveGrid) -> float:
    return float(np.dot(grid.out_weights, state.phi))


# -- direct quadrature oracles ------------------------------------------------


def _kernel_moments(a, b, beta: float, eta: float):
    """M0 = int_a^b tau^(beta-1) e^(-eta tau), M1 = int_a^b tau^beta e^(-eta tau)."""
    if eta == 0.0:
        m0 = (b**beta - a**beta) / beta
        m1 = (b ** (beta + 1.0) - a ** (beta + 1.0)) / (beta + 1.0)
    else:
        g0 = special.gamma(beta) * eta ** (-beta)
        g1 = special.gamma(beta + 1.0) * eta ** (-beta - 1.0)
        m0 = g0 * (special.gammainc(beta, eta * b) - special.gammainc(beta, eta * a))
        m1 = g1 * (
            special.gammainc(beta + 1.0, eta * b) - special.gammainc(beta + 1.0, eta * a)
        )
    return m0, m1


def _as_samples(samples) -> np.ndarray:
    u = np.asarray(samples, dtype=float)
    if u.ndim != 1 or u.size < 2:
        raise ValueError("need a 1-D series of at least 2 samples")
    return u


def caputo_direct(samples, params: FracParams, n: int, dt: float) -> float:
    """Tempered Caputo derivative at t_n of a uniformly sampled series.

    u is taken piecewise linear, so u_s is constant per cell and the kernel
    (t - s)^-alpha e^(-eta (t - s)) is integrated exactly on every cell.
    """
    u = _as_samples(samples)
    if not 1 <= n < u.size:
        raise ValueError(f"index n={n} outside [1, {u.size - 1}]")
    slopes = np.diff(u[: n + 1]) / dt
    j = np.arange(n)
    near = (n - j - 1) * dt
    far = (n - j) * dt
    m0, _ = _kernel_moments(near, far, 1.0 - params.alpha, params.eta)
    return float(np.dot(slopes, m0) / special.gamma(1.0 - params.alpha))


def frac_integral_I(samples, order: float, eta: float, n: int, dt: float) -> float:
    """I^{order, eta} u at t_n by product integration of the linear interpolant."""
    u = _as_samples(samples)
    if not 0.0 < order <= 1.0:
        raise ValueError("order must lie in (0, 1]")
    if eta < 0.0:
        raise ValueError("eta must be >= 0")
    if not 0 <= n < u.size:
        raise ValueError(f"index n={n} outside [0, {u.size - 1}]")
    if n == 0:
        return 0.0
    j = np.arange(n)
    near = (n - j - 1) * dt
    far = (n - j) * dt
    m0, m1 = _kernel_moments(near, far, order, eta)
    # with tau = t_n - s on cell j: u = u_{j+1} + (u_j - u_{j+1}) (tau - near)/dt
    left, right = u[:n], u[1 : n + 1]
    first = right * m0 + (left - right) * (m1 - near * m0) / dt
    return float(np.sum(first) / special.gamma(order))
