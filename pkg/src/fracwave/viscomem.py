"""Exponential relaxation kernel and recursive memory convolutions.

With ``g(t) = g0 exp(-kappa t)`` every history integral the solver needs obeys
the one-step recursion ``X(t + dt) = exp(-kappa dt) X(t) + local term``, so the
memory costs O(1) per step.  :func:`direct_convolution` keeps the O(N) dense
sum as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExpKernel",
    "MemoryAccumulators",
    "KernelError",
    "kernel_value",
    "kernel_integral",
    "l_residual",
    "new_accumulators",
    "update_accumulators",
    "memory_laplacian",
    "g_circ_grad",
    "g_prime_circ_grad",
    "direct_convolution",
    "direct_g_circ",
]


class KernelError(ValueError):
    """Relaxation kernel violates g(0) >= 0, kappa > 0 or l = 1 - g0/kappa > 0."""


@dataclass(frozen=True)
class ExpKernel:
    """g(t) = g0 * exp(-kappa t).  ``g0 = 0`` is the memory-free kernel."""

    g0: float = 0.5
    kappa: float = 1.0

    def __post_init__(self):
        if self.g0 < 0.0:
            raise KernelError(f"g0 must be >= 0, got {self.g0!r}")
        if self.kappa <= 0.0:
            raise KernelError(f"kappa must be > 0, got {self.kappa!r}")
        if 1.0 - self.g0 / self.kappa <= 0.0:
            raise KernelError(
                f"l = 1 - g0/kappa = {1.0 - self.g0 / self.kappa:g} must be > 0 "
                "(l>0: relaxation kernel integral below 1)"
            )

    @property
    def is_null(self) -> bool:
        return self.g0 == 0.0


def kernel_value(k: ExpKernel, t):
    if np.any(np.asarray(t) < 0.0):
        raise ValueError("kernel evaluated at negative time")
    return k.g0 * np.exp(-k.kappa * np.asarray(t, dtype=float))


def kernel_integral(k: ExpKernel, t: float) -> float:
    """int_0^t g(s) ds."""
    return k.g0 / k.kappa * -math.expm1(-k.kappa * t)


def l_residual(k: ExpKernel) -> float:
    l = 1.0 - k.g0 / k.kappa
    if l <= 0.0:  # unreachable through the constructor; kept for hand-built kernels
        raise KernelError(f"l = {l:g} must be > 0")
    return l


@dataclass
class MemoryAccumulators:
    """Exponentially weighted histories of u, of its cell gradient, and of |grad u|^2.

    R  = int_0^t e^{-kappa (t-s)} u(s) ds            (node field)
    P  = int_0^t e^{-kappa (t-s)} u_x(s) ds          (cell field)
    Q  = int_0^t e^{-kappa (t-s)} |u_x(s)|_2^2 ds    (scalar)
    S  = int_0^t e^{-kappa (t-s)} ds                 (scalar)

    All four use the same trapezoidal recursion, so ``g0 * S`` is the kernel
    mass int_0^t g as the discrete history sees it and (g o u_x) expands to a
    trapezoid sum of squares.
    """

    R: np.ndarray
    P: np.ndarray
    Q: float = 0.0
    S: float = 0.0
    t: float = 0.0

    def copy(self) -> "MemoryAccumulators":
        return MemoryAccumulators(self.R.copy(), self.P.copy(), self.Q, self.S, self.t)


def new_accumulators(nx: int) -> MemoryAccumulators:
    return MemoryAccumulators(np.zeros(nx), np.zeros(nx - 1))


def _grad(u: np.ndarray, dx: float) -> np.ndarray:
    return np.diff(u) / dx


def update_accumulators(
    acc: MemoryAccumulators,
    k: ExpKernel,
    u_new: np.ndarray,
    u_old: np.ndarray,
    dt: float,
    dx: float,
) -> MemoryAccumulators:
    """Trapezoidal step X <- e^{-kappa dt}(X + dt/2 f_old) + dt/2 f_new; mutates ``acc``."""
    if u_new.shape != u_old.shape or u_new.shape != acc.R.shape:
        raise ValueError("accumulator update on mismatched grids")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    e = math.exp(-k.kappa * dt)
    h = 0.5 * dt
    gx_old = _grad(u_old, dx)
    gx_new = _grad(u_new, dx)
    acc.R = e * (acc.R + h * u_old) + h * u_new
    acc.P = e * (acc.P + h * gx_old) + h * gx_new
    acc.Q = e * (acc.Q + h * float(np.dot(gx_old, gx_old)) * dx) + h * float(
        np.dot(gx_new, gx_new)
    ) * dx
    acc.S = e * (acc.S + h) + h
    acc.t += dt
    return acc


def memory_laplacian(acc: MemoryAccumulators, k: ExpKernel, laplacian_op) -> np.ndarray:
    """g0 * Lap(R): the history integral int_0^t g(t-s) Lap u(s) ds."""
    return k.g0 * laplacian_op(acc.R)


def g_circ_grad(acc: MemoryAccumulators, k: ExpKernel, grad_u_now: np.ndarray, dx: float) -> float:
    """(g o u_x)(t) = int_0^t g(t-s) |u_x(t) - u_x(s)|^2 ds, expanded on the accumulators."""
    if k.is_null:
        return 0.0
    gg = float(np.dot(grad_u_now, grad_u_now)) * dx
    cross = float(np.dot(grad_u_now, acc.P)) * dx
    return k.g0 * (gg * acc.S - 2.0 * cross + acc.Q)


def g_prime_circ_grad(value_of_g_circ: float, k: ExpKernel) -> float:
    """(g' o u_x)(t) = -kappa (g o u_x)(t), exact for the exponential kernel."""
    return -k.kappa * value_of_g_circ


def _trapezoid_weights(n: int, dt: float) -> np.ndarray:
    w = np.full(n, dt)
    w[0] = 0.5 * dt
    w[-1] = 0.5 * dt
    return w


def direct_convolution(history, k: ExpKernel, dt: float):
    """Trapezoidal sum of g(t - s_m) history[m] with t the last sample time.

    ``history`` has shape (N,) or (N, nx); row m is the sample at s_m = m dt.
    """
    h = np.asarray(history, dtype=float)
    if h.shape[0] == 0:
        raise ValueError("empty history")
    n = h.shape[0]
    lags = (n - 1 - np.arange(n)) * dt
    w = _trapezoid_weights(n, dt) * kernel_value(k, lags)
    return np.tensordot(w, h, axes=(0, 0))


def direct_g_circ(grad_history, k: ExpKernel, dt: float, dx: float) -> float:
    """Dense evaluation of (g o u_x)(t) from the full gradient history (oracle)."""
    gh = np.asarray(grad_history, dtype=float)
    diff2 = np.sum((gh[-1][None, :] - gh) ** 2, axis=1) * dx
    return float(direct_convolution(diff2, k, dt))
