import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracwave.viscomem import (
    ExpKernel,
    KernelError,
    direct_convolution,
    direct_g_circ,
    g_circ_grad,
    g_prime_circ_grad,
    kernel_integral,
    kernel_value,
    l_residual,
    memory_laplacian,
    new_accumulators,
    update_accumulators,
)


class TestKernel:
    def test_value_and_integral(self):
        k = ExpKernel(0.5, 2.0)
        assert kernel_value(k, 0.0) == 0.5
        assert math.isclose(kernel_integral(k, 1.0), 0.25 * (1 - math.exp(-2.0)))
        assert l_residual(k) == 0.75

    def test_rejects_l_nonpositive(self):
        with pytest.raises(KernelError, match="l>0"):
            ExpKernel(1.0, 1.0)

    @pytest.mark.parametrize("g0,kappa", [(-0.1, 1.0), (0.1, 0.0)])
    def test_rejects_bad_parameters(self, g0, kappa):
        with pytest.raises(KernelError):
            ExpKernel(g0, kappa)

    def test_null_kernel(self):
        assert ExpKernel(0.0, 1.0).is_null

    def test_negative_time(self):
        with pytest.raises(ValueError):
            kernel_value(ExpKernel(), -1.0)

    @given(st.floats(0.0, 0.99), st.floats(0.1, 5.0))
    def test_l_residual_positive(self, frac, kappa):
        k = ExpKernel(frac * kappa, kappa)
        assert l_residual(k) > 0.0


def _history(nt, nx, dt, dx):
    t = np.arange(nt)[:, None] * dt
    x = np.arange(nx)[None, :] * dx
    return np.sin(2.0 * x) * np.cos(3.0 * t) + x * t


class TestAccumulators:
    def test_recursion_equals_dense_trapezoid(self):
        k = ExpKernel(0.4, 1.5)
        dt, dx, nt, nx = 0.01, 0.05, 200, 21
        hist = _history(nt, nx, dt, dx)
        acc = new_accumulators(nx)
        for m in range(1, nt):
            update_accumulators(acc, k, hist[m], hist[m - 1], dt, dx)
        dense_R = direct_convolution(hist, ExpKernel(1.0, 1.5), dt)
        np.testing.assert_allclose(acc.R, dense_R, rtol=1e-12, atol=1e-14)
        grads = np.diff(hist, axis=1) / dx
        g_now = grads[-1]
        assert math.isclose(g_circ_grad(acc, k, g_now, dx), direct_g_circ(grads, k, dt, dx), rel_tol=1e-10)
        assert math.isclose(acc.S, float(direct_convolution(np.ones(nt), ExpKernel(1.0, 1.5), dt)), rel_tol=1e-12)

    def test_continuum_limit(self):
        """Trapezoid history converges at second order to the exact convolution of cos."""
        k = ExpKernel(1.0, 2.0)
        errs = []
        for dt in (0.02, 0.01, 0.005):
            n = int(round(1.0 / dt))
            acc = new_accumulators(2)
            for m in range(1, n + 1):
                update_accumulators(acc, k, np.full(2, math.cos((m) * dt)), np.full(2, math.cos((m - 1) * dt)), dt, 1.0)
            exact = (2.0 * math.cos(1.0) + math.sin(1.0) - 2.0 * math.exp(-2.0)) / 5.0
            errs.append(abs(acc.R[0] - exact))
        assert math.log2(errs[0] / errs[1]) > 1.9 and math.log2(errs[1] / errs[2]) > 1.9

    def test_memory_laplacian_scales(self):
        acc = new_accumulators(5)
        acc.R[:] = np.arange(5.0) ** 2
        lap = memory_laplacian(acc, ExpKernel(0.3, 1.0), lambda v: np.gradient(np.gradient(v)))
        np.testing.assert_allclose(lap, 0.3 * np.gradient(np.gradient(acc.R)))

    def test_null_kernel_gcirc_zero(self):
        acc = new_accumulators(4)
        assert g_circ_grad(acc, ExpKernel(0.0, 1.0), np.ones(3), 0.1) == 0.0

    def test_g_prime_circ(self):
        assert g_prime_circ_grad(2.0, ExpKernel(0.5, 3.0)) == -6.0

    def test_mismatched_shapes(self):
        acc = new_accumulators(4)
        with pytest.raises(ValueError):
            update_accumulators(acc, ExpKernel(), np.zeros(5), np.zeros(5), 0.1, 0.1)
        with pytest.raises(ValueError):
            update_accumulators(acc, ExpKernel(), np.zeros(4), np.zeros(4), 0.0, 0.1)

    def test_empty_history(self):
        with pytest.raises(ValueError):
            direct_convolution(np.zeros((0, 3)), ExpKernel(), 0.1)

    @given(st.integers(2, 40), st.floats(0.001, 0.1))
    def test_gcirc_nonnegative(self, nt, dt):
        k = ExpKernel(0.5, 1.0)
        hist = _history(nt, 11, dt, 0.1) * 3.0
        acc = new_accumulators(11)
        for m in range(1, nt):
            update_accumulators(acc, k, hist[m], hist[m - 1], dt, 0.1)
        g_now = np.diff(hist[-1]) / 0.1
        assert g_circ_grad(acc, k, g_now, 0.1) >= -1e-12
