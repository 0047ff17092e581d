import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracwave.diagnostics import bounds as bf

import oracles as orc

REL = 1e-12


def close(a, b):
    return abs(a - float(b)) <= REL * max(abs(float(b)), 1e-300)


class TestSpotValues:
    def test_b_zero_spot(self):
        assert bf.tstar_b_zero(0.0, 1.0, 4.0) == 0.5

    def test_quadratic_root_r2_delta_one(self):
        assert bf.quadratic_root_r2(1.0) == 4.0 - 2.0 * math.sqrt(2.0)
        assert abs(bf.quadratic_root_r2(1.0) - 1.17157) < 1e-5

    def test_case_iii_r(self):
        assert bf.case_iii_r(5.0) == 5.0 - 2.0 * math.sqrt(20.0)


class TestRandomAgainstOracle:
    """100 random admissible inputs per formula."""

    @pytest.fixture
    def draws(self, rng):
        n = 100
        return dict(
            t0=rng.uniform(0.0, 5.0, n),
            J0=rng.uniform(0.01, 0.99, n),
            alpha=rng.uniform(0.1, 10.0, n),
            b=rng.uniform(0.1, 10.0, n),
            delta=rng.uniform(0.1, 3.0, n),
            Jp0=-rng.uniform(0.01, 5.0, n),
        )

    def test_quadratic_root(self, draws):
        for d in draws["delta"]:
            assert close(bf.quadratic_root_r2(d), orc.root_r2(d))

    def test_log_bound(self, draws):
        for t0, J0, al, b in zip(draws["t0"], draws["J0"], draws["alpha"], draws["b"]):
            b = -b
            s = math.sqrt(al / -b)
            J = J0 * min(1.0, s)  # admissible: J < min{1, s}
            assert close(bf.tstar_log_bound(t0, J, al, b), orc.log_bound(t0, J, al, b))
            assert close(bf.bound_negative_log(t0, J, al, b), orc.log_bound(t0, J, al, b))

    def test_b_zero(self, draws):
        for t0, J0, al in zip(draws["t0"], draws["J0"], draws["alpha"]):
            assert close(bf.tstar_b_zero(t0, J0, al), orc.b_zero(t0, J0, al))

    def test_b_positive(self, draws):
        for J0, al in zip(draws["J0"], draws["alpha"]):
            assert close(bf.tstar_b_positive(J0, al), orc.b_positive(J0, al))
            assert close(bf.bound_positive_sqrt(J0, al), orc.b_positive(J0, al))

    def test_power_bound_plus(self, draws):
        for t0, J0, al, b, d in zip(draws["t0"], draws["J0"], draws["alpha"], draws["b"], draws["delta"]):
            assert close(bf.tstar_b_positive_power(t0, J0, al, b, d), orc.power_bound(t0, J0, al, b, d, +1))

    def test_power_bound_minus(self, draws):
        for t0, J0, al, b, d in zip(draws["t0"], draws["J0"], draws["alpha"], draws["b"], draws["delta"]):
            c = (b / al) ** (d / (2.0 + d))
            J = J0 / c  # admissible: c J < 1
            assert close(bf.bound_positive_power(t0, J, al, b, d), orc.power_bound(t0, J, al, b, d, -1))

    def test_slope_bounds(self, draws):
        for t0, J0, Jp in zip(draws["t0"], draws["J0"], draws["Jp0"]):
            assert close(bf.bound_negative_slope(t0, J0, Jp), orc.slope_minus(t0, J0, Jp))
            assert close(bf.bound_zero_slope(t0, J0, Jp), orc.slope_minus(t0, J0, Jp))
            assert close(bf.bound_zero_slope_plus(t0, J0, Jp), orc.slope_plus(t0, J0, Jp))


class TestDomains:
    def test_log_bound_rejects_large_J(self):
        with pytest.raises(ValueError):
            bf.tstar_log_bound(0.0, 1.5, 1.0, -1.0)

    def test_log_bound_rejects_nonnegative_b(self):
        with pytest.raises(ValueError):
            bf.tstar_log_bound(0.0, 0.5, 1.0, 0.0)

    def test_b_zero_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            bf.tstar_b_zero(0.0, 1.0, 0.0)

    def test_positive_power_rejects_cJ_above_one(self):
        with pytest.raises(ValueError):
            bf.bound_positive_power(0.0, 100.0, 1.0, 1.0, 1.0)

    def test_slope_rejects_flat_J(self):
        with pytest.raises(ValueError):
            bf.bound_negative_slope(0.0, 1.0, 0.0)

    def test_quadratic_root_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            bf.quadratic_root_r2(0.0)


class TestProperties:
    @given(st.floats(1e-3, 1e3))
    def test_quadratic_root_r2_is_smaller_root(self, d):
        r = bf.quadratic_root_r2(d)
        # r2 solves r^2 - 4(d+1) r + 4(d+1) = 0
        assert abs(r * r - 4 * (d + 1) * r + 4 * (d + 1)) <= 1e-9 * (d + 1) ** 2
        assert 0.0 < r <= 2.0

    @given(st.floats(0.0, 10.0), st.floats(0.01, 0.99), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
    def test_log_bound_exceeds_t0(self, t0, frac, al, mb):
        s = math.sqrt(al / mb)
        J = frac * min(1.0, s)
        assert bf.tstar_log_bound(t0, J, al, -mb) > t0

    @given(st.floats(0.0, 10.0), st.floats(0.01, 10.0), st.floats(0.01, 10.0))
    def test_b_zero_monotone_in_J(self, t0, J, al):
        assert bf.tstar_b_zero(t0, 2 * J, al) > bf.tstar_b_zero(t0, J, al)
