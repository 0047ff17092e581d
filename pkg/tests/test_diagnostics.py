import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracwave.diagnostics import (
    SERIES_COLUMNS,
    NotApplicableError,
    blowup_bounds,
    blowup_inequality_residual,
    build_series,
    check_global_conditions,
    classify_blowup_case,
    decay_rate_constants,
    domain_constants,
    energy,
    energy_dissipation_residual,
    fit_decay,
    functional_F,
    F_prime,
    global_beta,
    global_bound_check,
    lemma8_identity_residual,
    lemma8_scalar_residual,
    lemma10_bound_check,
    lemma11_F_second_check,
    lyapunov_decay_check,
    lyapunov_params,
    poincare_constant,
    sandwich_check,
    snapshot,
    trace_constant,
)
from fracwave.fracdiff import new_state, step_phi
from fracwave.wavesolver import Domain1D, RunConfig, initial_fields, make_grid, simulate

GLOBAL = dict(u0_profile="sine:0.1:2", u1_profile="sine:0.3:1", t_end=20.0)
BLOWUP = dict(L=8.0, nx=801, p=5.0, u0_profile="plateau:2:20", u1_profile="zero", blowup_threshold=1e6, t_end=5.0)


@pytest.fixture(scope="module")
def global_run():
    cfg = RunConfig(**GLOBAL)
    raw, term, _ = simulate(cfg)
    return cfg, build_series(raw, cfg), term


@pytest.fixture(scope="module")
def blowup_run():
    cfg = RunConfig(**BLOWUP)
    raw, term, _ = simulate(cfg)
    return cfg, build_series(raw, cfg), term


class TestDomainConstants:
    @pytest.mark.parametrize("L", [1.0, 2.5])
    def test_poincare(self, L):
        assert poincare_constant(Domain1D(L, 801)) == pytest.approx(2.0 * L / math.pi, rel=1e-4)

    @pytest.mark.parametrize("L", [1.0, 4.0])
    def test_trace(self, L):
        assert trace_constant(Domain1D(L, 801)) == pytest.approx(math.sqrt(L), rel=1e-10)

    def test_A0_positive(self):
        cfg = RunConfig()
        assert domain_constants(cfg.domain, make_grid(cfg)).A0 > 0.0


class TestEnergyResidual:
    def test_exact_exponential_second_order(self):
        errs = []
        for n in (100, 200):
            t = np.linspace(0.0, 1.0, n + 1)
            errs.append(np.max(np.abs(energy_dissipation_residual(t, np.exp(-t), -np.exp(-t)))))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)

    def test_short_input(self):
        assert energy_dissipation_residual([], [], []).size == 0
        assert np.all(energy_dissipation_residual([0.0], [1.0], [0.0]) == 0.0)

    def test_run_residual_small(self, global_run):
        # the startup layer of the fractional derivative dominates near t = 0
        _, s, _ = global_run
        late = s.t >= 1.0
        assert np.max(np.abs(s["dEdt_residual"][late])) < 5e-3 * s.E[0]


class TestSeries:
    def test_columns(self, global_run):
        _, s, _ = global_run
        assert tuple(s.columns) == SERIES_COLUMNS
        assert all(s[c].shape == (len(s),) for c in SERIES_COLUMNS)

    def test_lyap_nan_without_params(self):
        cfg = RunConfig(eta=0.0, t_end=0.5)
        raw, _, _ = simulate(cfg)
        s = build_series(raw, cfg)
        assert s.params is None and np.all(np.isnan(s["Lyap"]))

    def test_lemma8_identity(self, global_run):
        cfg, s, _ = global_run
        r = lemma8_identity_residual(s.levels, u_L0=float(s.levels.uL[0]))
        assert np.max(r) < 1e-10 * max(1.0, float(np.max(s["phi_energy"])))

    def test_lemma8_scalar_step(self):
        # u_t = c + s t, so u(L,t) - u(L,0) = c t + s t^2 / 2
        cfg = RunConfig(K_nodes=40)
        grid = make_grid(cfg)
        state = new_state(grid)
        c, s, dt = 0.3, -0.8, 0.01
        for n in range(80):
            step_phi(state, grid, c + s * (n + 0.5) * dt, dt, u_t_slope=s)
        t = state.t
        r = lemma8_scalar_residual(grid.nodes, cfg.eta, grid.mu, 0.2 + c * t + 0.5 * s * t * t,
                                   state.phi, state.phi_time_integral, u0=0.2)
        assert np.max(np.abs(r)) < 1e-12


class TestGlobalSuite:
    def test_beta_and_I(self, global_run):
        cfg, s, _ = global_run
        c = s.meta["constants"]
        beta, ipos = check_global_conditions(*initial_fields(cfg), cfg, c)
        assert 0.0 < beta < 1.0 and ipos

    def test_beta_negative_energy(self):
        with pytest.raises(NotApplicableError):
            global_beta(0.6, 3.0, -1.0)

    def test_bound_and_sandwich(self, global_run):
        cfg, s, _ = global_run
        ok, ratio = global_bound_check(s.levels, cfg, float(s.E[0]))
        assert ok and 0.0 < ratio < 1.0
        ok, lo, hi = sandwich_check(s.levels, cfg, s.params)
        assert ok and s.params.alpha1 <= lo <= hi <= s.params.alpha2

    def test_lyapunov_decay(self, global_run):
        cfg, s, _ = global_run
        rate = decay_rate_constants(cfg, s.meta["constants"], s.params)
        assert 0.0 < rate.d < 1.0 and rate.k > 0.0
        ok, _ = lyapunov_decay_check(s.levels, cfg, s.params, rate)
        assert ok

    def test_params_requirements(self, global_run):
        cfg, s, _ = global_run
        p = lyapunov_params(cfg, s.meta["constants"])
        assert p.alpha1 > 0.0 and p.N >= 1.0
        with pytest.raises(ValueError):
            lyapunov_params(cfg, s.meta["constants"], margin=1.0)

    def test_decay_needs_damping(self, global_run):
        cfg, s, _ = global_run
        with pytest.raises(NotApplicableError):
            decay_rate_constants(cfg.with_(a=0.0), s.meta["constants"], s.params)


class TestFitDecay:
    def test_exact(self):
        t = np.linspace(0.0, 10.0, 101)
        f = fit_decay(t, 3.0 * np.exp(-0.4 * t), window=(0.0, 10.0))
        assert f.K == pytest.approx(3.0) and f.k == pytest.approx(0.4) and f.r_squared == pytest.approx(1.0)

    def test_errors(self):
        t = np.linspace(0.0, 1.0, 5)
        with pytest.raises(ValueError, match="fewer than 10"):
            fit_decay(t, np.ones(5))
        t = np.linspace(0.0, 1.0, 50)
        with pytest.raises(ValueError, match="nonpositive"):
            fit_decay(t, -np.ones(50))

    @settings(max_examples=25)
    @given(K=st.floats(0.1, 10.0), k=st.floats(0.01, 2.0))
    def test_recovers_parameters(self, K, k):
        t = np.linspace(0.0, 5.0, 60)
        f = fit_decay(t, K * np.exp(-k * t))
        assert f.K == pytest.approx(K, rel=1e-8) and f.k == pytest.approx(k, rel=1e-8)


class TestBlowupSuite:
    def test_classification_negative(self, blowup_run):
        cfg, s, term = blowup_run
        assert term.reason == "BlowUp"
        a = classify_blowup_case(s.levels, cfg)
        assert a.case == "NegativeEnergy" and a.E0 < 0.0 and a.lower_t_star == 0.0

    def test_bounds_and_residual(self, blowup_run):
        cfg, s, term = blowup_run
        a = classify_blowup_case(s.levels, cfg)
        with pytest.raises(ValueError):
            blowup_inequality_residual(s.levels, a, cfg)
        a = blowup_bounds(a, s.levels, cfg, float(s.t[-1]))
        vals = {b.formula: b.value for b in a.bounds}
        assert vals["(5.34)"] is not None and vals["(5.34)"] > float(s.t[-1])
        assert a.sigma > 0.0 and a.b_coef < 0.0
        r = blowup_inequality_residual(s.levels, a, cfg)
        tail = r[s.t >= 0.75 * s.t[-1]]
        assert np.nanmin(tail) / abs(a.sigma) >= -1e-2

    def test_p_at_most_four(self, blowup_run):
        cfg, s, _ = blowup_run
        c4 = cfg.with_(p=4.0)
        a = classify_blowup_case(s.levels, c4)
        a = blowup_bounds(a, s.levels, c4, 1.0)
        assert a.bounds[0].value is None and not a.j_bounds_applicable

    def test_zero_energy_band(self):
        cfg = RunConfig(p=5.0)
        dom = cfg.domain
        u0 = 0.0 * dom.x
        q = snapshot(u0, u0, cfg)
        assert classify_blowup_case(q, cfg).case == "NotClassified"

    def test_lemma10_lemma11_shapes(self, blowup_run):
        cfg, s, _ = blowup_run
        holds, hmax, rhs = lemma10_bound_check(s.levels, cfg, s.meta["constants"], float(s.t[-1]))
        assert isinstance(holds, bool) and hmax >= 0.0 and rhs > 0.0
        flags, margin = lemma11_F_second_check(s.levels, cfg, float(s.E[0]))
        assert flags.shape == s.t.shape and flags[0] and flags[-1]

    def test_F_prime_matches_derivative_at_rest(self):
        cfg = RunConfig(u0_profile="sine:0.5:1", u1_profile="zero", dt=1e-4, t_end=0.01)
        raw, _, _ = simulate(cfg)
        s = build_series(raw, cfg)
        F = functional_F(s.levels, cfg)
        dF = np.gradient(F, s.t, edge_order=2)[0]
        assert F_prime(s.levels.row(0), cfg) == pytest.approx(dF, rel=2e-2, abs=1e-6)


class TestEnergyProperty:
    @settings(max_examples=10)
    @given(amp=st.floats(0.01, 0.2), vel=st.floats(0.0, 0.3))
    def test_energy_nonincreasing(self, amp, vel):
        cfg = RunConfig(nx=51, t_end=2.0, u0_profile=f"sine:{amp}:2", u1_profile=f"sine:{vel}:1")
        raw, term, _ = simulate(cfg)
        E = build_series(raw, cfg).E
        assert term.reason == "Completed"
        assert np.max(np.diff(E)) <= 1e-8 * max(E[0], 1e-12)
