"""Direct transport-equation route: state construction, stepping guards,
and agreement with the delay-form route it cross-validates."""

import numpy as np
import pytest
from scipy.integrate import quad

import extrusim as ex
from extrusim.errors import ConfigError, DomainError, ParameterError, SingularityError
from extrusim.pde import (
    BiZoneState,
    Trace,
    closed_loop_deviation,
    initial_state,
    run_bizone,
    run_delay_reference,
    step_pde,
    trace_equivalence,
)

QUIET = ex.Perturbation(0.0, 0.0)
MOD = ex.Perturbation(0.1, 3.5)


class TestInitialState:
    def test_constant_history_gives_a_uniform_profile(self, coeffs):
        st = initial_state(coeffs, QUIET, 0.1, lambda s: 0.3, 50)
        assert st.t == 0.0 and st.x == 0.1
        assert st.u_profile.shape == (51,)
        assert st.z_grid == pytest.approx(coeffs.L / 50, rel=1e-15)
        assert np.all(st.u_profile == 0.3)
        assert st.length == pytest.approx(coeffs.L, rel=1e-15)

    def test_ramp_history_maps_through_constant_speed_transit(self, coeffs):
        # at constant speed the node at z left the hopper (L - z)/theta1 ago
        st = initial_state(coeffs, QUIET, 0.1, lambda s: 0.1 + 0.01 * s, 50)
        expect = 0.1 + 0.01 * (-(coeffs.L - st.nodes) / coeffs.theta1)
        np.testing.assert_allclose(st.u_profile, expect, rtol=0.0, atol=1e-15)

    def test_modulated_entry_times_satisfy_the_transit_integral(self, coeffs):
        # recover each node's entry time from the affine history, then check
        # the speed integrated from entry to now covers the distance to z
        st = initial_state(coeffs, MOD, 0.1, lambda s: 0.5 + 0.01 * s, 25)
        for zj, uj in zip(st.nodes, st.u_profile):
            sj = (uj - 0.5) / 0.01
            travelled, _ = quad(lambda t: ex.transport_speed(coeffs, MOD, t), sj, 0.0, limit=200)
            assert travelled == pytest.approx(coeffs.L - zj, abs=1e-10)

    def test_too_few_cells(self, coeffs):
        with pytest.raises(ParameterError):
            initial_state(coeffs, QUIET, 0.1, lambda s: 0.3, 1)

    @pytest.mark.parametrize("x0", [-0.01, 0.21])
    def test_interface_outside_barrel(self, coeffs, x0):
        with pytest.raises(DomainError):
            initial_state(coeffs, QUIET, x0, lambda s: 0.3, 50)

    @pytest.mark.parametrize("bad", [1.0, 1.2, -0.05])
    def test_history_values_must_be_admissible(self, coeffs, bad):
        with pytest.raises(DomainError):
            initial_state(coeffs, QUIET, 0.1, lambda s: bad, 50)


class TestStepPde:
    def _uniform(self, coeffs, value, n=100, x=0.1):
        z = coeffs.L / n
        return BiZoneState(t=0.0, x=x, u_profile=np.full(n + 1, float(value)), z_grid=z)

    def test_cfl_bound_enforced(self, coeffs):
        st = self._uniform(coeffs, 0.2)
        with pytest.raises(ParameterError):
            step_pde(coeffs, QUIET, st, 0.2, 2.0 * st.z_grid / coeffs.theta1)

    @pytest.mark.parametrize("u_in", [1.0, -0.05])
    def test_boundary_input_must_be_admissible(self, coeffs, u_in):
        st = self._uniform(coeffs, 0.2)
        with pytest.raises(DomainError):
            step_pde(coeffs, QUIET, st, u_in, st.z_grid / coeffs.theta1)

    def test_fully_filled_interface_is_singular(self, coeffs):
        st = self._uniform(coeffs, 1.0 - 1e-10)
        with pytest.raises(SingularityError):
            step_pde(coeffs, QUIET, st, 0.2, st.z_grid / coeffs.theta1)

    def test_interface_escape_detected(self, coeffs):
        # heavy overfeed next to the hopper pushes the interface past L
        st = self._uniform(coeffs, 0.9, x=coeffs.L - 1e-6)
        with pytest.raises(DomainError):
            step_pde(coeffs, QUIET, st, 0.9, st.z_grid / coeffs.theta1)

    def test_grid_aligned_step_is_an_exact_shift(self, coeffs):
        n = 100
        z = coeffs.L / n
        profile = np.linspace(0.1, 0.6, n + 1)
        st = BiZoneState(t=0.0, x=0.1, u_profile=profile.copy(), z_grid=z)
        dt = z / coeffs.theta1  # shift of exactly one cell at constant speed
        out = step_pde(coeffs, QUIET, st, 0.05, dt)
        np.testing.assert_array_equal(out.u_profile[:-1], profile[1:])
        assert out.u_profile[-1] == 0.05

    def test_interface_takes_one_euler_step(self, coeffs):
        st = self._uniform(coeffs, 0.2)
        dt = st.z_grid / coeffs.theta1
        out = step_pde(coeffs, QUIET, st, 0.2, dt)
        gamma = ex.flow_imbalance(coeffs, st.x, 0.2)
        assert out.x == pytest.approx(st.x - dt * coeffs.theta1 * gamma, rel=1e-15)
        assert out.t == pytest.approx(dt, rel=1e-15)

    def test_fractional_shift_preserves_a_uniform_profile(self, coeffs):
        st = self._uniform(coeffs, 0.2)
        dt = 0.5 * st.z_grid / (coeffs.theta1 * (1.0 + MOD.eps))
        out = step_pde(coeffs, MOD, st, 0.2, dt)
        np.testing.assert_allclose(out.u_profile, 0.2, rtol=0.0, atol=1e-15)


class TestRoutes:
    def test_balanced_feed_holds_the_interface_still(self, coeffs):
        # u = 0.25 balances the die flow at x = 1 / (3 theta2)
        x_eq = 1.0 / (3.0 * coeffs.theta2)
        dt = (coeffs.L / 100) / coeffs.theta1
        tr = run_bizone(coeffs, QUIET, x_eq, lambda t: 0.25, lambda s: 0.25, 100, dt, 0.5)
        assert float(np.max(np.abs(tr.x - x_eq))) < 1e-12

    def test_quiet_routes_agree(self, coeffs):
        dt = (coeffs.L / 100) / coeffs.theta1
        a = run_bizone(coeffs, QUIET, 0.1, lambda t: 0.25, lambda s: 0.15, 100, dt, 0.5)
        b = run_delay_reference(coeffs, QUIET, 0.1, lambda t: 0.25, lambda s: 0.15, dt, 0.5)
        gap = trace_equivalence(a, b)
        assert gap < 5.0 * coeffs.L / 100
        assert a.x[-1] > 0.115 and b.x[-1] > 0.115  # both climbing toward 0.1577

    def test_modulated_routes_stay_close(self, coeffs):
        dt = (coeffs.L / 100) / (coeffs.theta1 * (1.0 + MOD.eps))
        a = run_bizone(coeffs, MOD, 0.1, lambda t: 0.25, lambda s: 0.15, 100, dt, 0.5)
        b = run_delay_reference(coeffs, MOD, 0.1, lambda t: 0.25, lambda s: 0.15, dt, 0.5)
        assert trace_equivalence(a, b) < 5.0 * coeffs.L / 100

    def test_delay_reference_rejects_bad_start(self, coeffs):
        with pytest.raises(DomainError):
            run_delay_reference(coeffs, QUIET, 0.25, lambda t: 0.2, lambda s: 0.2, 1e-3, 0.1)

    def test_mismatched_grids_refuse_to_compare(self):
        a = Trace(t=np.arange(5) * 0.1, x=np.zeros(5))
        with pytest.raises(ConfigError):
            trace_equivalence(a, Trace(t=np.arange(6) * 0.1, x=np.zeros(6)))
        with pytest.raises(ConfigError):
            trace_equivalence(a, Trace(t=np.arange(5) * 0.1 + 0.5, x=np.zeros(5)))


@pytest.fixture(scope="module")
def short_run():
    cfg = ex.standard_config("compensated-full", 0.0, 0.0, horizon=0.3)
    return cfg, ex.run_scenario(cfg)


class TestClosedLoopReplay:
    def test_replay_tracks_the_recorded_path(self, coeffs, short_run):
        cfg, series = short_run
        dev = closed_loop_deviation(coeffs, cfg.pert, series, cfg.u_history0, n_cells=2000)
        # the saturated start puts a sharp front through the profile; the
        # replay smears it by one-cell interpolation, so the gap is a few
        # grid cells wide and shrinks with resolution
        assert dev < 2e-3

    def test_replay_gap_shrinks_with_resolution(self, coeffs, short_run):
        cfg, series = short_run
        coarse = closed_loop_deviation(coeffs, cfg.pert, series, cfg.u_history0, n_cells=1000)
        fine = closed_loop_deviation(coeffs, cfg.pert, series, cfg.u_history0, n_cells=2000)
        assert fine < 0.65 * coarse

    def test_record_step_must_respect_the_grid(self, coeffs, short_run):
        cfg, series = short_run
        with pytest.raises(ConfigError):
            closed_loop_deviation(coeffs, cfg.pert, series, cfg.u_history0, n_cells=5000)
