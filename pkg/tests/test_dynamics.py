import math

import numpy as np
import pytest

from dt_torque import ControlFieldSet, DetuningConfig, generator, integrate_to_steady, preset, rhs, solve_general
from dt_torque.dynamics import DEFAULT_TOL, convergence_metric
from dt_torque.errors import ConvergenceTimeout, DomainError
from dt_torque.steady import CoherenceState

from conftest import FIG2A_RHO

PI = math.pi


class TestRhs:
    def test_fixed_point(self, rng):
        for _ in range(10):
            fields = ControlFieldSet(tuple(rng.uniform(0.2, 3, 4)), tuple(rng.uniform(-PI, PI, 4)))
            det = DetuningConfig(rng.uniform(-6, 6), rng.uniform(-4, 4))
            probes = tuple(rng.uniform(0, 0.2, 2))
            state = solve_general(fields, probes, det)
            assert np.max(np.abs(rhs(state, fields, probes, det))) < 1e-12

    def test_drive_from_ground_state(self, fig2a):
        fields, probes, det = fig2a
        d = rhs(CoherenceState.zero(), fields, probes, det)
        np.testing.assert_allclose(d, [0.1j, 0.1j, 0, 0])

    def test_nothing_moves_without_probes(self, fig2a):
        fields, _, det = fig2a
        np.testing.assert_array_equal(rhs(np.zeros(4), fields, (0.0, 0.0), det), np.zeros(4))

    def test_generator_matches_rhs(self, rng):
        fields = ControlFieldSet(tuple(rng.uniform(0.2, 3, 4)), tuple(rng.uniform(-PI, PI, 4)))
        det = DetuningConfig(1.1, -0.3, gamma=0.8)
        probes = (0.1, 0.05j)
        m, b = generator(fields, probes, det)
        y = rng.normal(size=4) + 1j * rng.normal(size=4)
        np.testing.assert_allclose(m @ y + b, rhs(y, fields, probes, det), atol=1e-15)


class TestIntegrate:
    def test_fig2a_line_centre(self, fig2a):
        fields, probes, det = fig2a
        traj = integrate_to_steady(fields, probes, det, tol=1e-8)
        assert traj.final.rho_a.imag == pytest.approx(0.2 / 17, abs=1e-7)
        assert abs(traj.final.rho_a - FIG2A_RHO) < 1e-7
        assert traj.metric[-1] < 1e-8
        assert np.all(np.diff(traj.times) > 0)
        assert np.all(traj.metric[:-1] >= 1e-8)

    def test_zero_probes_converge_immediately(self, fig2a):
        fields, _, det = fig2a
        traj = integrate_to_steady(fields, (0.0, 0.0), det)
        assert traj.converged_at == 0.0
        assert np.all(traj.final.as_vector() == 0)

    def test_timeout_carries_last_state(self, fig2a):
        fields, probes, det = fig2a
        with pytest.raises(ConvergenceTimeout) as info:
            integrate_to_steady(fields, probes, det.replace(gamma=1e-6), t_max=50.0)
        exc = info.value
        assert exc.t == 50.0
        assert exc.metric > DEFAULT_TOL
        assert isinstance(exc.state, CoherenceState) and exc.state.is_finite()

    @pytest.mark.parametrize("kwargs", [{"tol": 0.0}, {"tol": -1.0}, {"t_max": 0.0}])
    def test_bad_arguments(self, fig2a, kwargs):
        fields, probes, det = fig2a
        with pytest.raises(DomainError):
            integrate_to_steady(fields, probes, det, **kwargs)

    def test_flow_is_linear_in_probes(self, fig2a):
        fields, probes, det = fig2a
        det = det.replace(delta=0.4)
        base = integrate_to_steady(fields, probes, det, tol=1e-6)
        half = integrate_to_steady(fields, (0.05, 0.05), det, tol=1e-6 / 2)
        n = min(len(base.times), len(half.times))
        np.testing.assert_array_equal(base.times[:n], half.times[:n])
        np.testing.assert_allclose(half.states[:n], 0.5 * base.states[:n], rtol=1e-8, atol=1e-12)

    @pytest.mark.parametrize("identifier", ["fig2b", "fig3c", "fig4a", "fig5b", "fig6a"])
    def test_fixed_point_consistency_at_default_tolerance(self, identifier):
        req = preset(identifier).request
        for big_d in (-1.3, 0.45):
            det = req.det.replace(delta=big_d)
            traj = integrate_to_steady(req.fields, req.probes, det)
            ref = solve_general(req.fields, req.probes, det)
            assert np.max(np.abs(traj.final.as_vector() - ref.as_vector())) < 10 * DEFAULT_TOL


def test_convergence_metric_is_scaled_by_gamma():
    assert convergence_metric(np.array([0.0, -2j, 1.0, 0.5]), 4.0) == 0.5
