"""Time-domain integration of the coherence equations.

Serves as an independent check on the steady-state algebra: the equations
of motion are integrated from the bare ground state (all coherences zero)
with an adaptive Adams integrator until every coherence has stopped moving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import ode

from .errors import ConvergenceTimeout, DomainError
from .model import ControlFieldSet, DetuningConfig, detuning_matrix, omega_matrix
from .steady import CoherenceState, probe_vector

DEFAULT_TOL = 1e-8
DEFAULT_T_MAX = 1000.0
# A derivative metric of 1e-8 sits below the local error of an rtol=1e-8
# integrator, so the step controller runs three decades tighter.
RTOL = 1e-11
ATOL = 1e-13
METHOD = "adams"
# The metric is checked every max(MIN_CHECK, CHECK_FRACTION * t); late
# convergence on slow dark-state decays is then located to about 2 percent.
MIN_CHECK = 0.25
CHECK_FRACTION = 0.02


@dataclass
class BlochTrajectory:
    """Integration record: sample times, coherences and convergence metric per sample."""

    times: np.ndarray
    states: np.ndarray  # (n_samples, 4) complex: rho_A, rho_B, rho_1, rho_2
    metric: np.ndarray
    tol: float

    @property
    def final(self) -> CoherenceState:
        return CoherenceState.from_vector(self.states[-1])

    @property
    def converged_at(self) -> float:
        return float(self.times[-1])


def rhs(state, fields: ControlFieldSet, probes, det: DetuningConfig) -> np.ndarray:
    """Time derivative of ``[rho_A, rho_B, rho_1, rho_2]``.

    ``d/dt rho_opt = i Omega rho_g + (i Delta - Gamma/2) rho_opt + i p`` and
    ``d/dt rho_g = i Omega^dagger rho_opt + i (Delta I + delta_hat) rho_g``.
    """
    y = state.as_vector() if isinstance(state, CoherenceState) else np.asarray(state, dtype=complex)
    om = omega_matrix(fields)
    p = probe_vector(probes)
    opt, grd = y[:2], y[2:]
    d_opt = 1j * om @ grd + (1j * det.delta - det.gamma / 2) * opt + 1j * p
    d_grd = 1j * om.conj().T @ opt + 1j * detuning_matrix(det) @ grd
    return np.concatenate([d_opt, d_grd])


def convergence_metric(derivative: np.ndarray, gamma: float) -> float:
    """Largest coherence rate of change in units of the decay rate."""
    return float(np.max(np.abs(derivative)) / gamma)


def generator(fields: ControlFieldSet, probes, det: DetuningConfig):
    """Return ``(M, b)`` with ``d/dt y = M y + b`` for ``y = [rho_A, rho_B, rho_1, rho_2]``."""
    om = omega_matrix(fields)
    m = np.zeros((4, 4), dtype=complex)
    m[:2, :2] = (1j * det.delta - det.gamma / 2) * np.eye(2)
    m[:2, 2:] = 1j * om
    m[2:, :2] = 1j * om.conj().T
    m[2:, 2:] = 1j * detuning_matrix(det)
    b = np.zeros(4, dtype=complex)
    b[:2] = 1j * probe_vector(probes)
    return m, b


def integrate_to_steady(fields: ControlFieldSet, probes, det: DetuningConfig,
                        tol: float = DEFAULT_TOL, t_max: float = DEFAULT_T_MAX) -> BlochTrajectory:
    """Integrate from zero coherences until ``max|d rho/dt| / Gamma < tol``.

    The trajectory is sampled at the metric checkpoints; its last sample is
    the first checkpoint below ``tol``.

    Raises
    ------
    ConvergenceTimeout
        When ``t_max`` is reached first; carries the last state.
    """
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    if not t_max > 0:
        raise DomainError(f"t_max must be > 0, got {t_max}")

    m, b = generator(fields, probes, det)
    y = np.zeros(4, dtype=complex)
    times, states = [0.0], [y]
    metric = [convergence_metric(b, det.gamma)]
    if metric[0] < tol:
        return BlochTrajectory(np.array(times), np.array(states), np.array(metric), tol)

    solver = ode(lambda t, y: m @ y + b).set_integrator(
        "zvode", method=METHOD, rtol=RTOL, atol=ATOL, nsteps=1_000_000)
    solver.set_initial_value(y, 0.0)
    t = 0.0
    while metric[-1] >= tol:
        if t >= t_max:
            raise ConvergenceTimeout(
                f"no steady state by t = {t:g} (metric {metric[-1]:.3e} > tol {tol:.1e})",
                t=t,
                state=CoherenceState.from_vector(states[-1]),
                metric=metric[-1],
            )
        t = min(t + max(MIN_CHECK, CHECK_FRACTION * t), t_max)
        y = solver.integrate(t)
        if not solver.successful():
            raise ConvergenceTimeout(f"integrator failed at t = {solver.t:g}", t=float(solver.t),
                                     state=CoherenceState.from_vector(y), metric=float("nan"))
        times.append(t)
        states.append(y.copy())
        metric.append(convergence_metric(m @ y + b, det.gamma))
    return BlochTrajectory(np.array(times), np.array(states), np.array(metric), tol)
