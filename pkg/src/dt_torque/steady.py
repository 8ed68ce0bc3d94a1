"""Steady-state optical and ground-state coherences in the weak-probe limit.

Two independent routes are provided:

* :func:`solve_general` assembles the four coupled linear equations and
  solves them by LU factorisation with partial pivoting.  It never inverts
  the ground-state detuning block, so ``Delta = +-delta`` is a regular point.
* :func:`coherences_closed_form`, :func:`kernel` and :func:`coherences_special`
  evaluate the analytic expressions for equal control amplitudes.  These have
  poles (``Delta = 0``, ``|Delta| = |delta|``) that the physical solution does
  not share; evaluating on a pole raises :class:`~dt_torque.errors.PoleError`.

All population is assumed to stay in ``|0>``, so only the four coherences
``rho_A, rho_B`` (optical) and ``rho_1, rho_2`` (ground) are tracked.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import PoleError, PreconditionError, SingularSystemError
from .model import (
    ControlFieldSet,
    DetuningConfig,
    ProbeConfig,
    detuning_matrix,
    omega_matrix,
    phase_distance,
    reduce_phases,
)

POLE_RTOL = 1e-12
# Auto mode leaves the closed form well before the pole, where cancellation
# would cost more than ~1e-10 relative accuracy.
AUTO_POLE_GUARD = 1e-6
SINGULAR_RTOL = 1e-14
CONSTRAINT_TOL = 1e-12
SANITY_FACTOR = 10.0


class CoherenceWarning(UserWarning):
    """Coherences exceed the weak-probe sanity bound."""


@dataclass(frozen=True)
class CoherenceState:
    """Optical (``rho_a``, ``rho_b``) and ground-state (``rho_1``, ``rho_2``) coherences."""

    rho_a: complex
    rho_b: complex
    rho_1: complex
    rho_2: complex

    @classmethod
    def from_vector(cls, v) -> CoherenceState:
        v = np.asarray(v, dtype=complex)
        return cls(complex(v[0]), complex(v[1]), complex(v[2]), complex(v[3]))

    @classmethod
    def zero(cls) -> CoherenceState:
        return cls(0j, 0j, 0j, 0j)

    def as_vector(self) -> np.ndarray:
        return np.array([self.rho_a, self.rho_b, self.rho_1, self.rho_2], dtype=complex)

    @property
    def optical(self) -> np.ndarray:
        return np.array([self.rho_a, self.rho_b], dtype=complex)

    @property
    def ground(self) -> np.ndarray:
        return np.array([self.rho_1, self.rho_2], dtype=complex)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_vector())))


@dataclass(frozen=True)
class InteractionKernel:
    """``K = Omega (Delta*I + delta_hat)^-1 Omega^dagger`` as a 2x2 matrix."""

    matrix: np.ndarray

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


class SpecialCase(enum.Enum):
    """Phase/detuning configurations with their own reduced formulas."""

    PHI_PI = "phi-pi"
    PHI_ZERO = "phi-zero"
    DELTA_ZERO_PHI_PI = "delta-zero-phi-pi"
    DELTA_ZERO_PHI_ZERO = "delta-zero-phi-zero"


class Solver(str, enum.Enum):
    CLOSED = "closed"
    GENERAL = "general"
    AUTO = "auto"


def probe_vector(probes) -> np.ndarray:
    """Probe Rabi frequencies as a complex 2-vector.

    ``probes`` is either a :class:`ProbeConfig` (evaluated with the radial
    profile divided out) or any pair of complex amplitudes.
    """
    if isinstance(probes, ProbeConfig):
        return np.array(probes.amplitudes_at(None), dtype=complex)
    p = np.asarray(probes, dtype=complex).reshape(-1)
    if p.shape != (2,):
        raise ValueError(f"expected two probe amplitudes, got shape {p.shape}")
    return p


def characteristic_scale(fields: ControlFieldSet, det: DetuningConfig) -> float:
    """``max(Omega^2, Gamma^2, Delta^2, delta^2)``, the squared frequency scale."""
    return max(max(fields.amplitudes) ** 2, det.gamma**2, det.delta**2, det.delta2**2)


def _point(fields, det) -> dict:
    return {
        "amplitudes": fields.amplitudes,
        "phases": fields.phases,
        "delta": float(det.delta),
        "delta2": float(det.delta2),
        "gamma": float(det.gamma),
    }


def _check_pole(value: complex, threshold: float, what: str) -> None:
    if not abs(value) >= threshold:
        raise PoleError(f"{what} vanishes (|{value:.3e}| < {threshold:.1e}); use solve_general")


def _require_equal(fields: ControlFieldSet) -> None:
    if not fields.equal_amplitudes:
        raise PreconditionError(
            f"closed forms need four equal control amplitudes, got {fields.amplitudes}"
        )


def steady_state_system(fields: ControlFieldSet, det: DetuningConfig) -> np.ndarray:
    """Coefficient matrix ``A`` of ``A @ [rho_A, rho_B, rho_1, rho_2] = b``.

    Rows 0-1: ``(i*Delta - Gamma/2) rho_opt + i*Omega rho_g``.
    Rows 2-3: ``i*Omega^dagger rho_opt + i*(Delta*I + delta_hat) rho_g``.
    """
    om = omega_matrix(fields)
    a = np.empty((4, 4), dtype=complex)
    a[:2, :2] = (1j * det.delta - det.gamma / 2) * np.eye(2)
    a[:2, 2:] = 1j * om
    a[2:, :2] = 1j * om.conj().T
    a[2:, 2:] = 1j * detuning_matrix(det)
    return a


def solve_general(fields: ControlFieldSet, probes, det: DetuningConfig) -> CoherenceState:
    """Steady state of the four coupled coherence equations for arbitrary fields.

    Raises
    ------
    SingularSystemError
        If ``|det A|`` falls below ``1e-14`` of its Hadamard bound (the
        product of the row norms).  This happens e.g. at
        ``Delta = delta = 0`` with a rank-one coupling matrix.
    """
    p = probe_vector(probes)
    a = steady_state_system(fields, det)
    b = np.concatenate([-1j * p, np.zeros(2, dtype=complex)])

    hadamard = float(np.prod(np.linalg.norm(a, axis=1)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    det_abs = float(np.prod(np.abs(np.diag(lu))))
    if not det_abs > SINGULAR_RTOL * hadamard:
        raise SingularSystemError(
            f"steady-state system is singular at {_point(fields, det)} "
            f"(|det|/bound = {det_abs / hadamard if hadamard else 0.0:.2e})",
            point=_point(fields, det),
        )
    x = scipy.linalg.lu_solve((lu, piv), b)
    state = CoherenceState.from_vector(x)
    _sanity_check(state, p, det)
    return state


def _sanity_check(state: CoherenceState, p: np.ndarray, det: DetuningConfig) -> None:
    pmax = float(np.max(np.abs(p)))
    if pmax == 0:
        return
    bound = SANITY_FACTOR * pmax / det.gamma
    biggest = float(np.max(np.abs(state.as_vector())))
    if biggest > bound:
        warnings.warn(
            f"|rho| = {biggest:.3g} exceeds the weak-probe bound {bound:.3g}",
            CoherenceWarning,
            stacklevel=3,
        )


def kernel(fields: ControlFieldSet, det: DetuningConfig) -> InteractionKernel:
    """Closed-form interaction kernel for equal control amplitudes."""
    _require_equal(fields)
    big_d, d = det.delta, det.delta2
    w = fields.omega
    thr = POLE_RTOL * math.sqrt(characteristic_scale(fields, det))
    _check_pole(big_d, thr, "probe detuning Delta")
    _check_pole(abs(big_d) - abs(d), thr, "|Delta| - |delta|")
    phi, theta = reduce_phases(fields)
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    pref = 2 * w**2 * big_d / (big_d**2 - d**2)
    k_ab = np.exp(1j * (theta + phi / 2)) * (c - 1j * (d / big_d) * s)
    k_ba = np.exp(-1j * (theta + phi / 2)) * (c + 1j * (d / big_d) * s)
    return InteractionKernel(pref * np.array([[1.0, k_ab], [k_ba, 1.0]], dtype=complex))


def _closed_form_checks(fields, det, rtol):
    """Raise PoleError if the general closed form is within ``rtol`` of a pole."""
    big_d, d = det.delta, det.delta2
    thr = rtol * math.sqrt(characteristic_scale(fields, det))
    _check_pole(big_d, thr, "probe detuning Delta")
    _check_pole(abs(big_d) - abs(d), thr, "|Delta| - |delta|")
    w = fields.omega
    phi, _ = reduce_phases(fields)
    x = (big_d**2 - d**2) * (2 * big_d + 1j * det.gamma)
    den = (
        (1 - x / (4 * w**2 * big_d)) ** 2
        - math.cos(phi / 2) ** 2
        - (d / big_d) ** 2 * math.sin(phi / 2) ** 2
    )
    _check_pole(den, rtol, "closed-form denominator")
    return den


def coherences_closed_form(fields: ControlFieldSet, probes, det: DetuningConfig) -> np.ndarray:
    """Optical coherences ``[rho_A, rho_B]`` from the general equal-amplitude formula."""
    _require_equal(fields)
    den = _closed_form_checks(fields, det, POLE_RTOL)
    p = probe_vector(probes)
    big_d, d, g = det.delta, det.delta2, det.gamma
    w = fields.omega
    phi, theta = reduce_phases(fields)
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    x = (big_d**2 - d**2) * (2 * big_d + 1j * g)
    pref = (big_d**2 - d**2) / (2 * w**2 * big_d**2)
    diag = big_d - x / (4 * w**2)
    m_ab = -big_d * np.exp(1j * (theta + phi / 2)) * (c - 1j * (d / big_d) * s)
    m_ba = -big_d * np.exp(-1j * (theta + phi / 2)) * (c + 1j * (d / big_d) * s)
    mat = np.array([[diag, m_ab], [m_ba, diag]], dtype=complex)
    return (pref / den) * (mat @ p)


def _case_constraints(case: SpecialCase, fields: ControlFieldSet, det: DetuningConfig) -> None:
    _require_equal(fields)
    phi, theta = reduce_phases(fields)
    target = math.pi if case in (SpecialCase.PHI_PI, SpecialCase.DELTA_ZERO_PHI_PI) else 0.0
    if phase_distance(phi, target) > CONSTRAINT_TOL:
        raise PreconditionError(f"{case.value} needs phi = {target:.6g}, got {phi:.6g}")
    if abs(theta) > CONSTRAINT_TOL:
        raise PreconditionError(f"{case.value} needs theta = 0, got {theta:.6g}")
    if case in (SpecialCase.DELTA_ZERO_PHI_PI, SpecialCase.DELTA_ZERO_PHI_ZERO):
        if abs(det.delta2) > CONSTRAINT_TOL * math.sqrt(characteristic_scale(fields, det)):
            raise PreconditionError(f"{case.value} needs delta = 0, got {det.delta2:.6g}")


def coherences_special(case: SpecialCase | str, fields: ControlFieldSet, probes,
                       det: DetuningConfig) -> np.ndarray:
    """Optical coherences from the reduced formula of one special configuration.

    ``PHI_PI`` and ``PHI_ZERO`` hold for any two-photon detuning with
    ``theta = 0``; the ``DELTA_ZERO_*`` cases additionally need ``delta = 0``.
    """
    case = SpecialCase(case)
    _case_constraints(case, fields, det)
    p = probe_vector(probes)
    big_d, g = det.delta, det.gamma
    d = 0.0 if case in (SpecialCase.DELTA_ZERO_PHI_PI, SpecialCase.DELTA_ZERO_PHI_ZERO) else det.delta2
    w2 = fields.omega**2
    scale = characteristic_scale(fields, det)
    u = 2 * big_d + 1j * g

    if case is SpecialCase.PHI_PI:
        den = (4 * w2 - u * (big_d + d)) * (4 * w2 - u * (big_d - d))
        _check_pole(den, POLE_RTOL * scale**2, "phi = pi denominator")
        pref = 8 * w2 / den
        diag = big_d - (big_d**2 - d**2) * u / (4 * w2)
        off = -d
    elif case is SpecialCase.DELTA_ZERO_PHI_PI:
        den = (4 * w2 - big_d * u) ** 2
        _check_pole(den, POLE_RTOL * scale**2, "delta = 0, phi = pi denominator")
        pref = 8 * w2 / den
        diag = big_d - big_d**2 * u / (4 * w2)
        off = 0.0
    else:
        _check_pole(big_d, POLE_RTOL * math.sqrt(scale), "probe detuning Delta")
        if case is SpecialCase.PHI_ZERO:
            den = big_d * u * (2 - (big_d**2 - d**2) * u / (4 * w2 * big_d))
            diag = big_d - (big_d**2 - d**2) * u / (4 * w2)
        else:
            den = big_d * u * (2 - big_d * u / (4 * w2))
            diag = big_d - big_d**2 * u / (4 * w2)
        _check_pole(den, POLE_RTOL * scale, "phi = 0 denominator")
        pref = -2 / den
        off = -big_d

    mat = np.array([[diag, off], [off, diag]], dtype=complex)
    return pref * (mat @ p)


def ground_coherences(fields: ControlFieldSet, det: DetuningConfig, rho_a: complex,
                      rho_b: complex) -> np.ndarray:
    """Back-substitute ``[rho_1, rho_2] = -(Delta*I + delta_hat)^-1 Omega^dagger [rho_A, rho_B]``."""
    thr = POLE_RTOL * math.sqrt(characteristic_scale(fields, det))
    _check_pole(det.delta + det.delta2, thr, "Delta + delta")
    _check_pole(det.delta - det.delta2, thr, "Delta - delta")
    inv = np.array([1.0 / (det.delta + det.delta2), 1.0 / (det.delta - det.delta2)])
    om = omega_matrix(fields)
    return -inv * (om.conj().T @ np.array([rho_a, rho_b], dtype=complex))


def closed_form_is_safe(fields: ControlFieldSet, det: DetuningConfig) -> bool:
    """True if the closed form applies and is comfortably away from its poles."""
    if not fields.equal_amplitudes:
        return False
    try:
        _closed_form_checks(fields, det, AUTO_POLE_GUARD)
    except PoleError:
        return False
    return True


def solve(fields: ControlFieldSet, probes, det: DetuningConfig,
          solver: Solver | str = Solver.AUTO) -> CoherenceState:
    """Full coherence state using the requested solver route.

    ``auto`` uses the closed form away from its poles and the general
    linear solve near them or for unequal amplitudes.
    """
    solver = Solver(solver)
    if solver is Solver.GENERAL or (solver is Solver.AUTO and not closed_form_is_safe(fields, det)):
        return solve_general(fields, probes, det)
    rho = coherences_closed_form(fields, probes, det)
    ground = ground_coherences(fields, det, rho[0], rho[1])
    return CoherenceState(complex(rho[0]), complex(rho[1]), complex(ground[0]), complex(ground[1]))
