"""Bright/dark ground-state bases and the phase-selected coupling regime.

At equal control amplitudes the relative loop phase ``phi`` decides how the
double tripod decomposes:

* ``phi = pi``, ``delta != 0``: two Lambda systems coupled through ``delta``
  (``CoupledLambda``);
* ``phi = pi``, ``delta = 0``: the same two Lambda systems, uncoupled
  (``DecoupledLambdas``);
* ``phi = 0``: both excited states share one bright state (``DoubleLambda``);
* anything else is ``Generic``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateBasisError, UnsupportedClassificationError
from .model import (
    ControlFieldSet,
    DetuningConfig,
    ProbeConfig,
    SpatialPoint,
    lg_profile,
    phase_distance,
    reduce_phases,
)

CLASSIFY_TOL = 1e-9

# Lab-frame basis order used by every 5x5 matrix here.
LAB_BASIS = ("0", "A", "B", "1", "2")


class Regime(str, enum.Enum):
    COUPLED_LAMBDA = "CoupledLambda"
    DOUBLE_LAMBDA = "DoubleLambda"
    DECOUPLED_LAMBDAS = "DecoupledLambdas"
    GENERIC = "Generic"


@dataclass(frozen=True)
class BrightDarkBasis:
    """Bright and dark ground-state superpositions, as vectors over ``(|1>, |2>)``."""

    bright_a: np.ndarray
    dark_a: np.ndarray
    bright_b: np.ndarray
    dark_b: np.ndarray
    omega_a: float
    omega_b: float


@dataclass(frozen=True)
class RegimeReport:
    label: Regime
    c_b: float
    c_d: float
    c_x: float
    overlap: float
    phi: float
    theta: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["label"] = self.label.value
        return d


def bright_dark(fields: ControlFieldSet) -> BrightDarkBasis:
    """Bright/dark states of the ``|A>`` and ``|B>`` subsystems.

    ``|B_A> = (Omega_A1* |1> + Omega_A2* |2>) / Omega_A`` and
    ``|D_A> = (Omega_A2 |1> - Omega_A1 |2>) / Omega_A``, likewise for ``B``.
    """
    a1, a2, b1, b2 = fields.a1, fields.a2, fields.b1, fields.b2
    omega_a = math.hypot(abs(a1), abs(a2))
    omega_b = math.hypot(abs(b1), abs(b2))
    if omega_a == 0 or omega_b == 0:
        raise DegenerateBasisError(
            f"effective couplings Omega_A = {omega_a:g}, Omega_B = {omega_b:g}; both must be > 0"
        )
    return BrightDarkBasis(
        bright_a=np.array([np.conj(a1), np.conj(a2)]) / omega_a,
        dark_a=np.array([a2, -a1]) / omega_a,
        bright_b=np.array([np.conj(b1), np.conj(b2)]) / omega_b,
        dark_b=np.array([b2, -b1]) / omega_b,
        omega_a=omega_a,
        omega_b=omega_b,
    )


def coupling_coeffs(fields: ControlFieldSet) -> tuple[float, float, float]:
    """``(C_B, C_D, C_X)`` of the two-photon detuning term in the ``A`` bright/dark basis.

    Taken as printed: ``C_B = |Omega_A2|^2 - |Omega_A1|^2`` carries units of
    frequency squared while ``C_X`` is normalised.  For every equal-amplitude
    case ``C_B = 0`` so the mismatch never reaches a result.
    """
    a1, a2 = fields.a1, fields.a2
    norm = abs(a1) ** 2 + abs(a2) ** 2
    if norm == 0:
        raise DegenerateBasisError("Omega_A1 and Omega_A2 both vanish")
    c_b = abs(a2) ** 2 - abs(a1) ** 2
    c_x = -(a1 * a2 + np.conj(a1) * np.conj(a2)) / norm
    return float(c_b), float(-c_b), float(c_x.real)


def classify(fields: ControlFieldSet, det: DetuningConfig) -> RegimeReport:
    """Label the effective level structure selected by the control phases."""
    if not fields.equal_amplitudes:
        raise UnsupportedClassificationError(
            f"regimes are defined for equal control amplitudes only, got {fields.amplitudes}"
        )
    phi, theta = reduce_phases(fields)
    basis = bright_dark(fields)
    c_b, c_d, c_x = coupling_coeffs(fields)
    overlap = float(abs(np.vdot(basis.bright_a, basis.bright_b)))

    delta_zero = abs(det.delta2) <= CLASSIFY_TOL * max(1.0, fields.omega, det.gamma)
    if phase_distance(phi, math.pi) <= CLASSIFY_TOL:
        label = Regime.DECOUPLED_LAMBDAS if delta_zero else Regime.COUPLED_LAMBDA
    elif phase_distance(phi, 0.0) <= CLASSIFY_TOL:
        label = Regime.DOUBLE_LAMBDA
    else:
        label = Regime.GENERIC
    return RegimeReport(label, c_b, c_d, c_x, overlap, phi, theta)


def probe_fields_at(probes: ProbeConfig, point: SpatialPoint) -> tuple[complex, complex]:
    """Complex probe fields ``eps_A``, ``eps_B`` including their helical phases.

    Phases are ``-l*azimuth + k*z`` for ``A`` and ``-l*azimuth - k*z`` for ``B``.
    """
    g = lg_profile(probes.l, probes.waist, point.r)
    wind = -probes.l * point.azimuth
    eps_a = probes.amp_a * g * np.exp(1j * (wind + probes.k * point.z))
    eps_b = probes.amp_b * g * np.exp(1j * (wind - probes.k * point.z))
    return complex(eps_a), complex(eps_b)


def lab_hamiltonian(fields: ControlFieldSet, det: DetuningConfig, probes: ProbeConfig,
                    point: SpatialPoint, include_probe_detuning: bool = False) -> np.ndarray:
    """Five-level Hamiltonian in the basis ``(|0>, |A>, |B>, |1>, |2>)``.

    The probe detuning term ``Delta |0><0|`` is left out unless requested,
    matching the reduced form used for the regime analysis.
    """
    eps_a, eps_b = probe_fields_at(probes, point)
    h = np.zeros((5, 5), dtype=complex)
    i0, ia, ib, i1, i2 = range(5)
    for row, col, val in (
        (ia, i0, eps_a), (ib, i0, eps_b),
        (ia, i1, fields.a1), (ia, i2, fields.a2),
        (ib, i1, fields.b1), (ib, i2, fields.b2),
    ):
        h[row, col] -= val
        h[col, row] -= np.conj(val)
    h[i1, i1] += det.delta2
    h[i2, i2] -= det.delta2
    if include_probe_detuning:
        h[i0, i0] += det.delta
    return h


def transformed_hamiltonian(fields: ControlFieldSet, det: DetuningConfig, probes: ProbeConfig,
                            point: SpatialPoint,
                            include_probe_detuning: bool = False) -> np.ndarray:
    """Hamiltonian in ``(|0>, |A>, |B>, |+>, |->)`` built from the ``A`` bright/dark pair.

    For ``phi = pi`` the slots are ``|+> = |D_A>`` and ``|-> = |B_A>``, which
    at ``theta = 0`` are ``(|1>+|2>)/sqrt2`` and ``(|2>-|1>)/sqrt2``; the
    two-photon term then reads ``-delta(|+><-| + |-><+|)``.  Otherwise the
    slots are ``|+> = |B_A>`` and ``|-> = |D_A>``; at ``phi = 0`` these are
    ``(|1>+|2>)/sqrt2`` and ``(|1>-|2>)/sqrt2`` and the same term reads
    ``+delta(|+><-| + |-><+|)``.
    """
    if not fields.equal_amplitudes:
        raise UnsupportedClassificationError(
            f"transformed Hamiltonian needs equal control amplitudes, got {fields.amplitudes}"
        )
    basis = bright_dark(fields)
    phi, _ = reduce_phases(fields)
    if phase_distance(phi, math.pi) <= CLASSIFY_TOL:
        plus, minus = basis.dark_a, basis.bright_a
    else:
        plus, minus = basis.bright_a, basis.dark_a
    u = np.eye(5, dtype=complex)
    u[3:, 3] = plus
    u[3:, 4] = minus
    h = lab_hamiltonian(fields, det, probes, point, include_probe_detuning)
    return u.conj().T @ h @ u
