"""Configuration types, phase conventions and the Laguerre-Gaussian radial mode.

Units: all frequencies are in units of the excited-state decay rate
(``gamma = 1`` by default), lengths in units of the beam waist ``w``, and the
probe wave number ``k`` is the dimensionless product ``k * w``.

Control-field phases are always listed in the order
``(phi_A1, phi_B1, phi_A2, phi_B2)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi

# Tolerances for comparisons on the phase circle and amplitude equality.
PHASE_SNAP = 1e-12
EQUAL_AMPLITUDE_RTOL = 1e-12
WEAK_PROBE_RATIO = 0.3


def wrap_phase(x: float) -> float:
    """Reduce an angle to the half-open interval (-pi, pi].

    Values within ``1e-12`` of either end are snapped to ``+pi`` so that the
    two representations of the same point on the circle classify identically.
    """
    w = math.pi - math.fmod(math.pi - x, TWO_PI)
    if w > math.pi:
        w -= TWO_PI
    elif w <= -math.pi:
        w += TWO_PI
    if abs(w - math.pi) < PHASE_SNAP or abs(w + math.pi) < PHASE_SNAP:
        return math.pi
    return w


def phase_distance(a: float, b: float) -> float:
    """Shortest distance between two angles on the circle."""
    return abs(wrap_phase(a - b))


@dataclass(frozen=True)
class ControlFieldSet:
    """The four control-field Rabi frequencies of the closed loop.

    Stored as amplitude/phase pairs so that phases given by the caller are
    kept exactly (``pi`` stays ``pi`` instead of being recovered from
    ``angle(exp(1j*pi))``).

    Parameters
    ----------
    amplitudes : tuple of float
        ``(|Omega_A1|, |Omega_B1|, |Omega_A2|, |Omega_B2|)``.
    phases : tuple of float
        ``(phi_A1, phi_B1, phi_A2, phi_B2)`` in radians.
    """

    amplitudes: tuple[float, float, float, float]
    phases: tuple[float, float, float, float]

    def __post_init__(self):
        amps = tuple(float(a) for a in self.amplitudes)
        phases = tuple(float(p) for p in self.phases)
        if len(amps) != 4 or len(phases) != 4:
            raise DomainError("need exactly four control amplitudes and phases")
        if any(a < 0 or not math.isfinite(a) for a in amps):
            raise DomainError(f"control amplitudes must be finite and >= 0, got {amps}")
        if not all(math.isfinite(p) for p in phases):
            raise DomainError(f"control phases must be finite, got {phases}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def equal(cls, omega: float, phases=(0.0, 0.0, 0.0, 0.0)) -> ControlFieldSet:
        """Four fields of common amplitude ``omega`` (must be > 0)."""
        if not omega > 0:
            raise DomainError(f"equal-amplitude constructor needs omega > 0, got {omega}")
        return cls((omega,) * 4, tuple(phases))

    @classmethod
    def from_complex(cls, a1: complex, a2: complex, b1: complex, b2: complex) -> ControlFieldSet:
        """Build from four independent complex Rabi frequencies."""
        values = (complex(a1), complex(b1), complex(a2), complex(b2))
        return cls(tuple(abs(v) for v in values), tuple(math.atan2(v.imag, v.real) for v in values))

    @property
    def a1(self) -> complex:
        return self.amplitudes[0] * np.exp(1j * self.phases[0])

    @property
    def b1(self) -> complex:
        return self.amplitudes[1] * np.exp(1j * self.phases[1])

    @property
    def a2(self) -> complex:
        return self.amplitudes[2] * np.exp(1j * self.phases[2])

    @property
    def b2(self) -> complex:
        return self.amplitudes[3] * np.exp(1j * self.phases[3])

    @property
    def equal_amplitudes(self) -> bool:
        """True when all four amplitudes agree to a relative ``1e-12``."""
        hi = max(self.amplitudes)
        return hi > 0 and hi - min(self.amplitudes) <= EQUAL_AMPLITUDE_RTOL * hi

    @property
    def omega(self) -> float:
        """Common amplitude; for unequal fields the smallest one."""
        return min(self.amplitudes)

    def shifted(self, chi: float) -> ControlFieldSet:
        """Add a common phase ``chi`` to all four fields."""
        return ControlFieldSet(self.amplitudes, tuple(p + chi for p in self.phases))

    def with_relative_phases(self, phi: float | None = None, theta: float | None = None) -> ControlFieldSet:
        """Return a copy whose reduced phases are ``(phi, theta)``.

        ``phi_B1`` and ``phi_B2`` are kept; ``phi_A2`` absorbs ``theta`` and
        ``phi_A1`` absorbs ``phi``. Either argument may be left at its
        current value.
        """
        cur_phi, cur_theta = reduce_phases(self)
        phi = cur_phi if phi is None else phi
        theta = cur_theta if theta is None else theta
        _, pb1, _, pb2 = self.phases
        pa2 = theta + pb2
        pa1 = phi + theta + pb1
        return ControlFieldSet(self.amplitudes, (pa1, pb1, pa2, pb2))


@dataclass(frozen=True)
class ProbeConfig:
    """Peak strengths and spatial structure of the two vortex probes."""

    amp_a: float = 0.1
    amp_b: float = 0.1
    l: int = 1
    k: float = 1.0
    waist: float = 1.0

    def __post_init__(self):
        if self.amp_a < 0 or self.amp_b < 0:
            raise DomainError(f"probe strengths must be >= 0, got {self.amp_a}, {self.amp_b}")
        if not self.waist > 0:
            raise DomainError(f"beam waist must be > 0, got {self.waist}")
        if int(self.l) != self.l:
            raise DomainError(f"OAM charge must be an integer, got {self.l}")
        object.__setattr__(self, "l", int(self.l))

    def amplitudes_at(self, r: float | None = None) -> tuple[float, float]:
        """Probe Rabi frequencies at radius ``r`` (unit profile if ``r`` is None)."""
        g = 1.0 if r is None else lg_profile(self.l, self.waist, r)
        return self.amp_a * g, self.amp_b * g

    def scaled(self, s: float) -> ProbeConfig:
        return ProbeConfig(self.amp_a * s, self.amp_b * s, self.l, self.k, self.waist)


def check_weak_probe(probes: ProbeConfig, fields: ControlFieldSet) -> bool:
    """Warn (and return False) when a probe exceeds 0.3 of the control amplitude."""
    ok = max(probes.amp_a, probes.amp_b) <= WEAK_PROBE_RATIO * fields.omega
    if not ok:
        warnings.warn(
            f"probe strength {max(probes.amp_a, probes.amp_b):g} exceeds "
            f"{WEAK_PROBE_RATIO} x control amplitude {fields.omega:g}; "
            "linear response may be inaccurate",
            stacklevel=2,
        )
    return ok


@dataclass(frozen=True)
class DetuningConfig:
    """Probe detuning, two-photon detuning and excited-state decay rate."""

    delta: float = 0.0
    delta2: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"decay rate must be > 0, got {self.gamma}")

    def replace(self, **changes) -> DetuningConfig:
        vals = {"delta": self.delta, "delta2": self.delta2, "gamma": self.gamma}
        vals.update(changes)
        return DetuningConfig(**vals)


@dataclass(frozen=True)
class SpatialPoint:
    """Cylindrical position ``(r, azimuth, z)``; ``z = 0`` is the waist plane."""

    r: float
    azimuth: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise DomainError(f"radius must be >= 0, got {self.r}")
        object.__setattr__(self, "azimuth", self.azimuth % TWO_PI)


def lg_profile(l: int, w: float, r):
    """Doughnut-mode amplitude ``G(r) = (r/w)**|l| * exp(-r**2/w**2)``.

    The profile is not normalised; its peak sits at ``r = w*sqrt(|l|/2)``.
    Accepts a scalar or an array of radii.
    """
    if not w > 0:
        raise DomainError(f"beam waist must be > 0, got {w}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("radius must be >= 0")
    x = r_arr / w
    g = x ** abs(int(l)) * np.exp(-(x**2))
    return float(g) if g.ndim == 0 else g


def reduce_phases(fields: ControlFieldSet) -> tuple[float, float]:
    """Relative loop phase ``phi`` and extra phase ``theta``, both in (-pi, pi].

    ``theta = phi_A2 - phi_B2`` and ``phi = (phi_A1 - phi_B1) - theta``.
    """
    pa1, pb1, pa2, pb2 = fields.phases
    theta = wrap_phase(pa2 - pb2)
    phi = wrap_phase((pa1 - pb1) - theta)
    return phi, theta


def omega_matrix(fields: ControlFieldSet) -> np.ndarray:
    """Control coupling matrix with rows ``(A1, A2)`` and ``(B1, B2)``."""
    return np.array([[fields.a1, fields.a2], [fields.b1, fields.b2]], dtype=complex)


def detuning_matrix(det: DetuningConfig) -> np.ndarray:
    """``Delta*I + diag(delta, -delta)``, the ground-state energy block."""
    return np.diag([det.delta + det.delta2, det.delta - det.delta2]).astype(complex)
