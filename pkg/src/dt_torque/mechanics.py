"""Phase-gradient force, axial torque and a small planar ensemble integrator.

Only the radiation-pressure force from the helical probe phases is kept; the
dipole force from intensity gradients is left out by construction.  Vectors
are cylindrical ``(r, azimuth, z)`` component triples.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularAxisError
from .model import ControlFieldSet, DetuningConfig, ProbeConfig, SpatialPoint, lg_profile
from .steady import Solver, solve

R_MIN = 1e-6


@dataclass(frozen=True)
class ForceSample:
    position: SpatialPoint
    f_phi: float
    f_z: float
    f_r: float = 0.0


@dataclass
class TorqueSpectrum:
    """Torque function sampled along one sweep axis."""

    axis: str
    values: np.ndarray
    tau: np.ndarray
    im_rho_a: np.ndarray
    im_rho_b: np.ndarray
    re_rho_a: np.ndarray
    re_rho_b: np.ndarray
    params: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)


def phase_gradients(probes: ProbeConfig, point: SpatialPoint) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the two probe phases, ``(-l/r, +-k)`` in the azimuthal/axial slots."""
    if point.r <= 0:
        raise SingularAxisError("phase gradient is singular on the vortex core r = 0")
    azimuthal = -probes.l / point.r
    return (
        np.array([0.0, azimuthal, probes.k]),
        np.array([0.0, azimuthal, -probes.k]),
    )


def _coherences(fields, probes, det, r, solver):
    amps = probes.amplitudes_at(r)
    state = solve(fields, amps, det, solver)
    return amps, state


def force(fields: ControlFieldSet, probes: ProbeConfig, det: DetuningConfig,
          point: SpatialPoint, solver: Solver | str = Solver.AUTO) -> ForceSample:
    """Force ``2*(Omega_A0 Im rho_A grad Phi_A + Omega_B0 Im rho_B grad Phi_B)`` at ``point``.

    Coherences are evaluated with the local probe amplitudes ``|Omega_0| G(r)``.
    """
    grad_a, grad_b = phase_gradients(probes, point)
    (om_a, om_b), state = _coherences(fields, probes, det, point.r, solver)
    f = 2.0 * (om_a * state.rho_a.imag * grad_a + om_b * state.rho_b.imag * grad_b)
    return ForceSample(point, f_phi=float(f[1]), f_z=float(f[2]), f_r=float(f[0]))


def torque_function(fields: ControlFieldSet, probes: ProbeConfig, det: DetuningConfig,
                    r: float | None = None, solver: Solver | str = Solver.AUTO) -> float:
    """``tau = (|Omega_A0| Im rho_A + |Omega_B0| Im rho_B) / G(r)``.

    With ``r=None`` the coherences are computed at unit radial profile, which
    is how the torque spectra are plotted.  Passing a radius evaluates them
    with the full profile and divides it back out; the result does not
    depend on ``r`` because the coherences are linear in the probes.
    """
    if r is None:
        g = 1.0
    else:
        g = lg_profile(probes.l, probes.waist, r)
        if g == 0:
            raise DomainError(f"radial profile vanishes at r = {r}; tau is undefined there")
    _, state = _coherences(fields, probes, det, r, solver)
    return float((probes.amp_a * state.rho_a.imag + probes.amp_b * state.rho_b.imag) / g)


def torque(fields: ControlFieldSet, probes: ProbeConfig, det: DetuningConfig,
           point: SpatialPoint, solver: Solver | str = Solver.AUTO, tau: float | None = None) -> float:
    """Axial torque ``T_z = -2 G(r)^2 l tau`` about the beam axis.

    ``tau`` may be passed in when it is already known (it does not depend on
    position).
    """
    g = lg_profile(probes.l, probes.waist, point.r)
    if probes.l == 0 or g == 0:
        return 0.0
    if tau is None:
        tau = torque_function(fields, probes, det, solver=solver)
    return float(-2.0 * g**2 * probes.l * tau)


@dataclass
class Atom:
    """Point atom in the ``z = 0`` plane (Cartesian position and velocity)."""

    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    mass: float = 1.0


@dataclass
class EnsembleTrajectory:
    times: np.ndarray
    positions: np.ndarray  # (steps + 1, n_atoms, 2)
    velocities: np.ndarray  # (steps + 1, n_atoms, 2)
    azimuthal_velocity: np.ndarray  # (steps + 1, n_atoms)
    angle: np.ndarray  # unwrapped azimuth, (steps + 1, n_atoms)
    angular_momentum: np.ndarray  # m * r * v_phi, (steps + 1, n_atoms)
    tau: float
    clamped: int = 0

    @property
    def accumulated_angle(self) -> np.ndarray:
        return self.angle[-1] - self.angle[0]

    def kinetic_energy(self, masses) -> np.ndarray:
        return 0.5 * np.sum(np.asarray(masses)[None, :] * np.sum(self.velocities**2, axis=2), axis=1)


def _azimuthal_accel(pos, masses, probes, tau):
    """In-plane acceleration from the azimuthal force ``-2 l G^2 tau / r``."""
    r = np.hypot(pos[:, 0], pos[:, 1])
    g = lg_profile(probes.l, probes.waist, r)
    f_phi = -2.0 * probes.l * g**2 * tau / r
    phi_hat = np.stack([-pos[:, 1] / r, pos[:, 0] / r], axis=1)
    return (f_phi / masses)[:, None] * phi_hat


def _clamp(pos, r_min):
    r = np.hypot(pos[:, 0], pos[:, 1])
    low = r < r_min
    if np.any(low):
        warnings.warn(f"{int(low.sum())} atom(s) crossed r < {r_min:g}; clamped to r_min", stacklevel=3)
        safe = np.where(r[low] > 0, r[low], 1.0)
        direction = np.where(r[low, None] > 0, pos[low] / safe[:, None], np.array([1.0, 0.0]))
        pos[low] = direction * r_min
    return int(low.sum())


def rotate_ensemble(fields: ControlFieldSet, probes: ProbeConfig, det: DetuningConfig,
                    atoms, dt: float, steps: int,
                    solver: Solver | str = Solver.AUTO) -> EnsembleTrajectory:
    """Velocity-Verlet motion of independent atoms under the azimuthal force.

    Exploratory: masses are dimensionless and no trap, recoil heating or
    dipole force is included.  Atoms that come closer than ``1e-6 w`` to
    the axis are pushed back out to that radius with a warning.
    """
    if not dt > 0:
        raise DomainError(f"time step must be > 0, got {dt}")
    atoms = [a if isinstance(a, Atom) else Atom(*a) for a in atoms]
    pos = np.array([a.position for a in atoms], dtype=float).reshape(-1, 2)
    vel = np.array([a.velocity for a in atoms], dtype=float).reshape(-1, 2)
    masses = np.array([a.mass for a in atoms], dtype=float)
    if np.any(np.hypot(pos[:, 0], pos[:, 1]) <= 0):
        raise DomainError("all atoms need r > 0 at the start")
    if np.any(masses <= 0):
        raise DomainError("atom masses must be > 0")

    tau = torque_function(fields, probes, det, solver=solver)
    r_min = R_MIN * probes.waist
    clamped = 0

    pos_hist = [pos.copy()]
    vel_hist = [vel.copy()]
    acc = _azimuthal_accel(pos, masses, probes, tau)
    for _ in range(int(steps)):
        pos = pos + vel * dt + 0.5 * acc * dt**2
        clamped += _clamp(pos, r_min)
        acc_new = _azimuthal_accel(pos, masses, probes, tau)
        vel = vel + 0.5 * (acc + acc_new) * dt
        acc = acc_new
        pos_hist.append(pos.copy())
        vel_hist.append(vel.copy())

    positions = np.array(pos_hist)
    velocities = np.array(vel_hist)
    r = np.hypot(positions[..., 0], positions[..., 1])
    v_phi = (positions[..., 0] * velocities[..., 1] - positions[..., 1] * velocities[..., 0]) / r
    angle = np.unwrap(np.arctan2(positions[..., 1], positions[..., 0]), axis=0)
    return EnsembleTrajectory(
        times=dt * np.arange(int(steps) + 1),
        positions=positions,
        velocities=velocities,
        azimuthal_velocity=v_phi,
        angle=angle,
        angular_momentum=masses[None, :] * r * v_phi,
        tau=tau,
        clamped=clamped,
    )
