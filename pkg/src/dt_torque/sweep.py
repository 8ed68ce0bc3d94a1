"""Parameter sweeps, spatial maps, figure presets and their serialisation."""

from __future__ import annotations

import ast
import json
import math
import operator
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DTTorqueError
from .mechanics import TorqueSpectrum, force, torque, torque_function
from .model import ControlFieldSet, DetuningConfig, ProbeConfig, SpatialPoint, reduce_phases
from .steady import Solver, solve

AXES = ("delta", "phi", "theta", "delta2")
FORMATS = ("csv", "json")
DEFAULT_RANGE = (-6.0, 6.0, 1201)
SPECTRUM_COLUMNS = ("tau", "im_rho_a", "im_rho_b", "re_rho_a", "re_rho_b")
MAP_COLUMNS = ("r", "azimuth", "F_phi", "F_z", "T_z")


class InvalidRequest(DTTorqueError, ValueError):
    """A sweep request or command-line value cannot be honoured."""


# ---------------------------------------------------------------------------
# Parsing of phase expressions such as "pi", "-pi/2", "5pi/6", "0.25"
# ---------------------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    raise ValueError("unsupported expression")


def parse_number(text: str) -> float:
    """Evaluate a real number that may contain ``pi`` (``5pi/6`` means ``5*pi/6``)."""
    src = re.sub(r"(\d)\s*(pi)", r"\1*\2", str(text).strip().lower())
    try:
        value = _eval_node(ast.parse(src, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise InvalidRequest(f"cannot parse number {text!r}") from exc
    if not math.isfinite(value):
        raise InvalidRequest(f"number {text!r} is not finite")
    return value


def parse_phases(text) -> tuple[float, float, float, float]:
    """Parse ``a,b,c,d`` (order ``phi_A1, phi_B1, phi_A2, phi_B2``)."""
    parts = text.split(",") if isinstance(text, str) else list(text)
    if len(parts) != 4:
        raise InvalidRequest(f"need four comma-separated phases, got {text!r}")
    return tuple(parse_number(p) if isinstance(p, str) else float(p) for p in parts)


def parse_range(text) -> tuple[float, float, int]:
    """Parse ``lo:hi:n``."""
    parts = text.split(":") if isinstance(text, str) else list(text)
    if len(parts) != 3:
        raise InvalidRequest(f"range must look like lo:hi:n, got {text!r}")
    lo = parse_number(parts[0]) if isinstance(parts[0], str) else float(parts[0])
    hi = parse_number(parts[1]) if isinstance(parts[1], str) else float(parts[1])
    try:
        n = int(parts[2])
    except ValueError as exc:
        raise InvalidRequest(f"point count must be an integer, got {parts[2]!r}") from exc
    return lo, hi, n


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRequest:
    """One-dimensional sweep of the torque function."""

    axis: str = "delta"
    start: float = DEFAULT_RANGE[0]
    stop: float = DEFAULT_RANGE[1]
    count: int = DEFAULT_RANGE[2]
    fields: ControlFieldSet = field(default_factory=lambda: ControlFieldSet.equal(1.0))
    probes: ProbeConfig = field(default_factory=ProbeConfig)
    det: DetuningConfig = field(default_factory=DetuningConfig)
    fmt: str = "csv"
    solver: str = "auto"
    workers: int = 1

    def validate(self) -> None:
        if self.axis not in AXES:
            raise InvalidRequest(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.fmt not in FORMATS:
            raise InvalidRequest(f"format must be one of {FORMATS}, got {self.fmt!r}")
        try:
            solver = Solver(self.solver)
        except ValueError as exc:
            raise InvalidRequest(f"unknown solver {self.solver!r}") from exc
        if self.count < 2:
            raise InvalidRequest(f"need at least 2 sweep points, got {self.count}")
        if not self.start < self.stop:
            raise InvalidRequest(f"need start < stop, got {self.start} >= {self.stop}")
        if self.workers < 1:
            raise InvalidRequest(f"workers must be >= 1, got {self.workers}")
        if solver is Solver.CLOSED and not self.fields.equal_amplitudes:
            raise InvalidRequest("the closed-form solver needs four equal control amplitudes")

    def axis_values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def point(self, value: float) -> tuple[ControlFieldSet, DetuningConfig]:
        """Fields and detunings at one sweep coordinate."""
        if self.axis == "delta":
            return self.fields, self.det.replace(delta=value)
        if self.axis == "delta2":
            return self.fields, self.det.replace(delta2=value)
        if self.axis == "phi":
            return self.fields.with_relative_phases(phi=value), self.det
        return self.fields.with_relative_phases(theta=value), self.det

    def params(self) -> dict:
        phi, theta = reduce_phases(self.fields)
        return {
            "axis": self.axis,
            "range": [self.start, self.stop, self.count],
            "control_amplitudes": list(self.fields.amplitudes),
            "control_phases": list(self.fields.phases),
            "phi": phi,
            "theta": theta,
            "probe_a": self.probes.amp_a,
            "probe_b": self.probes.amp_b,
            "l": self.probes.l,
            "k": self.probes.k,
            "waist": self.probes.waist,
            "delta": self.det.delta,
            "delta2": self.det.delta2,
            "gamma": self.det.gamma,
            "solver": self.solver,
        }


def _spectrum_point(req: SweepRequest, value: float):
    fields, det = req.point(value)
    try:
        state = solve(fields, req.probes, det, req.solver)
    except DTTorqueError as exc:
        return (math.nan,) * 5, f"{req.axis}={float(value)!r}: {exc}"
    tau = req.probes.amp_a * state.rho_a.imag + req.probes.amp_b * state.rho_b.imag
    return (tau, state.rho_a.imag, state.rho_b.imag, state.rho_a.real, state.rho_b.real), None


def run_spectrum(req: SweepRequest) -> TorqueSpectrum:
    """Evaluate the torque function along the request's axis.

    Points where the chosen solver fails become NaN rows and are listed in
    ``failures``; nothing is dropped.  Rows come back in axis order
    whatever the number of workers.
    """
    req.validate()
    values = req.axis_values()
    if req.workers == 1:
        results = [_spectrum_point(req, v) for v in values]
    else:
        with ThreadPoolExecutor(max_workers=req.workers) as pool:
            results = list(pool.map(lambda v: _spectrum_point(req, v), values))
    table = np.array([r for r, _ in results], dtype=float).reshape(len(values), 5)
    failures = [msg for _, msg in results if msg is not None]
    for msg in failures:
        warnings.warn(f"solver failed, row set to NaN: {msg}", stacklevel=2)
    return TorqueSpectrum(
        axis=req.axis,
        values=values,
        tau=table[:, 0],
        im_rho_a=table[:, 1],
        im_rho_b=table[:, 2],
        re_rho_a=table[:, 3],
        re_rho_b=table[:, 4],
        params=req.params(),
        failures=failures,
    )


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.17g}"


def _json_num(x: float):
    return None if math.isnan(x) else float(x)


def spectrum_rows(spec: TorqueSpectrum):
    cols = (spec.values, spec.tau, spec.im_rho_a, spec.im_rho_b, spec.re_rho_a, spec.re_rho_b)
    return list(zip(*(c.tolist() for c in cols)))


def format_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(float(x)) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def format_json(header, rows, params: dict) -> str:
    doc = {
        "params": params,
        "rows": [{k: _json_num(float(x)) for k, x in zip(header, row)} for row in rows],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def serialize_spectrum(spec: TorqueSpectrum, fmt: str = "csv") -> str:
    header = (spec.axis,) + SPECTRUM_COLUMNS
    rows = spectrum_rows(spec)
    if fmt == "json":
        return format_json(header, rows, spec.params)
    return format_csv(header, rows)


# ---------------------------------------------------------------------------
# Spatial maps
# ---------------------------------------------------------------------------


def run_map(fields: ControlFieldSet, probes: ProbeConfig, det: DetuningConfig,
            r_values, azimuth_values, solver: str = "auto") -> list[tuple[float, ...]]:
    """Rows ``(r, azimuth, F_phi, F_z, T_z)`` on a polar grid in the waist plane.

    The force and torque depend on radius only, so each radius is solved
    once and repeated over the azimuth grid.
    """
    r_values = np.asarray(r_values, dtype=float)
    if r_values.size == 0 or np.any(r_values <= 0):
        raise InvalidRequest("map radii must be strictly positive")
    tau = torque_function(fields, probes, det, solver=solver)
    rows = []
    for r in r_values:
        sample = force(fields, probes, det, SpatialPoint(float(r)), solver=solver)
        t_z = torque(fields, probes, det, SpatialPoint(float(r)), tau=tau)
        for az in azimuth_values:
            rows.append((float(r), float(az), sample.f_phi, sample.f_z, t_z))
    return rows


def serialize_map(rows, fmt: str = "csv", params: dict | None = None) -> str:
    if fmt == "json":
        return format_json(MAP_COLUMNS, rows, params or {})
    return format_csv(MAP_COLUMNS, rows)


# ---------------------------------------------------------------------------
# Figure presets
# ---------------------------------------------------------------------------

PI = math.pi

# id -> (phases (phi_A1, phi_B1, phi_A2, phi_B2), two-photon detuning)
PRESET_TABLE: dict[str, tuple[tuple[float, float, float, float], float]] = {
    "fig2a": ((PI, 0, 0, 0), 1.0),
    "fig2b": ((PI, 0, 0, 0), 2.0),
    "fig2c": ((PI, 0, 0, 0), 3.0),
    "fig2d": ((PI, 0, 0, 0), -1.0),
    "fig2e": ((PI, 0, 0, 0), -2.0),
    "fig2f": ((PI, 0, 0, 0), -3.0),
    "fig3a": ((PI / 2, 0, 0, PI / 2), 1.0),
    "fig3b": ((PI / 6, 0, 0, 5 * PI / 6), 1.0),
    "fig3c": ((PI / 3, 0, 0, 2 * PI / 3), 1.0),
    "fig3d": ((5 * PI / 6, 0, 0, PI / 6), 1.0),
    "fig4a": ((0, 0, 0, 0), 1.0),
    "fig4b": ((0, 0, 0, 0), 2.0),
    "fig4c": ((0, 0, 0, 0), 3.0),
    "fig4d": ((0, 0, 0, 0), 4.0),
    "fig5a": ((PI / 6, 0, 0, 0), 1.0),
    "fig5b": ((PI / 4, 0, 0, 0), 1.0),
    "fig5c": ((PI / 2, 0, 0, 0), 1.0),
    "fig5d": ((5 * PI / 6, 0, 0, 0), 1.0),
    "fig6a": ((PI, 0, 0, 0), 0.0),
    "fig6b": ((0, 0, 0, 0), 0.0),
}

PRESET_OMEGA = 1.0
PRESET_PROBE = 0.1


@dataclass(frozen=True)
class FigurePreset:
    identifier: str
    request: SweepRequest


def preset(identifier: str, **overrides) -> FigurePreset:
    """Materialise a figure preset as a sweep over the probe detuning."""
    try:
        phases, delta2 = PRESET_TABLE[identifier]
    except KeyError as exc:
        raise InvalidRequest(f"unknown preset {identifier!r}; choose from {sorted(PRESET_TABLE)}") from exc
    req = SweepRequest(
        axis="delta",
        fields=ControlFieldSet.equal(PRESET_OMEGA, phases),
        probes=ProbeConfig(PRESET_PROBE, PRESET_PROBE, l=1, k=1.0, waist=1.0),
        det=DetuningConfig(delta=0.0, delta2=delta2, gamma=1.0),
    )
    if overrides:
        req = replace(req, **overrides)
    return FigurePreset(identifier, req)


def presets() -> list[FigurePreset]:
    return [preset(name) for name in PRESET_TABLE]

