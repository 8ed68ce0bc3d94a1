"""``dt-torque`` command line: spectra, spatial maps, regime labels and time evolution.

Exit codes: 0 clean, 2 some rows are NaN, 3 invalid request, 4 timeout.
Values are resolved as built-in defaults < preset < ``--config`` JSON file
< explicit flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .dynamics import DEFAULT_T_MAX, DEFAULT_TOL, integrate_to_steady
from .errors import ConvergenceTimeout, DTTorqueError
from .model import ControlFieldSet, DetuningConfig, ProbeConfig
from .regime import classify
from .steady import solve_general
from .sweep import (
    AXES,
    DEFAULT_RANGE,
    FORMATS,
    PRESET_TABLE,
    InvalidRequest,
    SweepRequest,
    format_csv,
    parse_number,
    parse_phases,
    parse_range,
    preset,
    run_map,
    run_spectrum,
    serialize_map,
    serialize_spectrum,
)

log = logging.getLogger("dt_torque")

EXIT_OK = 0
EXIT_NAN = 2
EXIT_INVALID = 3
EXIT_TIMEOUT = 4

DEFAULTS = {
    "phases": (0.0, 0.0, 0.0, 0.0),
    "omega": 1.0,
    "probe_a": 0.1,
    "probe_b": 0.1,
    "delta": 0.0,
    "delta2": 1.0,
    "gamma": 1.0,
    "l": 1,
    "k": 1.0,
    "waist": 1.0,
    "range": DEFAULT_RANGE,
    "axis": "delta",
    "solver": "auto",
    "format": "csv",
    "out": None,
    "workers": 1,
    "r_range": (0.05, 2.5, 50),
    "azimuths": 8,
    "tol": DEFAULT_TOL,
    "t_max": DEFAULT_T_MAX,
    "trajectory": None,
}

_NUMERIC = ("omega", "probe_a", "probe_b", "delta", "delta2", "gamma", "k", "waist", "tol", "t_max")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("physical parameters")
    g.add_argument("--config", type=Path, help="JSON file with any of the options below")
    g.add_argument("--phases", help="control phases phi_A1,phi_B1,phi_A2,phi_B2 (radians, 'pi' allowed)")
    g.add_argument("--omega", help="common control amplitude (units of Gamma)")
    g.add_argument("--probe-a", dest="probe_a", help="probe A strength |Omega_A0|")
    g.add_argument("--probe-b", dest="probe_b", help="probe B strength |Omega_B0|")
    g.add_argument("--delta", help="probe detuning Delta")
    g.add_argument("--delta2", help="two-photon detuning delta")
    g.add_argument("--gamma", help="excited-state decay rate")
    g.add_argument("--l", type=int, help="OAM charge of the probes")
    g.add_argument("--k", help="probe wave number (units 1/w)")
    g.add_argument("--waist", help="beam waist")
    g.add_argument("--solver", choices=("closed", "general", "auto"))
    o = p.add_argument_group("output")
    o.add_argument("--out", type=Path, help="output file (default: stdout)")
    o.add_argument("--format", choices=FORMATS)
    o.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="dt-torque", description="Phase-controlled optical torque in a double-tripod atom.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("spectrum", parents=[common], help="sweep the torque function")
    sp.add_argument("--axis", choices=AXES)
    sp.add_argument("--range", help="lo:hi:n (default -6:6:1201)")
    sp.add_argument("--workers", type=int)

    pp = sub.add_parser("preset", parents=[common], help="sweep for one figure preset")
    pp.add_argument("id", choices=sorted(PRESET_TABLE))
    pp.add_argument("--range", help="lo:hi:n (default -6:6:1201)")
    pp.add_argument("--workers", type=int)

    mp = sub.add_parser("map", parents=[common], help="force and torque on a polar grid")
    mp.add_argument("--r-range", dest="r_range", help="lo:hi:n radii, all > 0 (default 0.05:2.5:50)")
    mp.add_argument("--azimuths", type=int, help="number of azimuth samples in [0, 2pi)")

    sub.add_parser("classify", parents=[common], help="print the coupling regime as JSON")

    ep = sub.add_parser("evolve", parents=[common], help="integrate to steady state")
    ep.add_argument("--tol", help="convergence threshold on max|drho/dt|/Gamma")
    ep.add_argument("--t-max", dest="t_max", help="give up after this time (units 1/Gamma)")
    ep.add_argument("--trajectory", type=Path, help="write the trajectory as CSV")
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidRequest(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidRequest(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace, base: dict | None = None) -> dict:
    """Merge defaults, preset values, config file and flags into typed settings."""
    merged = dict(DEFAULTS)
    merged.update(base or {})
    merged.update(_load_config(getattr(args, "config", None)))
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config", "id", "verbose"):
            merged[key] = value

    out = dict(merged)
    out["phases"] = parse_phases(merged["phases"])
    for key in _NUMERIC:
        v = merged[key]
        out[key] = parse_number(v) if isinstance(v, str) else float(v)
    for key in ("range", "r_range"):
        out[key] = parse_range(merged[key])
    for key in ("l", "azimuths", "workers"):
        out[key] = int(merged[key])
    return out


def _physics(cfg: dict):
    fields = ControlFieldSet.equal(cfg["omega"], cfg["phases"])
    probes = ProbeConfig(cfg["probe_a"], cfg["probe_b"], l=cfg["l"], k=cfg["k"], waist=cfg["waist"])
    det = DetuningConfig(delta=cfg["delta"], delta2=cfg["delta2"], gamma=cfg["gamma"])
    return fields, probes, det


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        log.info("wrote %s", out)


def _spectrum(cfg: dict) -> int:
    fields, probes, det = _physics(cfg)
    lo, hi, n = cfg["range"]
    req = SweepRequest(
        axis=cfg["axis"], start=lo, stop=hi, count=n, fields=fields, probes=probes, det=det,
        fmt=cfg["format"], solver=cfg["solver"], workers=cfg["workers"],
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spec = run_spectrum(req)
    _emit(serialize_spectrum(spec, req.fmt), cfg["out"])
    for msg in spec.failures:
        print(f"warning: NaN row, {msg}", file=sys.stderr)
    return EXIT_NAN if spec.failures else EXIT_OK


def _preset_base(identifier: str) -> dict:
    req = preset(identifier).request
    return {
        "phases": req.fields.phases,
        "omega": req.fields.omega,
        "probe_a": req.probes.amp_a,
        "probe_b": req.probes.amp_b,
        "l": req.probes.l,
        "k": req.probes.k,
        "waist": req.probes.waist,
        "delta2": req.det.delta2,
        "gamma": req.det.gamma,
        "range": (req.start, req.stop, req.count),
        "axis": req.axis,
    }


def _map(cfg: dict) -> int:
    fields, probes, det = _physics(cfg)
    lo, hi, n = cfg["r_range"]
    if n < 1 or lo <= 0 or hi < lo:
        raise InvalidRequest(f"radius grid must satisfy 0 < lo <= hi and n >= 1, got {cfg['r_range']}")
    if cfg["azimuths"] < 1:
        raise InvalidRequest("need at least one azimuth sample")
    radii = np.linspace(lo, hi, n)
    azimuths = 2 * math.pi * np.arange(cfg["azimuths"]) / cfg["azimuths"]
    rows = run_map(fields, probes, det, radii, azimuths, solver=cfg["solver"])
    params = {"r_range": list(cfg["r_range"]), "azimuths": cfg["azimuths"], "z": 0.0,
              "phases": list(fields.phases), "omega": fields.omega, "probe_a": probes.amp_a,
              "probe_b": probes.amp_b, "l": probes.l, "k": probes.k, "waist": probes.waist,
              "delta": det.delta, "delta2": det.delta2, "gamma": det.gamma}
    _emit(serialize_map(rows, cfg["format"], params), cfg["out"])
    return EXIT_OK


def _classify(cfg: dict) -> int:
    fields, _, det = _physics(cfg)
    report = classify(fields, det)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", cfg["out"])
    return EXIT_OK


def _state_dict(state) -> dict:
    return {name: [float(z.real), float(z.imag)]
            for name, z in zip(("rho_a", "rho_b", "rho_1", "rho_2"), state.as_vector())}


def _evolve(cfg: dict) -> int:
    fields, probes, det = _physics(cfg)
    try:
        traj = integrate_to_steady(fields, probes, det, tol=cfg["tol"], t_max=cfg["t_max"])
    except ConvergenceTimeout as exc:
        print(f"error: {exc}", file=sys.stderr)
        report = {"converged": False, "t": exc.t, "metric": exc.metric, "final": _state_dict(exc.state)}
        _emit(json.dumps(report, indent=2) + "\n", cfg["out"])
        return EXIT_TIMEOUT

    final = traj.final
    try:
        ref = solve_general(fields, probes, det)
        deviation = float(np.max(np.abs(final.as_vector() - ref.as_vector())))
    except DTTorqueError as exc:
        log.warning("no steady-state reference: %s", exc)
        deviation = None
    report = {
        "converged": True,
        "t": traj.converged_at,
        "metric": float(traj.metric[-1]),
        "tol": traj.tol,
        "final": _state_dict(final),
        "deviation_from_steady_state": deviation,
    }
    _emit(json.dumps(report, indent=2) + "\n", cfg["out"])
    if cfg["trajectory"] is not None:
        header = ("t", "re_rho_a", "im_rho_a", "re_rho_b", "im_rho_b",
                  "re_rho_1", "im_rho_1", "re_rho_2", "im_rho_2")
        rows = [(t, *np.column_stack([s.real, s.imag]).ravel()) for t, s in zip(traj.times, traj.states)]
        _emit(format_csv(header, rows), Path(cfg["trajectory"]))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error (exit code 3)
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "preset":
            cfg = resolve(args, _preset_base(args.id))
            return _spectrum(cfg)
        cfg = resolve(args)
        handler = {"spectrum": _spectrum, "map": _map, "classify": _classify, "evolve": _evolve}
        return handler[args.command](cfg)
    except (InvalidRequest, DTTorqueError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
