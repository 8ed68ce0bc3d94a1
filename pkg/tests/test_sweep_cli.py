import json
import math
import warnings

import numpy as np
import pytest

from dt_torque import ControlFieldSet, DetuningConfig, ProbeConfig, SweepRequest, preset, run_spectrum, solve_general
from dt_torque.cli import main
from dt_torque.model import reduce_phases
from dt_torque.sweep import (
    PRESET_TABLE,
    InvalidRequest,
    parse_number,
    parse_phases,
    parse_range,
    serialize_spectrum,
)

from conftest import FIG2A_TAU

PI = math.pi

# Hand-encoded from the figure captions: control phases, (phi, theta), delta.
CAPTIONS = {
    "fig2a": ((PI, 0, 0, 0), (PI, 0), 1),
    "fig2b": ((PI, 0, 0, 0), (PI, 0), 2),
    "fig2c": ((PI, 0, 0, 0), (PI, 0), 3),
    "fig2d": ((PI, 0, 0, 0), (PI, 0), -1),
    "fig2e": ((PI, 0, 0, 0), (PI, 0), -2),
    "fig2f": ((PI, 0, 0, 0), (PI, 0), -3),
    "fig3a": ((PI / 2, 0, 0, PI / 2), (PI, -PI / 2), 1),
    "fig3b": ((PI / 6, 0, 0, 5 * PI / 6), (PI, -5 * PI / 6), 1),
    "fig3c": ((PI / 3, 0, 0, 2 * PI / 3), (PI, -2 * PI / 3), 1),
    "fig3d": ((5 * PI / 6, 0, 0, PI / 6), (PI, -PI / 6), 1),
    "fig4a": ((0, 0, 0, 0), (0, 0), 1),
    "fig4b": ((0, 0, 0, 0), (0, 0), 2),
    "fig4c": ((0, 0, 0, 0), (0, 0), 3),
    "fig4d": ((0, 0, 0, 0), (0, 0), 4),
    "fig5a": ((PI / 6, 0, 0, 0), (PI / 6, 0), 1),
    "fig5b": ((PI / 4, 0, 0, 0), (PI / 4, 0), 1),
    "fig5c": ((PI / 2, 0, 0, 0), (PI / 2, 0), 1),
    "fig5d": ((5 * PI / 6, 0, 0, 0), (5 * PI / 6, 0), 1),
    "fig6a": ((PI, 0, 0, 0), (PI, 0), 0),
    "fig6b": ((0, 0, 0, 0), (0, 0), 0),
}


def quiet_spectrum(req):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_spectrum(req)


class TestParsing:
    @pytest.mark.parametrize(
        "text, value",
        [("pi", PI), ("-pi/2", -PI / 2), ("5pi/6", 5 * PI / 6), ("pi/6", PI / 6), ("0.25", 0.25),
         ("2*pi", 2 * PI), ("1e-3", 1e-3), (" PI ", PI)],
    )
    def test_numbers(self, text, value):
        assert parse_number(text) == pytest.approx(value, rel=1e-15)

    @pytest.mark.parametrize("text", ["", "pie", "__import__('os')", "1/0", "1e400", "2**3", "[1]"])
    def test_rejected(self, text):
        with pytest.raises(InvalidRequest):
            parse_number(text)

    def test_phases(self):
        assert parse_phases("pi,0,0,pi/2") == (PI, 0.0, 0.0, PI / 2)
        with pytest.raises(InvalidRequest):
            parse_phases("pi,0,0")

    def test_range(self):
        assert parse_range("-6:6:1201") == (-6.0, 6.0, 1201)
        assert parse_range("-pi:pi:5") == (-PI, PI, 5)
        for bad in ("0:1", "0:1:x", "0:1:2:3"):
            with pytest.raises(InvalidRequest):
                parse_range(bad)


class TestPresets:
    def test_table_matches_captions(self):
        assert set(PRESET_TABLE) == set(CAPTIONS)
        for identifier, (phases, (phi, theta), delta2) in CAPTIONS.items():
            req = preset(identifier).request
            np.testing.assert_allclose(req.fields.phases, phases, atol=1e-15)
            assert req.fields.amplitudes == (1.0,) * 4
            assert (req.probes.amp_a, req.probes.amp_b) == (0.1, 0.1)
            assert req.det.delta2 == delta2 and req.det.gamma == 1.0
            got_phi, got_theta = reduce_phases(req.fields)
            assert got_phi == pytest.approx(phi, abs=1e-12)
            assert got_theta == pytest.approx(theta, abs=1e-12)
            assert (req.axis, req.start, req.stop, req.count) == ("delta", -6.0, 6.0, 1201)

    def test_unknown(self):
        with pytest.raises(InvalidRequest):
            preset("fig7a")

    def test_override(self):
        assert preset("fig2a", count=11).request.count == 11


class TestSpectrum:
    def test_spot_value_on_default_grid(self):
        spec = quiet_spectrum(preset("fig2a").request)
        i = int(np.argmin(np.abs(spec.values)))
        assert spec.values[i] == 0.0
        assert spec.tau[i] == pytest.approx(FIG2A_TAU, abs=1e-15)

    def test_nan_rows_are_kept(self):
        req = preset("fig6b", count=5).request
        with pytest.warns(UserWarning, match="NaN"):
            spec = run_spectrum(req)
        assert len(spec.values) == 5
        assert np.isnan(spec.tau[2]) and np.all(np.isfinite(np.delete(spec.tau, 2)))
        assert len(spec.failures) == 1 and "delta=0.0" in spec.failures[0]

    def test_workers_preserve_order(self):
        req = preset("fig3b", count=301).request
        serial = serialize_spectrum(quiet_spectrum(req))
        pooled = serialize_spectrum(quiet_spectrum(SweepRequest(**{**req.__dict__, "workers": 4})))
        assert serial == pooled

    @pytest.mark.parametrize("axis", ["phi", "theta", "delta2"])
    def test_other_axes(self, axis):
        base = preset("fig2a").request
        req = SweepRequest(axis=axis, start=-2.0, stop=2.0, count=9, fields=base.fields,
                           probes=base.probes, det=base.det.replace(delta=0.5))
        spec = quiet_spectrum(req)
        fields, det = req.point(spec.values[3])
        state = solve_general(fields, req.probes, det)
        assert spec.tau[3] == pytest.approx(0.1 * state.rho_a.imag + 0.1 * state.rho_b.imag, rel=1e-10)
        if axis == "phi":
            assert reduce_phases(fields)[0] == pytest.approx(spec.values[3])

    @pytest.mark.parametrize(
        "changes",
        [{"start": 1.0, "stop": 1.0}, {"count": 1}, {"axis": "omega"}, {"fmt": "xml"},
         {"solver": "magic"}, {"workers": 0},
         {"solver": "closed", "fields": ControlFieldSet((1, 2, 1, 1), (0,) * 4)}],
    )
    def test_invalid_requests(self, changes):
        with pytest.raises(InvalidRequest):
            run_spectrum(SweepRequest(**changes))

    def test_csv_is_deterministic(self):
        req = preset("fig5c", count=41).request
        a = serialize_spectrum(quiet_spectrum(req))
        b = serialize_spectrum(quiet_spectrum(req))
        assert a == b
        lines = a.split("\n")
        assert lines[0] == "delta,tau,im_rho_a,im_rho_b,re_rho_a,re_rho_b"
        assert lines[-1] == "" and "\r" not in a
        assert len(lines) == 43
        assert float(lines[1].split(",")[0]) == -6.0

    def test_json_layout(self):
        spec = quiet_spectrum(preset("fig6b", count=3).request)
        doc = json.loads(serialize_spectrum(spec, "json"))
        assert doc["params"]["delta2"] == 0.0 and doc["params"]["axis"] == "delta"
        assert [row["delta"] for row in doc["rows"]] == [-6.0, 0.0, 6.0]
        assert doc["rows"][1]["tau"] is None


class TestCli:
    def test_preset_csv_to_file(self, tmp_path):
        out = tmp_path / "fig2a.csv"
        assert main(["preset", "fig2a", "--range=-1:1:5", "--out", str(out)]) == 0
        rows = out.read_text().splitlines()
        assert rows[0].startswith("delta,tau")
        assert float(rows[3].split(",")[1]) == pytest.approx(FIG2A_TAU, abs=1e-15)

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        args = ["spectrum", "--phases", "pi/2,0,0,pi/2", "--delta2", "1", "--range=-3:3:61"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b), "--workers", "3"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_nan_rows_exit_code(self, capsys):
        assert main(["preset", "fig6b", "--range=-1:1:3"]) == 2
        captured = capsys.readouterr()
        assert "nan" in captured.out.splitlines()[2]
        assert "NaN row" in captured.err

    @pytest.mark.parametrize(
        "argv",
        [
            ["spectrum", "--range=1:0:5"],
            ["spectrum", "--phases", "pi,0"],
            ["spectrum", "--omega", "abc"],
            ["spectrum", "--axis", "gamma"],
            ["preset", "fig9z"],
            ["map", "--r-range=0:1:5"],
            ["classify", "--omega", "0"],
            ["evolve", "--tol", "-1"],
        ],
    )
    def test_invalid_exit_code(self, argv, capsys):
        assert main(argv) == 3

    def test_no_subcommand(self, capsys):
        assert main([]) == 3
        assert "usage" in capsys.readouterr().err

    def test_help(self, capsys):
        assert main(["--help"]) == 0

    def test_config_file_and_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"phases": "pi,0,0,0", "delta2": 0.0}))
        assert main(["classify", "--config", str(cfg)]) == 0
        assert json.loads(capsys.readouterr().out)["label"] == "DecoupledLambdas"
        assert main(["classify", "--config", str(cfg), "--delta2", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["label"] == "CoupledLambda"

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        assert main(["classify", "--config", str(cfg)]) == 3
        assert main(["classify", "--config", str(tmp_path / "missing.json")]) == 3

    def test_json_spectrum(self, capsys):
        assert main(["spectrum", "--format", "json", "--phases", "0,0,0,0", "--delta2", "2",
                     "--delta", "0.5", "--axis", "delta2", "--range=1:3:3"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["params"]["axis"] == "delta2"
        assert [r["delta2"] for r in doc["rows"]] == [1.0, 2.0, 3.0]

    def test_map(self, capsys):
        assert main(["map", "--phases", "pi,0,0,0", "--r-range=0.2:1.0:3", "--azimuths", "4"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "r,azimuth,F_phi,F_z,T_z"
        rows = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
        assert rows.shape == (12, 5)
        np.testing.assert_allclose(rows[:, 0] * rows[:, 2], rows[:, 4], rtol=1e-12)
        assert np.all(rows[:4, 2:] == rows[0, 2:])

    def test_evolve_reports_deviation(self, tmp_path, capsys):
        traj = tmp_path / "traj.csv"
        assert main(["evolve", "--phases", "pi,0,0,0", "--delta2", "1", "--trajectory", str(traj)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["converged"] is True
        assert report["deviation_from_steady_state"] < 1e-7
        assert report["final"]["rho_a"][1] == pytest.approx(0.2 / 17, abs=1e-7)
        assert traj.read_text().startswith("t,re_rho_a,im_rho_a")

    def test_evolve_zero_probes(self, capsys):
        assert main(["evolve", "--probe-a", "0", "--probe-b", "0"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["t"] == 0.0 and report["final"]["rho_a"] == [0.0, 0.0]

    def test_evolve_timeout(self, capsys):
        assert main(["evolve", "--phases", "pi,0,0,0", "--gamma", "1e-6", "--t-max", "100"]) == 4
        captured = capsys.readouterr()
        assert json.loads(captured.out)["converged"] is False
        assert "no steady state" in captured.err

    def test_default_classification(self, capsys):
        assert main(["classify", "-v"]) == 0
        assert json.loads(capsys.readouterr().out)["label"] == "DoubleLambda"


def test_probe_config_round_trip_through_preset():
    req = preset("fig4c").request
    assert req.probes == ProbeConfig(0.1, 0.1, l=1, k=1.0, waist=1.0)
    assert req.det == DetuningConfig(0.0, 3.0, 1.0)
