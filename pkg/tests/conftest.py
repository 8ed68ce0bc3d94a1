"""Shared fixtures and the per-criterion acceptance report."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dt_torque import ControlFieldSet, DetuningConfig, ProbeConfig

# Hand-evaluated phi = pi case at Omega = Gamma = delta = 1, probes 0.1, Delta = 0:
# rho_A = rho_B = (0.2i - 0.8)/17 and tau = 2 * 0.1 * 0.2/17.
FIG2A_RHO = (0.2j - 0.8) / 17
FIG2A_TAU = 0.04 / 17


@pytest.fixture
def fig2a():
    fields = ControlFieldSet.equal(1.0, (math.pi, 0.0, 0.0, 0.0))
    probes = ProbeConfig(0.1, 0.1, l=1, k=1.0, waist=1.0)
    det = DetuningConfig(delta=0.0, delta2=1.0, gamma=1.0)
    return fields, probes, det


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_RESULTS: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    number, title = marker
    entry = _RESULTS.setdefault(number, {"title": title, "ok": True, "seen": False})
    if report.when == "call":
        entry["seen"] = True
    if report.failed or (report.when == "setup" and report.skipped):
        entry["ok"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result().acceptance = tuple(marker.args[:2])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "PASS" if entry["ok"] and entry["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {entry['title']}")
