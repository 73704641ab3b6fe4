import json
import os
import sys
from pathlib import Path

import pytest
from hypothesis import settings

from siegellab.linearization import linearize
from siegellab.rotation import RotationNumber

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def regression():
    with open(FIXTURES / "regression.json") as fh:
        data = json.load(fh)
    return data


@pytest.fixture(scope="session")
def golden():
    return RotationNumber.golden()


@pytest.fixture(scope="session")
def golden_series(golden):
    cache = {}

    def get(N):
        if N not in cache:
            cache[N] = linearize(golden, N)
        return cache[N]
    return get


CRITERIA = {
    1: "functional-equation certificate",
    2: "radius sanity and stability",
    3: "round-circle pinch",
    4: "C1 perturbation bound",
    5: "Holder estimator calibration",
    6: "ellipse family Hausdorff convergence",
    7: "radius depression monotonicity",
    8: "perturbation trace contract",
    9: "CLI determinism",
}


def pytest_terminal_summary(terminalreporter):
    outcome = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            if key == "passed" and rep.when != "call":
                continue
            n = int(nodeid.split("test_criterion_")[1].split("_")[0])
            ok = key == "passed"
            outcome[n] = outcome.get(n, True) and ok
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n in outcome:
            status = "PASS" if outcome[n] else "FAIL"
            terminalreporter.write_line(f"criterion {n} [{status}] {CRITERIA[n]}")
