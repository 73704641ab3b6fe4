"""Acceptance criteria, one test per criterion.

A pass/fail line per criterion is printed at the end of the pytest run.
"""
import json
import math
import time

import numpy as np
import pytest

from oracles import all_pinch_extremes, all_separation_exponent
from siegellab.cli import main, manifest_path
from siegellab.curvegeom import (check_c1_stability, hausdorff_distance, holder_exponent,
                                 pinch_profile, quasicircle_constant, separation_floor,
                                 sup_norm_distance)
from siegellab.curves import (SampledCurve, circle, dumbbell, ellipse, koch_snowflake,
                              write_curve_csv)
from siegellab.hexfloat import hex_to_float
from siegellab.linearization import linearize, residual
from siegellab.rotation import RotationNumber, bounded_type_approximant, parse_theta


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_criterion_1_functional_equation_certificate():
    with Timer() as t:
        s = linearize(RotationNumber.golden(), 1000)
        res = residual(s, 0.5 * s.radius_estimate, 256)
        # double-equivalent working precision
        g53 = RotationNumber.golden(53)
        s53 = linearize(g53, 1000, guard_bits=0)
        res53 = residual(s53, 0.5 * s53.radius_estimate, 256)
    assert res < 1e-10 and res53 < 1e-10
    assert t.seconds < 10


@pytest.mark.parametrize("spec", ["golden", "cf:[]+tail:2"], ids=["golden", "silver"])
def test_criterion_2_radius_sanity_and_stability(spec):
    theta = parse_theta(spec)
    with Timer() as t:
        r2 = linearize(theta, 2000).radius_estimate
        r4 = linearize(theta, 4000).radius_estimate
    assert 0 < r2 < 4 and 0 < r4 < 4
    assert abs(r2 - r4) / r4 < 1e-2
    assert t.seconds < 60


def test_criterion_3_round_circle_pinch():
    with Timer() as t:
        c = circle(1024)
        est = quasicircle_constant(c)
        lo, hi = all_pinch_extremes(c.points)
        reports, exhaustive = pinch_profile(c)
    assert est.exhaustive and exhaustive
    assert abs(est.K - 1) < 1e-3
    assert abs(lo - 1) < 1e-3 and abs(hi - 1) < 1e-3
    assert all(abs(r.pinch - 1) < 1e-3 for r in reports)
    assert t.seconds < 30


def test_criterion_4_c1_perturbation_bound():
    rng = np.random.default_rng(20240601)
    M = 512
    with Timer() as t:
        f = circle(M)
        K = quasicircle_constant(f).K
        tt = f.params
        for _ in range(100):
            center, width = rng.uniform(0, 1), rng.uniform(0.05, 0.25)
            amp, phase = rng.uniform(1e-3, 3e-2), rng.uniform(-math.pi / 2, math.pi / 2)
            d = (tt - center + 0.5) % 1 - 0.5
            bump = amp * np.exp(-(d / width) ** 2) * np.exp(1j * (2 * np.pi * tt + phase))
            g = SampledCurve(f.points + bump)
            eta = sup_norm_distance(f, g)
            _, mu = separation_floor(f, eta)
            assert eta < mu / 4
            res = check_c1_stability(f, g, K)
            assert res.K_prime == pytest.approx(K * (mu + 2 * eta) / (mu - 2 * eta))
            assert quasicircle_constant(g).K <= res.K_prime + 1e-3
            assert res.holds
    assert t.seconds < 60


def test_criterion_5_holder_calibration():
    with Timer() as t:
        c = circle(4096)
        alpha_circle = holder_exponent(c, 4 / c.M, 0.1).alpha
        k = koch_snowflake(6)
        probe = holder_exponent(k, 4 / k.M, 0.25)
        brute = all_separation_exponent(k.points, 4, k.M // 4)
    assert 0.95 <= alpha_circle <= 1.05
    assert abs(probe.alpha - brute) < 0.05
    assert t.seconds < 30


def test_criterion_6_ellipse_family_converges():
    with Timer() as t:
        unit = circle(1024)
        family = [ellipse(1 + 1 / n, 1.0, 1024) for n in (2, 4, 8, 16, 32)]
        dists = [hausdorff_distance(e, unit) for e in family]
        Ks = [quasicircle_constant(e).K for e in family]
    assert all(a > b for a, b in zip(dists, dists[1:]))
    assert max(Ks) < 2
    assert t.seconds < 10


def test_criterion_7_radius_depression(regression):
    golden = RotationNumber.golden()
    with Timer() as t:
        radii = [linearize(bounded_type_approximant(golden, 5, A), 2000).radius_estimate
                 for A in (10, 100, 1000)]
    assert radii[0] > radii[1] > radii[2]
    assert radii == [float.fromhex(regression[f"approx_cut5_A{A}_N2000"])
                     for A in (10, 100, 1000)]
    assert t.seconds < 120


def _config(path, **kw):
    cfg = {"theta": "golden", "r1_fraction": 0.02, "r2_fraction": 0.9, "K": 2.0,
           "epsilon": 0.2, "cut_range": [2, 3], "tail_entries": [100, 1000]}
    cfg.update(kw)
    path.write_text(json.dumps(cfg))
    return str(path)


def test_criterion_8_perturbation_trace_contract(tmp_path):
    out = tmp_path / "trace.jsonl"
    assert main(["experiment", _config(tmp_path / "c.json"), "--out", str(out)]) == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    found = [r for r in recs if r["status"] == "found"]
    assert found
    golden = RotationNumber.golden()
    R = linearize(golden, 4000).radius_estimate
    r1, r2 = 0.02 * R, 0.9 * R
    for r in found:
        theta_n = RotationNumber.from_json(r["theta_n"])
        r_prime = hex_to_float(r["r_prime"])
        assert float(abs(theta_n.value - golden.value)) < 0.2
        assert hex_to_float(r["theta_distance"]) < 0.2
        assert r1 < r_prime < r2
        assert r_prime < hex_to_float(r["radius_estimate"])
        assert hex_to_float(r["sup_drift"]) < 0.2
        assert hex_to_float(r["max_pinch"]) > 2.0
    rep = tmp_path / "replay"
    assert main(["replay", str(manifest_path(out)), "--out-dir", str(rep), "--verify"]) == 0
    assert (rep / "trace.jsonl").read_bytes() == out.read_bytes()

    # a budget that cannot be met: informational exit code, no false positive
    out0 = tmp_path / "none.jsonl"
    assert main(["experiment", _config(tmp_path / "z.json", epsilon=0, cut_range=[2]),
                 "--out", str(out0)]) == 5
    assert all(json.loads(l)["status"] != "found" for l in out0.read_text().splitlines())


def test_criterion_9_cli_determinism(tmp_path):
    curve = tmp_path / "dumbbell.csv"
    write_curve_csv(dumbbell(0.05, 512), curve)
    runs = {
        "radius": ["radius", "--theta", "golden", "--N", "2000"],
        "boundary": ["boundary", "--theta", "golden", "--r-fraction", "0.7", "--M", "512",
                     "--N", "2000"],
        "pinch-profile": ["pinch-profile", str(curve)],
        "experiment": ["experiment", _config(tmp_path / "e.json", cut_range=[4],
                                             tail_entries=[10], r1_fraction=0.3,
                                             r2_fraction=0.5, series_N=1000,
                                             samples_M=128)],
    }
    for name, argv in runs.items():
        out = tmp_path / f"{name}.out"
        code = main(argv + ["--out", str(out)])
        assert code in (0, 5)
        rep = tmp_path / f"replay-{name}"
        assert main(["replay", str(manifest_path(out)), "--out-dir", str(rep),
                     "--verify"]) == code
        assert (rep / out.name).read_bytes() == out.read_bytes()
