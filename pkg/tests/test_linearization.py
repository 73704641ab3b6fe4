from fractions import Fraction

import gmpy2
import mpmath
import numpy as np
import pytest
from gmpy2 import mpc, mpfr

from oracles import series_mpmath, winding_number
from siegellab.curves import circle
from siegellab.errors import DegenerateFit, PrecisionExhausted, RationalAngle, TailTooLarge
from siegellab.linearization import (LinearizationSeries, critical_point_distance,
                                     estimate_radius, linearize, load_series, residual,
                                     sample_curve, save_series, tail_bound)
from siegellab.rotation import bounded_type_approximant, parse_theta


def exact(x) -> Fraction:
    n, d = x.as_integer_ratio()
    return Fraction(int(n), int(d))


def test_low_order_coefficients(golden_series):
    s = golden_series(1000)
    lam = s.lam
    with gmpy2.context(precision=s.precision_bits):
        b2 = 1 / (lam ** 2 - lam)
        b3 = 2 / ((lam ** 2 - lam) * (lam ** 3 - lam))
        assert s.coeff(1) == 1
        assert abs(s.coeff(2) - b2) < mpfr(2) ** (-240) * abs(b2)
        assert abs(s.coeff(3) - b3) < mpfr(2) ** (-240) * abs(b3)


def _mp(f: Fraction):
    return mpmath.mpf(f.numerator) / f.denominator


def test_series_against_mpmath_oracle(golden):
    N = 150
    s = linearize(golden, N)
    ref = series_mpmath(exact(golden.value), N, 320)
    with mpmath.workprec(320):
        for n in range(1, N + 1):
            b = s.coeff(n)
            got = mpmath.mpc(_mp(exact(b.real)), _mp(exact(b.imag)))
            want = ref[n - 1]
            assert abs(got - want) <= mpmath.mpf(2) ** -200 * abs(want)


def test_recurrence_exact_at_double_precision(golden):
    N = 300
    s = linearize(golden, N)
    prec = s.precision_bits
    with gmpy2.context(precision=2 * prec):
        lam = mpc(s.lam, precision=2 * prec)
        b = [None] + [mpc(c, precision=2 * prec) for c in s.coeffs]
        for n in range(2, N + 1):
            conv = sum((b[j] * b[n - j] for j in range(1, n)), mpc(0))
            want = conv / (lam ** n - lam)
            assert abs(b[n] - want) < abs(want) * mpfr(2) ** (-(prec // 2))


def test_rational_angle_refused():
    with pytest.raises(RationalAngle):
        linearize(parse_theta("1/3"), 10)
    with pytest.raises(RationalAngle):
        linearize(parse_theta("cf:[2,5]"), 10)


def test_precision_check():
    theta = parse_theta("golden", 40)
    with pytest.raises(PrecisionExhausted):
        linearize(theta, 30)
    # an explicit lower guard makes the same run legal
    assert linearize(theta, 30, guard_bits=8).N == 30


def test_large_entry_needs_more_bits(golden):
    a = bounded_type_approximant(golden, 3, 10 ** 12)
    with pytest.raises(PrecisionExhausted):
        linearize(a, 2000, precision=96)


def test_residual_small_at_half_radius(golden_series):
    s = golden_series(1000)
    assert residual(s, 0.5 * s.radius_estimate, 256) < 1e-10


def test_residual_vanishes_near_zero(golden_series):
    assert residual(golden_series(1000), 1e-8, 64) < 1e-20


def test_residual_decreases_with_N(golden):
    R = linearize(golden, 1600).radius_estimate
    small, large = (residual(linearize(golden, N), 0.8 * R, 256) for N in (50, 500))
    assert large < small
    # at 0.9 R the residual falls until it reaches the double-precision floor
    vals = [residual(linearize(golden, N), 0.9 * R, 256) for N in (100, 400, 1600)]
    assert vals[0] > vals[1] >= vals[2]
    assert vals[2] < 1e-15


def test_radius_below_four(golden_series):
    s = golden_series(4000)
    assert s.fit_window == (2000, 4000)
    assert 0 < s.radius_estimate < 4


def test_radius_stable_in_N(golden_series, regression):
    r2, r4 = golden_series(2000).radius_estimate, golden_series(4000).radius_estimate
    assert abs(r2 - r4) / r4 < 1e-2
    assert r2 == float.fromhex(regression["golden_N2000"])
    assert r4 == float.fromhex(regression["golden_N4000"])


def test_large_entries_depress_radius(golden, regression):
    rs = [linearize(bounded_type_approximant(golden, 5, 10 ** k), 2000).radius_estimate
          for k in (1, 2, 3)]
    assert rs[0] > rs[1] > rs[2]
    for k, r in zip((10, 100, 1000), rs):
        assert r == float.fromhex(regression[f"approx_cut5_A{k}_N2000"])


def test_fit_window_validation(golden_series):
    s = golden_series(1000)
    with pytest.raises(ValueError):
        estimate_radius(s, (900, 920))
    with pytest.raises(ValueError):
        estimate_radius(s, (0, 1000))


def _with_coeffs(s, coeffs):
    return LinearizationSeries(s.theta, s.lam, tuple(coeffs), s.precision_bits, s.min_divisor)


def test_degenerate_fits(golden_series):
    s = golden_series(200)
    zeros = _with_coeffs(s, [mpc(1)] + [mpc(0)] * 199)
    with pytest.raises(DegenerateFit):
        estimate_radius(zeros, (100, 200))
    # |b_n| = 10^(-3n) would mean a radius of 1000, beyond the bound of 4
    shrinking = _with_coeffs(s, [mpc(mpfr(10) ** (-3 * n)) for n in range(1, 201)])
    with pytest.raises(DegenerateFit):
        estimate_radius(shrinking, (100, 200))


def test_tiny_circle_is_round(golden_series):
    s = golden_series(1000)
    r = 1e-6
    c = sample_curve(s, r, 64)
    ideal = r * np.exp(2j * np.pi * np.arange(64) / 64)
    assert np.max(np.abs(c.points - ideal)) < 2e-6
    assert np.max(np.abs(c.points - ideal)) <= 2 * abs(complex(s.coeff(2))) * r * r


def test_half_radius_curve_winds_once(golden_series):
    s = golden_series(1000)
    c = sample_curve(s, 0.5 * s.radius_estimate, 1024)
    assert c.M == 1024
    assert winding_number(c.points) == 1
    assert c.source["series_N"] == 1000


def test_sampling_beyond_radius_rejected(golden_series):
    s = golden_series(1000)
    with pytest.raises(TailTooLarge):
        sample_curve(s, s.radius_estimate, 64)
    with pytest.raises(TailTooLarge):
        sample_curve(s, 1.1 * s.radius_estimate, 64)


def test_tail_bound_grows_with_r(golden_series):
    s = golden_series(1000)
    R = s.radius_estimate
    assert tail_bound(s, 0.3 * R) < tail_bound(s, 0.6 * R) < tail_bound(s, 0.9 * R)


def test_critical_point_distance_synthetic():
    assert critical_point_distance(circle(4096), 1.0) == pytest.approx(0.5, abs=1e-6)


def test_critical_point_near_zero(golden_series):
    s = golden_series(1000)
    c = sample_curve(s, 1e-6, 64)
    assert abs(critical_point_distance(c, s.lam_complex) - 0.5) < 1e-5


def test_critical_point_approached_near_boundary(golden_series):
    s = golden_series(4000)
    R = s.radius_estimate
    near = critical_point_distance(sample_curve(s, 0.99 * R, 1024), s.lam_complex)
    far = critical_point_distance(sample_curve(s, 0.5 * R, 1024), s.lam_complex)
    assert near < far


def test_series_checkpoint_roundtrip(tmp_path, golden_series):
    s = golden_series(200)
    save_series(s, tmp_path / "s.json")
    t = load_series(tmp_path / "s.json")
    assert t.coeffs == s.coeffs
    assert t.radius_estimate == s.radius_estimate
    assert t.theta.value == s.theta.value


def test_silver_radius(regression):
    silver = parse_theta("cf:[]+tail:2")
    r2 = linearize(silver, 2000).radius_estimate
    assert 0 < r2 < 4
    assert r2 == float.fromhex(regression["silver_N2000"])
