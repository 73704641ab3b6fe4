import math

import gmpy2
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegellab.curves import (SampledCurve, read_curve_csv, read_curve_json, write_curve_csv,
                              write_curve_json)
from siegellab.hexfloat import float_to_hex, hex_to_float, hex_to_mpfr, mpfr_to_hex
from siegellab.rotation import RotationNumber

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(finite)
def test_float_hex_roundtrip(x):
    assert hex_to_float(float_to_hex(x)) == x


def test_special_floats():
    assert math.isnan(hex_to_float(float_to_hex(math.nan)))
    assert hex_to_float(float_to_hex(-math.inf)) == -math.inf
    assert hex_to_float("0.25") == 0.25


@given(st.integers(-(10 ** 80), 10 ** 80), st.integers(-400, 400), st.sampled_from([53, 256]))
def test_mpfr_hex_roundtrip(m, e, prec):
    with gmpy2.context(precision=prec):
        x = gmpy2.mul_2exp(gmpy2.mpfr(m), e)
    s = mpfr_to_hex(x)
    assert hex_to_mpfr(s, prec) == x
    if x != 0:
        mant = s.lstrip("-")[2:].split("p")[0]
        assert int(mant, 16) % 2 == 1


def test_mpfr_hex_accepts_fractional_form():
    assert hex_to_mpfr("0x1.8p+3", 64) == 12


point_lists = st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False,
                                          allow_infinity=False),
                       min_size=16, max_size=64, unique=True)


@given(point_lists)
def test_curve_files_roundtrip(tmp_path_factory, pts):
    c = SampledCurve(np.array(pts), {"shape": "random"})
    d = tmp_path_factory.mktemp("io")
    write_curve_csv(c, d / "c.csv")
    write_curve_json(c, d / "c.json")
    a, b = read_curve_csv(d / "c.csv"), read_curve_json(d / "c.json")
    assert np.array_equal(a.points, c.points) and np.array_equal(b.points, c.points)
    assert b.source == c.source


def test_curve_invariants():
    with pytest.raises(ValueError):
        SampledCurve(np.arange(8))
    with pytest.raises(ValueError):
        SampledCurve(np.r_[np.arange(20), np.nan])
    pts = np.exp(2j * np.pi * np.arange(20) / 20)
    pts[5] = pts[4]
    with pytest.raises(ValueError):
        SampledCurve(pts)
    c = SampledCurve(np.exp(2j * np.pi * np.arange(20) / 20))
    with pytest.raises(ValueError):
        c.points[0] = 0


@given(st.lists(st.integers(1, 500), max_size=8), st.integers(1, 40))
def test_rotation_json_roundtrip(prefix, tail):
    th = RotationNumber.from_periodic(prefix, tail)
    again = RotationNumber.from_json(th.to_json())
    assert again.value == th.value and again.cf == th.cf
    assert again.type_bound == th.type_bound == max(prefix + [tail])
