"""Linearization power series of P(z) = lambda z + z^2 and derived quantities.

Write phi(z) = sum_{n>=1} b_n z^n with b_1 = 1.  Substituting into the
conjugacy phi(lambda z) = P(phi(z)) = lambda phi(z) + phi(z)^2 and comparing
the coefficients of z^n gives

    b_n lambda^n = lambda b_n + sum_{j=1}^{n-1} b_j b_{n-j},

i.e. b_n (lambda^n - lambda) = sum_{j=1}^{n-1} b_j b_{n-j} for n >= 2.  The
divisor lambda^n - lambda = lambda (lambda^{n-1} - 1) is small exactly when
n - 1 is close to a multiple of a convergent denominator of theta.  With
phi'(0) = 1 the radius of convergence of this series is the conformal
radius r(theta) of the Siegel disk.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from . import _backend
from .curves import SampledCurve
from .errors import DegenerateFit, PrecisionExhausted, RationalAngle, TailTooLarge
from .hexfloat import float_to_hex, hex_to_float, hex_to_mpfr, mpfr_to_hex
from .rotation import RotationNumber

GUARD_BITS = 64
MIN_FIT_POINTS = 50
TAIL_TOLERANCE = 1e-8
RADIUS_BOUND = 4.0


@dataclass(frozen=True, eq=False)
class LinearizationSeries:
    """Truncated linearizing series; ``coeffs[n - 1]`` is b_n."""

    theta: RotationNumber
    lam: object
    coeffs: tuple
    precision_bits: int
    min_divisor: object
    radius_estimate: float = math.nan
    fit_residual: float = math.nan
    fit_window: tuple = ()

    @property
    def N(self) -> int:
        return len(self.coeffs)

    @property
    def lam_complex(self) -> complex:
        return complex(self.lam)

    def coeff(self, n: int):
        return self.coeffs[n - 1]

    def to_json(self) -> dict:
        return {
            "theta": self.theta.to_json(),
            "precision_bits": self.precision_bits,
            "lambda": [mpfr_to_hex(self.lam.real), mpfr_to_hex(self.lam.imag)],
            "coeffs": [[mpfr_to_hex(b.real), mpfr_to_hex(b.imag)] for b in self.coeffs],
            "min_divisor": mpfr_to_hex(self.min_divisor),
            "radius_estimate": float_to_hex(self.radius_estimate),
            "fit_residual": float_to_hex(self.fit_residual),
            "fit_window": list(self.fit_window),
        }

    @classmethod
    def from_json(cls, data: dict) -> "LinearizationSeries":
        p = int(data["precision_bits"])

        def cplx(pair):
            return mpc(hex_to_mpfr(pair[0], p), hex_to_mpfr(pair[1], p), precision=p)

        return cls(
            theta=RotationNumber.from_json(data["theta"]),
            lam=cplx(data["lambda"]),
            coeffs=tuple(cplx(c) for c in data["coeffs"]),
            precision_bits=p,
            min_divisor=hex_to_mpfr(data["min_divisor"], p),
            radius_estimate=hex_to_float(data["radius_estimate"]),
            fit_residual=hex_to_float(data["fit_residual"]),
            fit_window=tuple(data["fit_window"]),
        )


def save_series(series: LinearizationSeries, path) -> None:
    with open(path, "w") as fh:
        json.dump(series.to_json(), fh, sort_keys=True)
        fh.write("\n")


def load_series(path) -> LinearizationSeries:
    with open(path) as fh:
        return LinearizationSeries.from_json(json.load(fh))


def inverse_divisors(theta: RotationNumber, N: int, precision: int):
    """1/(lambda^n - lambda) for n = 2..N, plus lambda and min |lambda^n - lambda|.

    With s = frac((n-1) theta),  lambda^n - lambda = 2 sin(pi s) i e^{i pi (s + 2 theta)},
    which keeps full relative accuracy however small the divisor is.
    """
    work = precision + 32
    inv_re = [mpfr(0, precision)] * (N + 1)
    inv_im = [mpfr(0, precision)] * (N + 1)
    min_div = None
    with gmpy2.context(precision=work):
        th = mpfr(theta.value)
        pi = gmpy2.const_pi()
        lam = mpc(gmpy2.cos(2 * pi * th), gmpy2.sin(2 * pi * th))
        for n in range(2, N + 1):
            s = gmpy2.frac((n - 1) * th)
            sn = gmpy2.sin(pi * s)
            if sn == 0:
                raise RationalAngle(f"lambda^{n} = lambda: {n - 1}*theta is an integer")
            d = 2 * abs(sn)
            if min_div is None or d < min_div:
                min_div = d
            phase = pi * (s + 2 * th)
            scale = 2 * sn
            inv_re[n] = mpfr(-gmpy2.sin(phase) / scale, precision)
            inv_im[n] = mpfr(-gmpy2.cos(phase) / scale, precision)
    lam = mpc(lam, precision=precision)
    return inv_re, inv_im, lam, mpfr(min_div if min_div is not None else 2, precision)


def required_bits(min_divisor, guard_bits: int = GUARD_BITS) -> int:
    """Working bits demanded by the precision policy for this divisor."""
    return int(math.ceil(-float(gmpy2.log2(min_divisor)))) + guard_bits


def linearize(theta: RotationNumber, N: int, precision: Optional[int] = None,
              fit_window: Optional[tuple] = None,
              guard_bits: int = GUARD_BITS) -> LinearizationSeries:
    """Coefficients b_1..b_N of the linearizing map, plus a radius estimate.

    Raises ``RationalAngle`` for rational theta and ``PrecisionExhausted``
    when the smallest divisor demands more than ``precision`` bits (after
    ``guard_bits``) or is not resolved by the precision of theta itself.
    """
    if theta.is_rational:
        raise RationalAngle("rational rotation numbers have no Siegel disk")
    if N < 2:
        raise ValueError("N must be >= 2")
    precision = precision or theta.precision_bits
    inv_re, inv_im, lam, min_div = inverse_divisors(theta, N, precision)
    need = required_bits(min_div, guard_bits)
    if need > precision:
        raise PrecisionExhausted(
            f"smallest divisor {float(min_div):.3e} needs {need} bits, have {precision}")
    # (n-1) theta mod 1 is only known to N * ulp(theta)
    angle_err = 2 * math.pi * N * 2.0 ** (-theta.precision_bits)
    if float(min_div) <= angle_err:
        raise PrecisionExhausted(
            f"divisor {float(min_div):.3e} below its error bound {angle_err:.3e}")
    re, im = _backend.series_recurrence(inv_re, inv_im, N, precision)
    coeffs = tuple(mpc(re[n], im[n], precision=precision) for n in range(1, N + 1))
    series = LinearizationSeries(theta, lam, coeffs, precision, min_div)
    if fit_window is None:
        fit_window = default_fit_window(N)
    min_points = min(MIN_FIT_POINTS, fit_window[1] - fit_window[0] + 1)
    est, resid = estimate_radius(series, fit_window, min_points=min_points)
    return replace(series, radius_estimate=est, fit_residual=resid,
                   fit_window=tuple(fit_window))


def default_fit_window(N: int) -> tuple:
    """Upper half of the coefficients; the whole series when that is too short."""
    if N - N // 2 + 1 >= MIN_FIT_POINTS:
        return (N // 2, N)
    return (2, N)


def log_abs_coeffs(series: LinearizationSeries, lo: int, hi: int):
    """(n, log|b_n|) for n in [lo, hi], skipping exact zeros."""
    ns = []
    logs = []
    with gmpy2.context(precision=series.precision_bits):
        for n in range(lo, hi + 1):
            b = series.coeff(n)
            if b == 0:
                continue
            ns.append(n)
            logs.append(float(gmpy2.log(abs(b))))
    return np.array(ns, dtype=float), np.array(logs)


def estimate_radius(series: LinearizationSeries, fit_window: Optional[tuple] = None,
                    min_points: int = MIN_FIT_POINTS):
    """Hadamard-style radius estimate from a least-squares fit of log|b_n| ~ n.

    Returns ``(radius, fit_residual)`` where radius = exp(-slope) and the
    residual is the RMS deviation of log|b_n| from the fitted line.
    """
    N = series.N
    lo, hi = fit_window if fit_window is not None else default_fit_window(N)
    if not (1 <= lo < hi <= N):
        raise ValueError(f"fit window {lo, hi} outside 1..{N}")
    if hi - lo + 1 < min_points:
        raise ValueError(f"fit window holds fewer than {min_points} coefficients")
    n, y = log_abs_coeffs(series, lo, hi)
    if n.size < 2:
        raise DegenerateFit("no nonzero coefficients in the fit window")
    slope, intercept = np.polyfit(n, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * n + intercept)) ** 2)))
    radius = float(np.exp(-slope))
    if not (0 < radius < RADIUS_BOUND):
        raise DegenerateFit(f"radius estimate {radius} outside (0, {RADIUS_BOUND})")
    return radius, resid


def scaled_coefficients(series: LinearizationSeries, r: float) -> np.ndarray:
    """Complex doubles c_n = b_n r^n, index 0..N with c_0 = 0."""
    out = np.zeros(series.N + 1, dtype=np.complex128)
    with gmpy2.context(precision=series.precision_bits):
        rr = mpfr(r)
        power = mpfr(1)
        for n, b in enumerate(series.coeffs, start=1):
            power = power * rr
            out[n] = complex(b * power)
    return out


def horner(c: np.ndarray, u: np.ndarray) -> np.ndarray:
    """sum_{n>=1} c_n u^n evaluated by Horner's rule (c_0 is ignored)."""
    u = np.asarray(u, dtype=np.complex128)
    acc = np.zeros_like(u)
    for cn in c[:0:-1]:
        acc = acc * u + cn
    return acc * u


def evaluate(series: LinearizationSeries, z) -> np.ndarray:
    """phi(z) from the truncated series (all |z| should share one radius)."""
    z = np.asarray(z, dtype=np.complex128)
    r = float(np.max(np.abs(z)))
    if r == 0.0:
        return np.zeros_like(z)
    return horner(scaled_coefficients(series, r), z / r)


def tail_bound(series: LinearizationSeries, r: float) -> float:
    """|b_N| r^N / (1 - r/R), R the radius estimate; inf when r >= R."""
    R = series.radius_estimate
    if not r < R:
        return math.inf
    with gmpy2.context(precision=series.precision_bits):
        last = abs(series.coeffs[-1]) * mpfr(r) ** series.N
    return float(last) / (1 - r / R)


def residual(series: LinearizationSeries, r: float, M: int) -> float:
    """max over z on the circle |z| = r of |phi(lambda z) - lambda phi(z) - phi(z)^2|."""
    if not 0 < r < series.radius_estimate:
        raise ValueError("need 0 < r < radius_estimate")
    if M < 16:
        raise ValueError("need M >= 16")
    lam = series.lam_complex
    c = scaled_coefficients(series, r)
    u = np.exp(2j * np.pi * np.arange(M) / M)
    f = horner(c, u)
    g = horner(c, lam * u)
    return float(np.max(np.abs(g - lam * f - f * f)))


def sample_curve(series: LinearizationSeries, r: float, M: int,
                 tail_tolerance: float = TAIL_TOLERANCE) -> SampledCurve:
    """phi(r e^{2 pi i k/M}) for k = 0..M-1."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if M < 16:
        raise ValueError("need M >= 16")
    tb = tail_bound(series, r)
    if not tb < tail_tolerance:
        raise TailTooLarge(
            f"tail bound {tb:.3e} at r={r} (radius estimate "
            f"{series.radius_estimate}); increase N")
    c = scaled_coefficients(series, r)
    u = np.exp(2j * np.pi * np.arange(M) / M)
    pts = horner(c, u)
    source = {"theta": series.theta.to_json(), "radius": float_to_hex(r),
              "series_N": series.N}
    return SampledCurve(pts, source)


def critical_point_distance(curve: SampledCurve, lam: complex) -> float:
    """Distance from the samples to the critical point -lambda/2 of P."""
    return float(np.min(np.abs(curve.points + complex(lam) / 2)))
