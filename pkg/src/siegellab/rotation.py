"""Continued fractions, Bruno sums and bounded-type approximants.

Rotation numbers live in (0, 1) and are carried as MPFR reals (``gmpy2.mpfr``)
whose precision is explicit.  Continued-fraction entries are only reported
while the running error bound of the Euclidean algorithm certifies them.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import InsufficientDepth, PrecisionExhausted
from .hexfloat import hex_to_mpfr, mpfr_to_hex

DEFAULT_DEPTH = 64


def default_precision() -> int:
    """Working precision in bits; overridable through ``SIEGELLAB_PRECISION``."""
    return int(os.environ.get("SIEGELLAB_PRECISION", "256"))


@dataclass(frozen=True)
class ContinuedFraction:
    """Entries a_1, a_2, ... of [0; a_1, a_2, ...]."""

    entries: tuple
    terminated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(a) for a in self.entries))
        if any(a < 1 for a in self.entries):
            raise ValueError("continued fraction entries must be >= 1")

    def __len__(self):
        return len(self.entries)

    def rational(self) -> Fraction:
        """The last convergent p_d/q_d as an exact fraction."""
        p, q = convergents(self)[-1]
        return Fraction(p, q)


def _ulp_bound(x, prec):
    # rigorous-enough absolute bound on one rounding of x, in a 64-bit mpfr
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        return abs(mpfr(x)) * gmpy2.exp2(-prec + 1)


def cf_expand(x, depth: int) -> ContinuedFraction:
    """Expand 0 < x < 1 into at most ``depth`` continued-fraction entries.

    ``x`` is either a ``Fraction`` (expanded exactly) or an mpfr, taken as a
    half-ulp approximation of some real.  For mpfr input an error bound is
    propagated through every inversion; an entry is emitted only when the
    floor is certified.  When the remainder is indistinguishable from zero
    while plenty of precision is left, the expansion is marked terminated
    (the input is rational at working precision).  When the bound has grown
    so that neither case can be certified, ``PrecisionExhausted`` is raised
    carrying the entries obtained so far.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(x, (Fraction, int)):
        return _cf_expand_exact(Fraction(x), depth)
    if not (0 < x < 1):
        raise ValueError("x must lie in (0, 1)")
    prec = x.precision
    tiny = gmpy2.exp2(-(prec // 2))
    entries = []
    with gmpy2.context(precision=prec):
        rem = mpfr(x)
        err = _ulp_bound(rem, prec)
        while len(entries) < depth:
            if rem <= err:
                raise PrecisionExhausted(
                    f"remainder below its error bound after {len(entries)} entries",
                    entries)
            y = 1 / rem
            with gmpy2.context(precision=64, round=gmpy2.RoundUp):
                # 1.001 absorbs the rounding of this bound computation itself
                err_y = 1.001 * err / (rem * (rem - err)) + _ulp_bound(y, prec)
            n = gmpy2.rint(y)
            if abs(y - n) <= err_y:
                if err_y < tiny:
                    entries.append(int(n))
                    return ContinuedFraction(entries, terminated=True)
                raise PrecisionExhausted(
                    f"entry {len(entries) + 1} is not determined at {prec} bits",
                    entries)
            a = gmpy2.floor(y)
            entries.append(int(a))
            rem = y - a
            with gmpy2.context(precision=64, round=gmpy2.RoundUp):
                err = err_y + _ulp_bound(rem, prec)
    return ContinuedFraction(entries, terminated=False)


def _cf_expand_exact(x: Fraction, depth: int) -> ContinuedFraction:
    if not (0 < x < 1):
        raise ValueError("x must lie in (0, 1)")
    entries = []
    while len(entries) < depth:
        y = 1 / x
        a = math.floor(y)
        entries.append(a)
        x = y - a
        if x == 0:
            return ContinuedFraction(entries, terminated=True)
    return ContinuedFraction(entries, terminated=False)


def convergents(cf: ContinuedFraction) -> list:
    """All convergents (p_n, q_n) for n = 0..d, starting from 0/1.

    Uses q_{n+1} = a_{n+1} q_n + q_{n-1} with q_0 = 1, q_1 = a_1 (and the same
    recurrence for p with p_0 = 0, p_1 = 1).
    """
    if len(cf) == 0:
        raise InsufficientDepth("empty continued fraction")
    out = [(0, 1)]
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for a in cf.entries:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        out.append((p, q))
    return out


def bruno_sum(cf: ContinuedFraction, terms: int) -> float:
    """Partial Bruno sum  sum_{n=1..terms} log(q_{n+1}) / q_n."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if len(cf) < terms + 1:
        raise InsufficientDepth(
            f"need {terms + 1} entries for {terms} Bruno terms, have {len(cf)}")
    qs = [q for _, q in convergents(cf)]
    return math.fsum(_log_ratio(qs[n + 1], qs[n]) for n in range(1, terms + 1))


def _log_ratio(a: int, b: int) -> float:
    # log(a) / b for integers too large to convert to float
    if b < 1 << 1000:
        return math.log(a) / b
    return math.log(a) * math.exp(-math.log(b))


def _available_bruno(cf: ContinuedFraction) -> float:
    return bruno_sum(cf, len(cf) - 1) if len(cf) >= 2 else 0.0


def _value_with_quotient(prefix: Sequence[int], w):
    """Value of [0; prefix..., w] where w is the next complete quotient."""
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for a in prefix:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
    return (w * p + p_prev) / (w * q + q_prev)


def _periodic_remainder(tail: int):
    # [0; T, T, T, ...] solves x = 1 / (T + x)
    return (gmpy2.sqrt(mpfr(tail * tail + 4)) - tail) / 2


@dataclass(frozen=True)
class RotationNumber:
    """A rotation number in (0, 1) with its expansion and arithmetic summary."""

    value: object
    cf: ContinuedFraction
    bruno_sum: float
    type_bound: Optional[int] = None

    def __post_init__(self):
        if not (0 < self.value < 1):
            raise ValueError("rotation number must lie in (0, 1)")
        if self.type_bound is not None and self.type_bound != max(self.cf.entries):
            raise ValueError("type_bound must equal the largest entry")

    @property
    def precision_bits(self) -> int:
        return self.value.precision

    @property
    def is_rational(self) -> bool:
        return self.cf.terminated

    def __float__(self):
        return float(self.value)

    def reconstruction_error(self):
        """|value - p_d/q_d| as an mpfr."""
        with gmpy2.context(precision=self.precision_bits):
            r = self.cf.rational()
            return abs(self.value - mpfr(r.numerator) / r.denominator)

    @classmethod
    def from_value(cls, x, depth: int = DEFAULT_DEPTH) -> "RotationNumber":
        """Expand an mpfr (or Fraction) keeping only certified entries."""
        try:
            cf = cf_expand(x, depth)
        except PrecisionExhausted as exc:
            if not exc.entries:
                raise
            cf = ContinuedFraction(exc.entries)
        if isinstance(x, (Fraction, int)):
            frac = Fraction(x)
            with gmpy2.context(precision=default_precision()):
                x = mpfr(frac.numerator) / frac.denominator
        return cls(x, cf, _available_bruno(cf), None)

    @classmethod
    def from_rational(cls, p: int, q: int, precision: Optional[int] = None):
        precision = precision or default_precision()
        frac = Fraction(p, q)
        cf = cf_expand(frac, 10 ** 6)
        with gmpy2.context(precision=precision):
            value = mpfr(frac.numerator) / frac.denominator
        return cls(value, cf, _available_bruno(cf), None)

    @classmethod
    def from_periodic(cls, prefix: Sequence[int], tail: int,
                      precision: Optional[int] = None,
                      depth: int = DEFAULT_DEPTH) -> "RotationNumber":
        """[0; prefix..., T, T, T, ...], evaluated in closed form."""
        precision = precision or default_precision()
        prefix = [int(a) for a in prefix]
        if tail < 1:
            raise ValueError("tail entry must be >= 1")
        with gmpy2.context(precision=precision + 32):
            w = tail + _periodic_remainder(tail)
            v = _value_with_quotient(prefix, w)
        value = mpfr(v, precision)
        entries = prefix + [tail] * max(depth - len(prefix), 1)
        cf = ContinuedFraction(entries)
        return cls(value, cf, _available_bruno(cf), max(entries))

    @classmethod
    def golden(cls, precision: Optional[int] = None, depth: int = DEFAULT_DEPTH):
        """The golden mean (sqrt 5 - 1)/2 = [0; 1, 1, 1, ...]."""
        return cls.from_periodic([], 1, precision, depth)

    def to_json(self) -> dict:
        return {
            "value_hex": mpfr_to_hex(self.value),
            "precision_bits": self.precision_bits,
            "cf": list(self.cf.entries),
            "type_bound": self.type_bound,
            "terminated": self.cf.terminated,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RotationNumber":
        value = hex_to_mpfr(data["value_hex"], int(data["precision_bits"]))
        cf = ContinuedFraction(data["cf"], bool(data.get("terminated", False)))
        return cls(value, cf, _available_bruno(cf), data.get("type_bound"))


def bounded_type_approximant(theta: RotationNumber, cut: int, tail_entry: int,
                             depth: Optional[int] = None) -> RotationNumber:
    """Bounded-type number [0; a_1..a_cut, tail_entry, 1, 1, 1, ...].

    The expansion of ``theta`` is truncated after ``cut`` entries, one
    adjustable entry is appended and the rest is the all-ones (golden) tail,
    so the value is computed exactly in closed form.  The result is within
    1/q_cut^2 of ``theta``.
    """
    if cut < 0 or len(theta.cf) < cut:
        raise InsufficientDepth(
            f"theta has {len(theta.cf)} entries, cannot cut at {cut}")
    if tail_entry < 1:
        raise ValueError("tail_entry must be >= 1")
    prec = theta.precision_bits
    depth = max(depth or len(theta.cf), cut + 2)
    prefix = list(theta.cf.entries[:cut])
    with gmpy2.context(precision=prec + 32):
        w = tail_entry + _periodic_remainder(1)
        v = _value_with_quotient(prefix, w)
    value = mpfr(v, prec)
    entries = prefix + [tail_entry] + [1] * (depth - cut - 1)
    cf = ContinuedFraction(entries)
    return RotationNumber(value, cf, _available_bruno(cf), max(entries))


_RATIONAL_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")
_CF_RE = re.compile(r"^\s*cf:\[([\d\s,]*)\](?:\+tail:(\d+))?\s*$")
_DECIMAL_RE = re.compile(r"^\s*(0?\.\d+|\d+\.\d*(?:[eE][-+]?\d+)?)\s*(?:@(\d+))?\s*$")


def parse_theta(spec: str, precision: Optional[int] = None,
                depth: int = DEFAULT_DEPTH) -> RotationNumber:
    """Parse a rotation-number spec.

    Accepted forms: ``golden``; ``p/q`` (rational); ``cf:[a1,a2,...]`` (finite,
    hence rational); ``cf:[a1,...]+tail:T`` (prefix followed by T repeated
    forever); a decimal such as ``0.41421356@256`` whose optional suffix
    gives the precision in bits.
    """
    spec = spec.strip()
    if spec == "golden":
        return RotationNumber.golden(precision, depth)
    m = _RATIONAL_RE.match(spec)
    if m:
        p, q = int(m.group(1)), int(m.group(2))
        if not 0 < p < q:
            raise ValueError(f"rational {spec} not in (0, 1)")
        return RotationNumber.from_rational(p, q, precision)
    m = _CF_RE.match(spec)
    if m:
        body = m.group(1).strip()
        prefix = [int(a) for a in body.split(",")] if body else []
        if m.group(2) is not None:
            return RotationNumber.from_periodic(prefix, int(m.group(2)), precision, depth)
        if not prefix:
            raise ValueError("finite continued fraction needs at least one entry")
        r = ContinuedFraction(prefix).rational()
        return RotationNumber.from_rational(r.numerator, r.denominator, precision)
    m = _DECIMAL_RE.match(spec)
    if m:
        bits = int(m.group(2)) if m.group(2) else (precision or default_precision())
        x = mpfr(m.group(1), bits)
        return RotationNumber.from_value(x, depth)
    raise ValueError(f"unrecognised theta spec {spec!r}")
