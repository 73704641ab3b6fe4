"""Exact hexadecimal serialization of binary floating-point numbers.

Numbers that cross a file boundary are written in hex so that outputs are
bit-identical across platforms.  Doubles use Python's ``float.hex`` form;
multiprecision values use ``[-]0x<odd mantissa>p<exponent>``, which is exact
for any precision and still readable by ``float.fromhex`` when it fits.
"""
from __future__ import annotations

import re

import gmpy2
from gmpy2 import mpfr

_HEX_RE = re.compile(r"^([+-]?)0x([0-9a-fA-F]+)(?:\.([0-9a-fA-F]*))?p([+-]?\d+)$")


def mpfr_to_hex(x) -> str:
    if gmpy2.is_zero(x):
        return "-0x0p+0" if gmpy2.is_signed(x) else "0x0p+0"
    if not gmpy2.is_finite(x):
        return "nan" if gmpy2.is_nan(x) else ("-inf" if x < 0 else "inf")
    man, exp = x.as_mantissa_exp()
    man = int(man)
    exp = int(exp)
    sign = "-" if man < 0 else ""
    man = abs(man)
    tz = (man & -man).bit_length() - 1
    man >>= tz
    exp += tz
    return f"{sign}0x{man:x}p{exp:+d}"


def hex_to_mpfr(s: str, precision: int):
    """Parse a hex float (either flavor) into an mpfr of the given precision.

    The result is exact whenever the mantissa fits in ``precision`` bits.
    """
    s = s.strip()
    if s in ("inf", "+inf", "-inf", "nan"):
        return mpfr(s, precision)
    m = _HEX_RE.match(s)
    if m is None:
        raise ValueError(f"not a hex float: {s!r}")
    sign, ipart, fpart, exp = m.groups()
    fpart = fpart or ""
    man = int(ipart + fpart, 16)
    e = int(exp) - 4 * len(fpart)
    if sign == "-":
        man = -man
    with gmpy2.context(precision=precision):
        return gmpy2.mul_2exp(mpfr(man, precision), e)


def float_to_hex(x: float) -> str:
    return float(x).hex()


def hex_to_float(s: str) -> float:
    """Accept hex floats and, for hand-written inputs, plain decimals."""
    s = s.strip()
    if "x" in s.lower():
        return float.fromhex(s)
    return float(s)
