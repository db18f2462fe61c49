"""Extended-real exponent arithmetic in exact rationals.

Exponents of the mixed-norm spaces live in [1, inf].  All admissibility
conditions are affine in the reciprocals 1/p (with 1/inf = 0), so the
canonical internal representation is a Fraction reciprocal; every verdict
reached through these helpers is exact.

Floats are converted through ``str`` so that human-entered decimals like
0.3 become 3/10 rather than the nearest binary double.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

INF = math.inf

ExtReal = object  # Fraction or math.inf; informal alias


def as_extended(x) -> ExtReal:
    """Coerce x to a Fraction or inf.  Accepts 'inf', '10/3', floats, ints."""
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INF
        return Fraction(s)
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        if math.isinf(x):
            return INF
        if math.isnan(x):
            raise ValueError("nan is not a valid exponent")
        return Fraction(str(x))
    raise TypeError(f"cannot interpret {x!r} as an extended real")


def recip(x) -> Fraction:
    """1/x with 1/inf = 0, exact."""
    x = as_extended(x)
    if x is INF or (isinstance(x, float) and math.isinf(x)):
        return Fraction(0)
    if x == 0:
        raise ZeroDivisionError("reciprocal of zero exponent")
    return Fraction(1) / Fraction(x)


def from_recip(u) -> ExtReal:
    """Inverse of recip: 0 -> inf."""
    u = Fraction(u)
    if u == 0:
        return INF
    return Fraction(1) / u


def conjugate(p) -> ExtReal:
    """Holder conjugate: 1/p + 1/p' = 1.  conjugate(1) = inf."""
    u = recip(p)
    if u > 1 or u < 0:
        raise ValueError(f"exponent {p} outside [1, inf]")
    return from_recip(1 - u)


def to_float(x) -> float:
    x = as_extended(x)
    if x is INF or (isinstance(x, float) and math.isinf(x)):
        return math.inf
    return float(x)


def fmt(x) -> str:
    """Stable text form: 'inf' or an exact rational."""
    x = as_extended(x)
    if x is INF or (isinstance(x, float) and math.isinf(x)):
        return "inf"
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
