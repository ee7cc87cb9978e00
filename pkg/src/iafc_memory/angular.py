"""Wigner 3j/6j symbols and Clebsch-Gordan coefficients.

All angular momenta are carried internally as doubled integers so that
half-integer values are exact.  The Racah sums are accumulated as exact
rationals and only the final square root is taken in floating point, which
keeps the alternating sums free of cancellation error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Real

__all__ = ["HalfInt", "twice", "wigner3j", "wigner6j", "clebsch_gordan"]


@dataclass(frozen=True, order=True)
class HalfInt:
    """An integer or half-integer stored as ``2 * value``."""

    twice_value: int

    @classmethod
    def of(cls, value) -> "HalfInt":
        return cls(twice(value))

    def __float__(self) -> float:
        return self.twice_value / 2

    def __repr__(self) -> str:
        if self.twice_value % 2:
            return f"HalfInt({self.twice_value}/2)"
        return f"HalfInt({self.twice_value // 2})"


def twice(value) -> int:
    """Return ``2 * value`` as an int, rejecting values that are not multiples of 1/2."""
    if isinstance(value, HalfInt):
        return value.twice_value
    if isinstance(value, (int, Fraction)):
        doubled = Fraction(value) * 2
        if doubled.denominator != 1:
            raise ValueError(f"{value!r} is not an integer or half-integer")
        return int(doubled)
    if isinstance(value, Real):
        doubled = 2.0 * float(value)
        nearest = round(doubled)
        if abs(doubled - nearest) > 1e-9:
            raise ValueError(f"{value!r} is not an integer or half-integer")
        return int(nearest)
    raise TypeError(f"cannot interpret {value!r} as an angular momentum")


def _triangle(a: int, b: int, c: int) -> bool:
    # doubled arguments
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


def _triangle_coefficient(a: int, b: int, c: int) -> Fraction:
    f = math.factorial
    return Fraction(
        f((a + b - c) // 2) * f((a - b + c) // 2) * f((-a + b + c) // 2),
        f((a + b + c) // 2 + 1),
    )


def _signed_sqrt(total: Fraction, radicand: Fraction) -> float:
    if total == 0:
        return 0.0
    magnitude = math.sqrt(float(total * total * radicand))
    return magnitude if total > 0 else -magnitude


def _valid_projection(j: int, m: int) -> bool:
    return j >= 0 and abs(m) <= j and (j - m) % 2 == 0


@lru_cache(maxsize=65536)
def _wigner3j_twice(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    if m1 + m2 + m3 != 0:
        return 0.0
    if not (_valid_projection(j1, m1) and _valid_projection(j2, m2) and _valid_projection(j3, m3)):
        return 0.0
    if not _triangle(j1, j2, j3):
        return 0.0

    f = math.factorial
    # integer-valued combinations of the half-integer arguments
    a = (j3 - j2 + m1) // 2
    b = (j3 - j1 - m2) // 2
    c = (j1 + j2 - j3) // 2
    d = (j1 - m1) // 2
    e = (j2 + m2) // 2
    k_min = max(0, -a, -b)
    k_max = min(c, d, e)

    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        term = Fraction(1, f(k) * f(a + k) * f(b + k) * f(c - k) * f(d - k) * f(e - k))
        total += -term if k % 2 else term

    radicand = _triangle_coefficient(j1, j2, j3) * (
        f((j1 + m1) // 2) * f((j1 - m1) // 2)
        * f((j2 + m2) // 2) * f((j2 - m2) // 2)
        * f((j3 + m3) // 2) * f((j3 - m3) // 2)
    )
    value = _signed_sqrt(total, radicand)
    if ((j1 - j2 - m3) // 2) % 2:
        value = -value
    return value


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol ``(j1 j2 j3; m1 m2 m3)``.

    Arguments may be ints, floats, Fractions or :class:`HalfInt`.  Any
    violation of the triangle or projection selection rules gives exactly 0.
    """
    return _wigner3j_twice(twice(j1), twice(j2), twice(j3), twice(m1), twice(m2), twice(m3))


@lru_cache(maxsize=65536)
def _wigner6j_twice(j1: int, j2: int, j3: int, j4: int, j5: int, j6: int) -> float:
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if min(j1, j2, j3, j4, j5, j6) < 0 or not all(_triangle(*t) for t in triads):
        return 0.0

    f = math.factorial
    lower = [sum(t) // 2 for t in triads]
    upper = [(j1 + j2 + j4 + j5) // 2, (j2 + j3 + j5 + j6) // 2, (j3 + j1 + j6 + j4) // 2]

    total = Fraction(0)
    for t in range(max(lower), min(upper) + 1):
        denom = 1
        for low in lower:
            denom *= f(t - low)
        for high in upper:
            denom *= f(high - t)
        term = Fraction(f(t + 1), denom)
        total += -term if t % 2 else term

    radicand = Fraction(1)
    for triad in triads:
        radicand *= _triangle_coefficient(*triad)
    return _signed_sqrt(total, radicand)


def wigner6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol ``{j1 j2 j3; j4 j5 j6}`` (0 if any triad fails the triangle rule)."""
    return _wigner6j_twice(twice(j1), twice(j2), twice(j3), twice(j4), twice(j5), twice(j6))


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Clebsch-Gordan coefficient ``<j1 m1; j2 m2 | J M>`` (Condon-Shortley phase)."""
    tj1, tm1, tj2, tm2, tJ, tM = (twice(x) for x in (j1, m1, j2, m2, J, M))
    if tm1 + tm2 != tM:
        return 0.0
    value = _wigner3j_twice(tj1, tj2, tJ, tm1, tm2, -tM)
    if value == 0.0:
        return 0.0
    if ((tj1 - tj2 + tM) // 2) % 2:
        value = -value
    return math.sqrt(tJ + 1) * value
