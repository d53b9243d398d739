"""Wigner 3j and Clebsch-Gordan coefficients.

All angular-momentum arguments are passed doubled (``2j``, ``2m``) so that
half-integers stay integral. Racah sums are accumulated in exact rational
arithmetic and only the final square root is taken in floating point.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


def _half(x2: int) -> int:
    if x2 % 2:
        raise ValueError("expected an even doubled value")
    return x2 // 2


def _check_int(*vals):
    for v in vals:
        if int(v) != v:
            raise ValueError(f"doubled angular momenta must be integers, got {v!r}")


def triangle(tj1: int, tj2: int, tj3: int) -> bool:
    return (tj1 + tj2 + tj3) % 2 == 0 and abs(tj1 - tj2) <= tj3 <= tj1 + tj2


@lru_cache(maxsize=None)
def _wigner_3j(tj1, tj2, tj3, tm1, tm2, tm3) -> float:
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if not triangle(tj1, tj2, tj3):
        return 0.0
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        if abs(tm) > tj or (tj + tm) % 2:
            return 0.0
    f = math.factorial
    a = _half(tj1 + tj2 - tj3)
    b = _half(tj1 - tj2 + tj3)
    c = _half(-tj1 + tj2 + tj3)
    big = _half(tj1 + tj2 + tj3) + 1
    delta_sq = Fraction(f(a) * f(b) * f(c), f(big))
    norm_sq = 1
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        norm_sq *= f(_half(tj + tm)) * f(_half(tj - tm))

    # Racah: sum_t (-1)^t / [t! (j3-j2+t+m1)! (j3-j1+t-m2)! (j1+j2-j3-t)! (j1-t-m1)! (j2-t+m2)!]
    k1 = _half(tj3 - tj2 + tm1)
    k2 = _half(tj3 - tj1 - tm2)
    k3 = a
    k4 = _half(tj1 - tm1)
    k5 = _half(tj2 + tm2)
    tmin = max(0, -k1, -k2)
    tmax = min(k3, k4, k5)
    total = Fraction(0)
    for t in range(tmin, tmax + 1):
        den = f(t) * f(k1 + t) * f(k2 + t) * f(k3 - t) * f(k4 - t) * f(k5 - t)
        total += Fraction((-1) ** t, den)
    if total == 0:
        return 0.0
    phase = -1 if _half(tj1 - tj2 - tm3) % 2 else 1
    mag_sq = delta_sq * norm_sq * total * total
    return phase * (1 if total > 0 else -1) * math.sqrt(mag_sq)


def wigner_3j(tj1, tj2, tj3, tm1, tm2, tm3) -> float:
    """``(j1 j2 j3; m1 m2 m3)`` with every argument doubled."""
    _check_int(tj1, tj2, tj3, tm1, tm2, tm3)
    return _wigner_3j(int(tj1), int(tj2), int(tj3), int(tm1), int(tm2), int(tm3))


def clebsch_gordan(tj1, tm1, tj2, tm2, tj, tm) -> float:
    """``(j1 m1 j2 m2 | j m)``, Condon-Shortley phases, doubled arguments."""
    _check_int(tj1, tm1, tj2, tm2, tj, tm)
    if tm1 + tm2 != tm:
        return 0.0
    w = wigner_3j(tj1, tj2, tj, tm1, tm2, -tm)
    if w == 0.0:
        return 0.0
    phase = -1 if _half(tj1 - tj2 + tm) % 2 else 1
    return phase * math.sqrt(tj + 1) * w


def gaunt(l1: int, m1: int, l2: int, m2: int, l3: int, m3: int) -> float:
    """``int Y*_{l1 m1} Y_{l2 m2} Y_{l3 m3} dOmega`` for integer ``l``, ``m``."""
    w0 = wigner_3j(2 * l1, 2 * l2, 2 * l3, 0, 0, 0)
    if w0 == 0.0:
        return 0.0
    w = wigner_3j(2 * l1, 2 * l2, 2 * l3, -2 * m1, 2 * m2, 2 * m3)
    if w == 0.0:
        return 0.0
    pref = math.sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / (4 * math.pi))
    return (-1) ** (m1 % 2) * pref * w0 * w
