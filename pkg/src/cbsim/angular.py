"""Angular-momentum coupling coefficients.

Wigner 3j and 6j symbols from the Racah closed-form sums, evaluated with exact
integer/Fraction arithmetic under the square root and converted to float at
the end.  Angular momenta may be integer or half-integer; internally
everything is carried as twice the quantum number (an int).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt


def _two_j(x) -> int:
    """Twice the angular momentum as an exact int; rejects non-(half)integers."""
    t = 2 * x
    ti = round(t)
    if abs(t - ti) > 1e-9:
        raise ValueError(f"angular momentum {x} is not integer or half-integer")
    return int(ti)


def _triangle_ok(tj1: int, tj2: int, tj3: int) -> bool:
    return (
        abs(tj1 - tj2) <= tj3 <= tj1 + tj2
        and (tj1 + tj2 + tj3) % 2 == 0
        and tj1 >= 0
        and tj2 >= 0
        and tj3 >= 0
    )


def _fact2(twice: int) -> int:
    """factorial(twice/2) for even non-negative `twice`."""
    if twice < 0 or twice % 2:
        raise ValueError("half-integer factorial argument")
    return factorial(twice // 2)


@lru_cache(maxsize=None)
def _wigner3j_t(tj1: int, tj2: int, tj3: int, tm1: int, tm2: int, tm3: int) -> float:
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if not _triangle_ok(tj1, tj2, tj3):
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return 0.0
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tj3 + tm3) % 2:
        return 0.0

    # Racah's formula: sqrt(triangle coefficient * four factorial products)
    # times an alternating single sum over t.
    tri = Fraction(
        _fact2(tj1 + tj2 - tj3) * _fact2(tj1 - tj2 + tj3) * _fact2(-tj1 + tj2 + tj3),
        _fact2(tj1 + tj2 + tj3 + 2),
    )
    pref = (
        tri
        * _fact2(tj1 + tm1)
        * _fact2(tj1 - tm1)
        * _fact2(tj2 + tm2)
        * _fact2(tj2 - tm2)
        * _fact2(tj3 + tm3)
        * _fact2(tj3 - tm3)
    )

    t_min = max(0, tj2 - tj3 - tm1, tj1 - tj3 + tm2)
    t_max = min(tj1 + tj2 - tj3, tj1 - tm1, tj2 + tm2)
    total = Fraction(0)
    for tt in range(t_min, t_max + 2, 2):
        denom = (
            _fact2(tt)
            * _fact2(tj1 + tj2 - tj3 - tt)
            * _fact2(tj1 - tm1 - tt)
            * _fact2(tj2 + tm2 - tt)
            * _fact2(tj3 - tj2 + tm1 + tt)
            * _fact2(tj3 - tj1 - tm2 + tt)
        )
        term = Fraction((-1) ** (tt // 2), denom)
        total += term
    if total == 0:
        return 0.0

    sign = (-1) ** ((tj1 - tj2 - tm3) // 2)
    value = sign * total * sqrt(float(pref))
    return float(value)


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol (j1 j2 j3; m1 m2 m3).

    Returns 0.0 outside the triangle/projection selection rules.
    """
    return _wigner3j_t(
        _two_j(j1), _two_j(j2), _two_j(j3), _two_j(m1), _two_j(m2), _two_j(m3)
    )


def clebsch_gordan(j1, m1, j2, m2, j3, m3) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | j3 m3>."""
    tj1, tj2, tj3 = _two_j(j1), _two_j(j2), _two_j(j3)
    tm1, tm2, tm3 = _two_j(m1), _two_j(m2), _two_j(m3)
    if tm1 + tm2 != tm3:
        return 0.0
    phase = (-1) ** ((tj1 - tj2 + tm3) // 2)
    return (
        phase
        * sqrt(tj3 + 1.0)
        * _wigner3j_t(tj1, tj2, tj3, tm1, tm2, -tm3)
    )


def _tri_frac(ta: int, tb: int, tc: int) -> Fraction:
    return Fraction(
        _fact2(ta + tb - tc) * _fact2(ta - tb + tc) * _fact2(-ta + tb + tc),
        _fact2(ta + tb + tc + 2),
    )


@lru_cache(maxsize=None)
def _wigner6j_t(tj1: int, tj2: int, tj3: int, tj4: int, tj5: int, tj6: int) -> float:
    triads = (
        (tj1, tj2, tj3),
        (tj1, tj5, tj6),
        (tj4, tj2, tj6),
        (tj4, tj5, tj3),
    )
    for ta, tb, tc in triads:
        if not _triangle_ok(ta, tb, tc):
            return 0.0

    pref = Fraction(1)
    for ta, tb, tc in triads:
        pref *= _tri_frac(ta, tb, tc)

    t_min = max(
        tj1 + tj2 + tj3,
        tj1 + tj5 + tj6,
        tj4 + tj2 + tj6,
        tj4 + tj5 + tj3,
    )
    t_max = min(
        tj1 + tj2 + tj4 + tj5,
        tj2 + tj3 + tj5 + tj6,
        tj3 + tj1 + tj6 + tj4,
    )
    total = Fraction(0)
    for tt in range(t_min, t_max + 2, 2):
        num = _fact2(tt + 2)
        den = (
            _fact2(tt - tj1 - tj2 - tj3)
            * _fact2(tt - tj1 - tj5 - tj6)
            * _fact2(tt - tj4 - tj2 - tj6)
            * _fact2(tt - tj4 - tj5 - tj3)
            * _fact2(tj1 + tj2 + tj4 + tj5 - tt)
            * _fact2(tj2 + tj3 + tj5 + tj6 - tt)
            * _fact2(tj3 + tj1 + tj6 + tj4 - tt)
        )
        total += Fraction((-1) ** (tt // 2) * num, den)
    return float(total) * sqrt(float(pref))


def wigner6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}."""
    return _wigner6j_t(
        _two_j(j1), _two_j(j2), _two_j(j3), _two_j(j4), _two_j(j5), _two_j(j6)
    )
