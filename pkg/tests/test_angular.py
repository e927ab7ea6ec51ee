"""Coupling coefficients against an exact symbolic oracle and sum rules."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Rational
from sympy.physics.wigner import clebsch_gordan as sym_cg
from sympy.physics.wigner import wigner_3j as sym_3j
from sympy.physics.wigner import wigner_6j as sym_6j

from cbsim.angular import clebsch_gordan, wigner3j, wigner6j

TOL = 1e-14


def _r(x):
    return Rational(round(2 * x), 2)


def _js(max_twice):
    return [t / 2.0 for t in range(0, max_twice + 1)]


def _ms(j):
    return [-j + k for k in range(round(2 * j) + 1)]


def test_matches_symbolic_3j_exhaustively_small_j():
    for j1 in _js(4):
        for j2 in _js(4):
            tmin, tmax = abs(j1 - j2), j1 + j2
            for tj3 in range(round(2 * tmin), round(2 * tmax) + 1, 2):
                j3 = tj3 / 2.0
                for m1 in _ms(j1):
                    for m2 in _ms(j2):
                        m3 = -m1 - m2
                        if abs(m3) > j3:
                            continue
                        got = wigner3j(j1, j2, j3, m1, m2, m3)
                        want = float(
                            sym_3j(_r(j1), _r(j2), _r(j3), _r(m1), _r(m2), _r(m3))
                        )
                        assert got == pytest.approx(want, abs=TOL)


@pytest.mark.parametrize(
    "j",
    [
        (3, 1, 4, 2, -1, -1),
        (3, 1, 3, -3, 0, 3),
        (2.5, 1.5, 2, 0.5, 0.5, -1),
        (4, 2, 3, 1, 1, -2),
        (5, 1, 5, -2, 1, 1),
        (3.5, 2.5, 1, 1.5, -0.5, -1),
    ],
)
def test_matches_symbolic_3j_spot_checks_larger_j(j):
    j1, j2, j3, m1, m2, m3 = j
    got = wigner3j(j1, j2, j3, m1, m2, m3)
    want = float(sym_3j(_r(j1), _r(j2), _r(j3), _r(m1), _r(m2), _r(m3)))
    assert got == pytest.approx(want, abs=TOL)


def test_matches_symbolic_6j_exhaustively_small_j():
    vals = _js(3)
    for j1 in vals:
        for j2 in vals:
            for j3 in vals:
                for j4 in vals:
                    for j5 in vals:
                        for j6 in vals:
                            got = wigner6j(j1, j2, j3, j4, j5, j6)
                            try:
                                want = float(
                                    sym_6j(*(map(_r, (j1, j2, j3, j4, j5, j6))))
                                )
                            except ValueError:
                                want = 0.0  # oracle rejects non-triangular input
                            assert got == pytest.approx(want, abs=TOL)


def test_matches_symbolic_6j_hyperfine_cases():
    # the couplings used for an alkali D2 line (J=1/2 -> J'=3/2, I=5/2)
    for Fp in (2, 3, 4):
        got = wigner6j(0.5, 1.5, 1, Fp, 3, 2.5)
        want = float(sym_6j(_r(0.5), _r(1.5), 1, Fp, 3, _r(2.5)))
        assert got == pytest.approx(want, abs=TOL)


def test_matches_symbolic_clebsch_gordan():
    for j1 in _js(6):
        j2 = 1
        tmin, tmax = abs(j1 - j2), j1 + j2
        for tj3 in range(round(2 * tmin), round(2 * tmax) + 1, 2):
            j3 = tj3 / 2.0
            for m1 in _ms(j1):
                for m2 in (-1, 0, 1):
                    m3 = m1 + m2
                    if abs(m3) > j3:
                        continue
                    got = clebsch_gordan(j1, m1, j2, m2, j3, m3)
                    want = float(
                        sym_cg(_r(j1), _r(j2), _r(j3), _r(m1), _r(m2), _r(m3))
                    )
                    assert got == pytest.approx(want, abs=TOL)


def test_selection_rules_give_zero():
    assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0  # triangle violated
    assert wigner3j(1, 1, 1, 1, 1, 1) == 0.0  # m1+m2+m3 != 0
    assert wigner3j(1, 1, 2, 2, 0, -2) == 0.0  # |m| > j
    assert clebsch_gordan(1, 0, 1, 0, 1, 0) == 0.0  # antisymmetric zero
    assert wigner6j(1, 1, 3, 1, 1, 1) == 0.0  # triangle violated


def test_rejects_non_half_integer():
    with pytest.raises(ValueError):
        wigner3j(0.3, 1, 1, 0, 0, 0)


_half = st.integers(min_value=0, max_value=6).map(lambda t: t / 2.0)


@st.composite
def _coupled(draw):
    j1 = draw(_half)
    j2 = draw(_half)
    tj3 = draw(
        st.integers(min_value=round(2 * abs(j1 - j2)), max_value=round(2 * (j1 + j2)))
    )
    if (tj3 + round(2 * (j1 + j2))) % 2:
        tj3 += 1 if tj3 < round(2 * (j1 + j2)) else -1
    return j1, j2, tj3 / 2.0


@given(_coupled())
@settings(max_examples=60, deadline=None)
def test_3j_orthogonality_in_j3(jjj):
    j1, j2, _ = jjj
    for m1 in _ms(j1):
        for m2 in _ms(j2):
            m3 = -m1 - m2
            total = 0.0
            tj3 = round(2 * abs(j1 - j2))
            while tj3 <= round(2 * (j1 + j2)):
                j3 = tj3 / 2.0
                if abs(m3) <= j3:
                    total += (2 * j3 + 1) * wigner3j(j1, j2, j3, m1, m2, m3) ** 2
                tj3 += 2
            assert total == pytest.approx(1.0, abs=1e-12)


@given(_coupled())
@settings(max_examples=60, deadline=None)
def test_3j_orthogonality_in_m(jjj):
    j1, j2, j3 = jjj
    for m3 in _ms(j3):
        total = 0.0
        for m1 in _ms(j1):
            m2 = -m3 - m1
            if abs(m2) > j2:
                continue
            total += wigner3j(j1, j2, j3, m1, m2, m3) ** 2
        assert total == pytest.approx(1.0 / (2 * j3 + 1), abs=1e-12)


@given(_coupled())
@settings(max_examples=40, deadline=None)
def test_3j_symmetries(jjj):
    j1, j2, j3 = jjj
    for m1 in _ms(j1):
        for m2 in _ms(j2):
            m3 = -m1 - m2
            if abs(m3) > j3:
                continue
            a = wigner3j(j1, j2, j3, m1, m2, m3)
            # cyclic permutation
            assert a == pytest.approx(wigner3j(j2, j3, j1, m2, m3, m1), abs=TOL)
            # odd permutation and m negation both give (-1)^(j1+j2+j3)
            sign = (-1.0) ** round(j1 + j2 + j3)
            assert sign * a == pytest.approx(
                wigner3j(j2, j1, j3, m2, m1, m3), abs=TOL
            )
            assert sign * a == pytest.approx(
                wigner3j(j1, j2, j3, -m1, -m2, -m3), abs=TOL
            )


def test_6j_orthogonality():
    # sum_x (2x+1) {a b x; c d p} {a b x; c d q} = delta_pq / (2p+1)
    cases = [(1, 2, 2, 1, 1, 1), (1.5, 1.5, 1.5, 1.5, 1, 2), (3, 1, 4, 1, 3, 4)]
    for a, b, c, d, p, q in cases:
        lo = max(abs(a - b), abs(c - d))
        hi = min(a + b, c + d)
        total = 0.0
        tx = round(2 * lo)
        while tx <= round(2 * hi):
            x = tx / 2.0
            total += (
                (2 * x + 1)
                * wigner6j(a, b, x, c, d, p)
                * wigner6j(a, b, x, c, d, q)
            )
            tx += 2
        want = (1.0 if p == q else 0.0) / (2 * p + 1)
        assert total == pytest.approx(want, abs=1e-12)


def test_clebsch_gordan_unitarity():
    for j1, j2 in [(3, 1), (2.5, 1), (1.5, 1.5), (2, 2)]:
        tj3 = round(2 * abs(j1 - j2))
        while tj3 <= round(2 * (j1 + j2)):
            j3 = tj3 / 2.0
            for m3 in _ms(j3):
                total = 0.0
                for m1 in _ms(j1):
                    m2 = m3 - m1
                    if abs(m2) > j2:
                        continue
                    total += clebsch_gordan(j1, m1, j2, m2, j3, m3) ** 2
                assert total == pytest.approx(1.0, abs=1e-12)
            tj3 += 2


def test_known_exact_values():
    assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1.0 / math.sqrt(3), abs=TOL)
    assert wigner3j(2, 2, 0, 0, 0, 0) == pytest.approx(1.0 / math.sqrt(5), abs=TOL)
    assert clebsch_gordan(0, 0, 1, 1, 1, 1) == pytest.approx(1.0, abs=TOL)
    assert wigner6j(1, 1, 1, 1, 1, 1) == pytest.approx(1.0 / 6.0, abs=TOL)
    assert wigner6j(1, 1, 2, 1, 1, 1) == pytest.approx(1.0 / 6.0, abs=TOL)
    assert wigner3j(3, 3, 0, 2, -2, 0) == pytest.approx(
        -1.0 / math.sqrt(7), abs=TOL
    )
