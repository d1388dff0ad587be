from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effroth.algebra import (
    AlgebraicNumber,
    IntPolynomial,
    algebraic_roots,
    compare_to_rational,
    content,
    is_irreducible,
    normalize,
    real_roots,
    shift_by_integer,
    sturm_count,
)


def P(*coeffs):
    return IntPolynomial(list(coeffs))


@pytest.mark.parametrize("coeffs,expected", [((4, 0, 2), 2), ((-1, 1, 1), 1), ((0, -9, 0, 6), 3)])
def test_content(coeffs, expected):
    assert content(P(*coeffs)) == expected


def test_content_of_zero_polynomial_rejected():
    with pytest.raises(ValueError):
        content(P(0))


@pytest.mark.parametrize("coeffs,expected", [((-1, 1, 1), True), ((-1, 0, 1), False), ((4, 0, 0, 0, 1), False)])
def test_irreducibility(coeffs, expected):
    assert is_irreducible(P(*coeffs)) is expected


def test_irreducible_rejects_non_primitive():
    with pytest.raises(ValueError):
        is_irreducible(P(2, 0, 2))


def test_x4_plus_4_factorisation_by_multiplication():
    a, b = [2, -2, 1], [2, 2, 1]
    prod = [sum(a[i] * b[k - i] for i in range(3) if 0 <= k - i < 3) for k in range(5)]
    assert prod == [4, 0, 0, 0, 1]


def test_real_roots_examples():
    assert real_roots(P(1, 0, 1)) == []
    r = real_roots(P(-2, 0, 1))
    assert len(r) == 2
    assert r[0].lo <= -2**0.5 <= r[0].hi and r[1].lo <= 2**0.5 <= r[1].hi
    r = real_roots(P(-1, 1, 1))
    g = (5**0.5 - 1) / 2
    assert r[0].lo <= -g - 1 <= r[0].hi and r[1].lo <= g <= r[1].hi


def test_real_root_width_and_count():
    p = P(-3, 1, 0, 1)
    for iv in real_roots(p, Fraction(1, 2**30)):
        assert iv.width <= Fraction(1, 2**30)
        assert sturm_count(p, iv.lo, iv.hi) == 1


def _golden():
    return algebraic_roots(P(-1, 1, 1))[1]


def test_compare_to_rational_examples():
    sqrt2 = algebraic_roots(P(-2, 0, 1))[1]
    assert compare_to_rational(sqrt2, Fraction(3, 2)) < 0
    assert compare_to_rational(_golden(), Fraction(1, 2)) > 0
    assert compare_to_rational(sqrt2, sqrt2.isolation.lo - 1) > 0


def test_shift_examples():
    g = _golden()
    # (x - 1)^2 + (x - 1) - 1 = x^2 - x - 1
    s = shift_by_integer(g, 1)
    assert s.minpoly == P(-1, -1, 1)
    assert abs(float(s) - 1.6180339887) < 1e-9
    assert shift_by_integer(g, 0) == g
    r = shift_by_integer(algebraic_roots(P(-2, 0, 1))[1], -1)
    assert r.minpoly == P(-1, 2, 1)


def test_normalize_sign_and_content():
    assert normalize(P(2, 0, -4)) == P(-1, 0, 2)


polys = st.lists(st.integers(-6, 6), min_size=3, max_size=4).filter(lambda c: c[-1] != 0 and any(c[:-1]))


@settings(max_examples=60, deadline=None)
@given(polys)
def test_root_endpoint_signs_alternate(coeffs):
    p = normalize(P(*coeffs))
    if not is_irreducible(p):
        return
    for iv in real_roots(p):
        assert p.sign_at(iv.lo) * p.sign_at(iv.hi) < 0


@settings(max_examples=80, deadline=None)
@given(polys, st.fractions(min_value=-8, max_value=8, max_denominator=50))
def test_compare_matches_high_precision(coeffs, r):
    p = normalize(P(*coeffs))
    if not is_irreducible(p) or p.degree < 2:
        return
    for a in algebraic_roots(p):
        with mpmath.workdps(40):
            roots = [mpmath.re(z) for z in mpmath.polyroots(p.coeffs[::-1], extraprec=80) if abs(mpmath.im(z)) < 1e-30]
            x = min(roots, key=lambda z: abs(z - float(a)))
            expected = 1 if x > mpmath.mpf(r.numerator) / r.denominator else -1
        assert compare_to_rational(a, r) == expected


@settings(max_examples=50, deadline=None)
@given(polys, st.integers(-5, 5))
def test_shift_roundtrip(coeffs, n):
    p = normalize(P(*coeffs))
    if not is_irreducible(p):
        return
    for a in algebraic_roots(p):
        b = shift_by_integer(a, n)
        assert b.degree == a.degree and is_irreducible(b.minpoly)
        assert shift_by_integer(b, -n) == a


def test_algebraic_equality_is_by_minpoly_and_overlap():
    g = _golden()
    assert g == AlgebraicNumber(g.minpoly, g.refine(Fraction(1, 2**40)).isolation)
    assert g != algebraic_roots(P(-1, 1, 1))[0]
