import json
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from effroth.algebra import IntPolynomial, algebraic_roots
from effroth.constants import BigConstant
from effroth.intervalsets import ApproximationFunction as Psi
from effroth.projgeom import RationalLine
from effroth.subspace import (
    AlgebraicLineTuple,
    FiberSpec,
    ball_census,
    empirical_ratio,
    fiber_bound,
    fiber_volume_mc,
    find_solutions,
    find_witness,
    limit_sum_bound,
    membership_J,
    subspace_illustration_audit,
    subspace_test,
)

CONJ, GOLDEN = algebraic_roots(IntPolynomial([-1, -1, 1]))  # (1 -+ sqrt 5) / 2


def golden_pair():
    return AlgebraicLineTuple.from_directions([[1, GOLDEN], [0, 1]])


# -- the certified inequality ---------------------------------------------------

def test_zero_function_with_positive_product_is_violated():
    lines = AlgebraicLineTuple.from_directions([[1, GOLDEN], [0, 1]])
    assert subspace_test(lines, (1, 1), Psi.zero()) == "violated"


def test_huge_function_is_satisfied():
    # Psi(Q) = 4 Q^2 makes the right side at least 4 * defect >= 1 for defect >= 1/4
    lines = AlgebraicLineTuple.from_directions([[2, 1], [-1, 2]])
    for q in [(1, 0), (3, 7), (5, -2), (11, 13)]:
        assert subspace_test(lines, q, Psi.power(-2, 4)) == "satisfied"


@pytest.mark.parametrize("q", [(0, 1), (1, 0), (1, -1), (2, -3), (5, 8), (13, -21)])
@pytest.mark.parametrize("psi_value", [F(1, 2), F(1, 10), F(3, 1)])
def test_golden_pair_matches_high_precision_oracle(q, psi_value):
    lhs, rhs = oracles.golden_sides(q, psi_value)
    expected = "satisfied" if lhs <= rhs else "violated"
    assert subspace_test(golden_pair(), q, Psi.constant(psi_value)) == expected


def test_golden_solutions_match_brute_force(frozen):
    sols = find_solutions(golden_pair(), Psi.power(F(1, 2)), 50)
    assert [list(L.q) for L, _ in sols] == frozen["golden_solutions"]
    heights = [h for _, h in sols]
    assert heights == sorted(heights)


def irrational_pair():
    # no integer vector is orthogonal to either direction
    return AlgebraicLineTuple.from_directions([[1, GOLDEN], [1, CONJ]])


def test_solutions_examples():
    assert find_solutions(irrational_pair(), Psi.zero(), 30) == []
    # (1, 0) is orthogonal to the rational direction (0, 1)
    assert [L.q for L, _ in find_solutions(golden_pair(), Psi.zero(), 30)] == [(1, 0)]
    basis = AlgebraicLineTuple.from_directions([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    sols = {L.q for L, _ in find_solutions(basis, Psi.zero(), 3)}
    for L in RationalLine.from_vector([1, 2, 0]), RationalLine.from_vector([0, 1, 1]):
        assert L.q in sols  # orthogonal to a basis direction, so delta = 0
    assert RationalLine.from_vector([1, 1, 1]).q not in sols


def test_dependent_lines_rejected():
    lines = AlgebraicLineTuple.from_directions([[1, 2], [2, 4]])
    with pytest.raises(ValueError):
        subspace_test(lines, (1, 1), Psi.constant(1))


nonzero = st.fractions(-5, 5, max_denominator=7).filter(bool)
small_vec = st.tuples(st.integers(-9, 9), st.integers(-9, 9)).filter(any)


@settings(max_examples=40, deadline=None)
@given(nonzero, nonzero, small_vec, st.fractions(F(1, 20), 5, max_denominator=20))
def test_invariant_under_scaling_and_sign(c1, c2, q, psi_value):
    psi = Psi.constant(psi_value)
    plain = AlgebraicLineTuple.from_directions([[1, 2], [3, 1]])
    scaled = AlgebraicLineTuple.from_directions([[c1, 2 * c1], [3 * c2, c2]])
    base = subspace_test(plain, q, psi)
    assert subspace_test(scaled, q, psi) == base
    assert subspace_test(plain, tuple(-x for x in q), psi) == base
    g = subspace_test(golden_pair(), q, psi)
    assert subspace_test(golden_pair(), tuple(-x for x in q), psi) == g
    # tripling q keeps the left side and shrinks the right side when Psi is constant
    if subspace_test(golden_pair(), tuple(3 * x for x in q), psi) == "satisfied":
        assert g == "satisfied"


@settings(max_examples=20, deadline=None)
@given(st.fractions(F(1, 10), 2, max_denominator=20), st.fractions(F(1, 10), 1, max_denominator=20))
def test_shrinking_psi_never_adds_solutions(scale, shrink):
    big = {L.q for L, _ in find_solutions(golden_pair(), Psi.power(F(1, 2), scale), 25)}
    small = {L.q for L, _ in find_solutions(golden_pair(), Psi.power(F(1, 2), scale * shrink), 25)}
    assert small <= big


# -- membership -----------------------------------------------------------------

def test_membership_examples():
    assert not membership_J(irrational_pair(), Psi.zero(), 1, 1, 20)
    assert membership_J(golden_pair(), Psi.zero(), 1, 1, 20)
    lines = AlgebraicLineTuple.from_directions([[1, 0, 0], [1, 1, 0], [1, 1, 1]])
    sub, sols = find_witness(lines, Psi.zero(), 2, 1, 1)
    assert {L.q for L in sols} == {(0, 1, 0), (0, 0, 1)}
    assert sub.height_sq == 1


@pytest.mark.parametrize("Q1,Q2", [(1, 5), (3, 10), (6, 20), (30, 40)])
def test_membership_k1_is_a_filtered_scan(Q1, Q2):
    psi = Psi.power(F(1, 2))
    scan = [L for L, _ in find_solutions(golden_pair(), psi, Q2) if L.height_sq >= Q1 * Q1]
    assert membership_J(golden_pair(), psi, 1, Q1, Q2) == bool(scan)


# -- fiber volumes ---------------------------------------------------------------

def test_fiber_volume_examples():
    est = fiber_volume_mc(FiberSpec((0.0,), 1e-9, 2), samples=20000, seed=3)
    assert est.estimate == 0 and est.stderr > 0
    est = fiber_volume_mc(FiberSpec((0.0,), 0.1, 2), samples=200000, seed=1)
    assert est.estimate + 3 * est.stderr <= fiber_bound(2, 0.1)
    with pytest.raises(ValueError):
        FiberSpec((0.0,), 0.5, 2)


def test_fiber_volume_monotone_in_eta_with_common_seed():
    vals = [fiber_volume_mc(FiberSpec((0.3, -0.2), eta, 3), samples=50000, seed=11).estimate
            for eta in (0.01, 0.05, 0.1, 0.2, 0.4)]
    assert vals == sorted(vals)


def test_fiber_volume_reproducible():
    a = fiber_volume_mc(FiberSpec((0.1,), 0.2, 2), samples=30000, seed=5)
    b = fiber_volume_mc(FiberSpec((0.1,), 0.2, 2), samples=30000, seed=5)
    assert a == b


# -- the effective bound -----------------------------------------------------------

def test_limit_sum_bound_vanishes_on_empty_range_and_large_height():
    rep = limit_sum_bound((2,), 1, 2, Psi.power(3), 10, 9, None)
    assert rep.bound.is_zero


def test_limit_sum_bound_linear_in_constant():
    one = limit_sum_bound((2,), 1, 2, Psi.power(3), 2, 50, (100,), C=BigConstant.of(7))
    two = limit_sum_bound((2,), 1, 2, Psi.power(3), 2, 50, (100,), C=BigConstant.of(14))
    with mpmath.workdps(40):
        assert abs(two.bound.ln_value - one.bound.ln_value - mpmath.log(2)) < mpmath.mpf(10) ** -25


def test_limit_sum_infinite_series_encloses_nsum():
    rep = limit_sum_bound((2,), 1, 2, Psi.power(1), 2, None, None, C=BigConstant.of(1))
    with mpmath.workdps(30):
        ref = -mpmath.zeta(2, derivative=1)  # sum of log(q) / q^2
        assert rep.sum_term.ln_lo <= mpmath.log(ref) <= rep.sum_term.ln_hi


def test_limit_sum_series_against_direct_sum():
    rep = limit_sum_bound((2,), 1, 2, Psi.power(2), 3, 400, None, C=BigConstant.of(1))
    direct = mpmath.fsum(mpmath.mpf(q) ** -3 * mpmath.log(q) for q in range(3, 401))
    assert float(rep.sum_term.ln_lo) <= float(mpmath.log(direct)) + 1e-12
    assert float(rep.sum_term.ln_hi) >= float(mpmath.log(direct)) - 1e-12


def test_illustration_audit_reports_failures_honestly():
    rep = subspace_illustration_audit()
    statuses = {item["name"]: item["status"] for item in rep["items"]}
    assert len(statuses) == 6
    assert all(s.split(" ")[0] in ("pass", "fail", "indeterminate") for s in statuses.values())
    assert json.dumps(rep, sort_keys=True, default=str) == json.dumps(subspace_illustration_audit(), sort_keys=True, default=str)


# -- empirical ratio ------------------------------------------------------------------

@pytest.mark.parametrize("H", [4, 6, 8])
def test_pair_ratio_matches_exhaustive_oracle(frozen, H):
    ref = frozen["pair_ratio_psi_cube"][str(H)]
    r = empirical_ratio((2,), 1, Psi.power(3), 2, 10, (H,))
    assert (r.hits, r.total) == (ref["hits"], ref["total"])
    assert r.undecided == 0


def test_pair_ratio_regression_value():
    r = empirical_ratio((2,), 1, Psi.power(3), 2, 10, (20,))
    assert r.exact_ratio == F(16488863, 115725291)


def test_zero_function_hits_only_lines_on_a_hyperplane():
    # 1 - sqrt 2 and sqrt 2 - 1 lie exactly on (1, 1)-perp and (1, -1)-perp
    N = len(ball_census(2, 2).values)
    r = empirical_ratio((2,), 1, Psi.zero(), 1, 2, (2,))
    assert r.hits == N * (N - 1) - (N - 2) * (N - 3)


def test_zero_function_without_special_points():
    r = empirical_ratio((2,), 1, Psi.zero(), 3, 4, (2,))
    assert r.hits == 0


def test_huge_function_counts_every_pair():
    s = ball_census(2, 4).values
    U = np.stack([1 - s * s, 2 * s], axis=1)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    defect = np.abs(U[:, None, 0] * U[None, :, 1] - U[:, None, 1] * U[None, :, 0])
    wide = int(np.count_nonzero(defect >= 0.25))  # the diagonal has defect 0
    r = empirical_ratio((2,), 1, Psi.power(-2, 4), 1, 2, (4,))
    assert r.hits >= wide


def test_sampled_ratio_for_three_lines_is_reproducible():
    a = empirical_ratio((2, 2), 1, Psi.power(3), 1, 5, (3, 3), samples=200, seed=4)
    b = empirical_ratio((2, 2), 1, Psi.power(3), 1, 5, (3, 3), samples=200, seed=4)
    assert a == b and not a.exact and a.lo <= a.ratio <= a.hi
