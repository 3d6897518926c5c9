"""Unit and property tests for the closed-form measures."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fairopt.measures as M
from fairopt.measures import (
    MeasureKind,
    NegativeOutcome,
    NonZeroSum,
    NotSorted,
    SignCondition,
    UnsupportedKind,
    distinguishing_pair,
    eval_closed_form,
    eval_order_based,
    eval_relative,
    gini_weights,
    measure_wmax,
    order_based,
    rawlsian_weights,
    telescoped_order_based,
    validate_weight,
)

ROW_A = (1, 2, Fraction(5, 2), Fraction(5, 2), Fraction(9, 2))


def dyadic_vec(rng, n, scale=1024):
    """Floats whose arithmetic differences and small sums are exact."""
    return rng.integers(-scale * 8, scale * 8, size=n) / float(scale)


# -- weight validation -------------------------------------------------------


def test_validate_weight_accepts_minimal_member():
    assert validate_weight((-1, 0, 1)).weights == (-1, 0, 1)


def test_validate_weight_accepts_gini_weights():
    assert validate_weight(gini_weights(5)).weights == (-8, -4, 0, 4, 8)


def test_validate_weight_rejects_zero_vector():
    with pytest.raises(SignCondition):
        validate_weight((0, 0, 0))


def test_validate_weight_rejects_descending():
    with pytest.raises(NotSorted):
        validate_weight((1, 0, -1))


def test_validate_weight_rejects_nonzero_sum():
    with pytest.raises(NonZeroSum):
        validate_weight((-1, 0, 2))


def test_validate_weight_rejects_wrong_signs():
    with pytest.raises(SignCondition):
        validate_weight((0, 0, 0, 0))


# -- evaluation examples ------------------------------------------------------


def test_order_based_gini_weights_row_a():
    assert eval_order_based(gini_weights(5), ROW_A) == 30


def test_order_based_constant_vector_is_zero():
    assert eval_order_based((-1, 0, 1), (7.5, 7.5, 7.5)) == 0.0


def test_order_based_matches_permutation_enumeration():
    # oracle value: max over all 6 permutations of (-1,0,1) paired with (3,1,2)
    from fairopt.oracle import permutation_sup

    assert permutation_sup((-1, 0, 1), (3, 1, 2)) == 2
    assert eval_order_based((-1, 0, 1), (3, 1, 2)) == 2


def test_closed_form_row_a_golden_cells():
    assert eval_closed_form(M.MAD, ROW_A) == 4
    assert math.isclose(eval_closed_form(M.STD_DEV, ROW_A), math.sqrt(6.5), rel_tol=1e-15)
    assert eval_closed_form(M.SUM_MAX_PAIRWISE_DEVIATION, ROW_A) == Fraction(27, 2)
    assert eval_closed_form(M.envy(1.0), ROW_A) == 15


def test_rawlsian_gap_example():
    assert eval_closed_form(M.RAWLSIAN_GAP, (2, 5, 11)) == 4


def test_relative_examples():
    assert eval_relative(M.GINI_DEVIATION, (0, 0, 7)) == 1
    assert eval_relative(M.MAD, (4, 4, 4, 4)) == 0
    assert eval_relative(M.MAD, ROW_A) == Fraction(1, 5)


def test_relative_rejects_negative_outcomes():
    with pytest.raises(NegativeOutcome):
        eval_relative(M.MAD, (-1.0, 2.0, 3.0))


def test_wmax_examples():
    assert measure_wmax(M.GINI_DEVIATION, 5) == 8
    assert measure_wmax(M.MAX_MAD, 4) == Fraction(3, 4)
    assert measure_wmax(M.SUM_MAX_PAIRWISE_DEVIATION, 6) == 6


def test_wmax_closed_forms():
    for n in range(2, 11):
        assert measure_wmax(M.RANGE, n) == 1
        assert measure_wmax(M.GINI_DEVIATION, n) == 2 * (n - 1)
        assert measure_wmax(M.MAD, n) == 2 * Fraction(n - 1, n)
        assert math.isclose(measure_wmax(M.STD_DEV, n), math.sqrt(1 - 1 / n), rel_tol=1e-14)
        assert measure_wmax(M.MAX_MAD, n) == Fraction(n - 1, n)
        assert measure_wmax(M.MAX_SUM_PAIRWISE_DEVIATION, n) == n - 1
        assert measure_wmax(M.SUM_MAX_PAIRWISE_DEVIATION, n) == n


# -- axioms (hypothesis) ------------------------------------------------------

finite_floats = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
outcomes = st.lists(finite_floats, min_size=2, max_size=8)


@given(outcomes, st.permutations(range(8)))
@settings(max_examples=150, deadline=None)
def test_axiom_symmetry_exact(u, perm):
    idx = [i for i in perm if i < len(u)]
    shuffled = [u[i] for i in idx]
    for kind in M.TABLE_KINDS:
        assert eval_closed_form(kind, shuffled) == eval_closed_form(kind, u)


@given(outcomes, finite_floats)
@settings(max_examples=150, deadline=None)
def test_axiom_translation_invariance(u, alpha):
    for kind in M.TABLE_KINDS:
        before = eval_closed_form(kind, u)
        after = eval_closed_form(kind, [v + alpha for v in u])
        assert after == pytest.approx(before, abs=1e-9 * (1 + abs(alpha)))


@given(outcomes, st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=150, deadline=None)
def test_axiom_positive_homogeneity(u, alpha):
    for kind in M.TABLE_KINDS:
        scaled = eval_closed_form(kind, [alpha * v for v in u])
        assert scaled == pytest.approx(alpha * eval_closed_form(kind, u), rel=1e-9, abs=1e-12)


@given(outcomes)
@settings(max_examples=150, deadline=None)
def test_axiom_normalization(u):
    for kind in M.TABLE_KINDS:
        val = eval_closed_form(kind, u)
        assert val >= 0
        if max(u) - min(u) < 1e-12:
            assert val <= 1e-9
        else:
            assert val > 0


@given(outcomes, st.data())
@settings(max_examples=150, deadline=None)
def test_axiom_schur_convexity_robin_hood(u, data):
    lo = min(range(len(u)), key=lambda i: u[i])
    hi = max(range(len(u)), key=lambda i: u[i])
    gap = u[hi] - u[lo]
    if gap <= 1e-9:
        return
    eps = data.draw(st.floats(min_value=0, max_value=gap, exclude_min=True, exclude_max=True))
    v = list(u)
    v[lo] += eps
    v[hi] -= eps
    for kind in M.TABLE_KINDS:
        assert eval_closed_form(kind, v) <= eval_closed_form(kind, u) + 1e-9 * (1 + abs(gap))


@given(outcomes, outcomes, st.floats(min_value=0, max_value=1))
@settings(max_examples=150, deadline=None)
def test_axiom_convexity(u1, u2, alpha):
    n = min(len(u1), len(u2))
    u1, u2 = u1[:n], u2[:n]
    if n < 2:
        return
    mix = [alpha * a + (1 - alpha) * b for a, b in zip(u1, u2)]
    for kind in M.TABLE_KINDS:
        lhs = eval_closed_form(kind, mix)
        rhs = alpha * eval_closed_form(kind, u1) + (1 - alpha) * eval_closed_form(kind, u2)
        assert lhs <= rhs + 1e-9 * (1 + abs(rhs))


@given(st.integers(3, 7), st.data())
@settings(max_examples=100, deadline=None)
def test_axiom_proportional_adjustment_exact_rationals(n, data):
    # exact arithmetic: increase the j-th smallest entry within its slack,
    # the measure moves by exactly eps * w_j
    denom = 16
    u = sorted(data.draw(st.lists(st.integers(-200, 200), min_size=n, max_size=n)))
    u = [Fraction(v, denom) for v in u]
    w = gini_weights(n)
    j = data.draw(st.integers(0, n - 1))
    slack = (u[j + 1] - u[j]) if j + 1 < n else Fraction(100)
    eps = slack * Fraction(data.draw(st.integers(0, 8)), 8)
    bumped = list(u)
    bumped[j] += eps
    assert eval_order_based(w, bumped) == eval_order_based(w, u) + eps * w[j]


@given(st.integers(3, 8), st.data())
@settings(max_examples=150, deadline=None)
def test_telescoping_identity(n, data):
    u = data.draw(st.lists(finite_floats, min_size=n, max_size=n))
    g = sorted(data.draw(st.lists(st.floats(-50, 50, allow_nan=False), min_size=n, max_size=n)))
    mean = sum(g) / n
    w = [v - mean for v in g]
    if not (w[0] < -1e-6 and w[-1] > 1e-6):
        return
    direct = eval_order_based(w, u)
    tele = telescoped_order_based(w, u)
    assert tele == pytest.approx(direct, rel=1e-9, abs=1e-9)


# -- exact identities ---------------------------------------------------------


def test_equivalences_exact():
    # divisions by n appear in the mean, so exactness needs rational inputs
    rng = np.random.default_rng(0)
    for _ in range(500):
        n = int(rng.integers(2, 9))
        u = [Fraction(int(v), 64) for v in rng.integers(-8192, 8192, size=n)]
        assert eval_closed_form(M.RANGE, u) == eval_closed_form(M.MAX_PAIRWISE_DEVIATION, u)
        assert eval_closed_form(M.MAX_SUM_PAIRWISE_DEVIATION, u) == n * eval_closed_form(M.MAX_MAD, u)
        if n == 3:
            assert eval_closed_form(M.MAD, u) == 2 * eval_closed_form(M.MAX_MAD, u)
            assert eval_closed_form(M.GINI_DEVIATION, u) == 4 * eval_closed_form(M.RANGE, u)


def test_envy_collapse_exact():
    rng = np.random.default_rng(1)
    for _ in range(500):
        n = int(rng.integers(2, 9))
        u = dyadic_vec(rng, n)
        assert eval_closed_form(M.envy(1.0), u) * 2 == eval_closed_form(M.GINI_DEVIATION, u)
    # general rational scale, exact arithmetic
    u = (Fraction(1), Fraction(5, 2), Fraction(7, 3))
    c = Fraction(3, 7)
    assert eval_closed_form(M.envy(c), u) == c / 2 * eval_closed_form(M.GINI_DEVIATION, u)


def test_rawlsian_identity_exact():
    rng = np.random.default_rng(2)
    for _ in range(500):
        n = int(rng.integers(2, 9))
        u = dyadic_vec(rng, n)
        gap = eval_closed_form(M.RAWLSIAN_GAP, u)
        mean = math.fsum(u) / n
        assert -min(u) == pytest.approx(-mean + gap, abs=1e-12)
        w = rawlsian_weights(n)
        assert eval_order_based(w, [Fraction(v).limit_denominator(10**9) for v in u]) == pytest.approx(gap, abs=1e-12)


def test_rawlsian_weights_are_valid():
    for n in range(2, 9):
        validate_weight(rawlsian_weights(n))


@given(st.integers(2, 8), st.data())
@settings(max_examples=200, deadline=None)
def test_relative_in_unit_interval(n, data):
    u = data.draw(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=n, max_size=n))
    for kind in M.TABLE_KINDS:
        rho = eval_relative(kind, u)
        assert -1e-12 <= rho <= 1 + 1e-12


# -- kinds, serialization, witnesses -----------------------------------------


def test_kind_json_round_trip():
    for kind in M.TABLE_KINDS + (M.RAWLSIAN_GAP, M.envy(2.5), order_based((-1.0, 0.0, 1.0))):
        assert MeasureKind.from_json(kind.to_json()) == kind
    assert M.GINI_DEVIATION.to_json() == {"kind": "gini_deviation"}
    assert M.envy(1.0).to_json() == {"kind": "envy", "c": 1.0}


def test_kind_parse_specs():
    assert MeasureKind.parse("gini_deviation") == M.GINI_DEVIATION
    assert MeasureKind.parse("order_based:[-1,0,1]") == order_based((-1.0, 0.0, 1.0))
    assert MeasureKind.parse("envy:2.0") == M.envy(2.0)
    with pytest.raises(UnsupportedKind):
        MeasureKind.parse("theil_index")


def test_envy_requires_positive_scale():
    with pytest.raises(UnsupportedKind):
        M.envy(0.0)


def test_distinguishing_pairs_cover_table():
    # each catalogued witness really separates its pair
    names = [k.name for k in M.TABLE_KINDS]
    for i, a in enumerate(M.TABLE_KINDS):
        for b in M.TABLE_KINDS[i + 1:]:
            pair = distinguishing_pair(a, b, 5)
            key = {a.name, b.name}
            if key in ({"range", "max_pairwise_deviation"}, {"max_mad", "max_sum_pairwise_deviation"}):
                assert pair is None
                continue
            assert pair is not None, (a.name, b.name)
            u1, u2 = pair
            va = (eval_closed_form(a, u1), eval_closed_form(a, u2))
            vb = (eval_closed_form(b, u1), eval_closed_form(b, u2))
            one_constant = (va[0] == va[1]) != (vb[0] == vb[1])
            assert one_constant, (a.name, b.name, va, vb)
    assert names  # silence linters
