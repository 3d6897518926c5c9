"""The brute-force reference implementations themselves."""

import math

import numpy as np
import pytest

import fairopt.measures as M
from fairopt.dualsets import dual_set_of
from fairopt.models import build_flp, build_ra, random_flp, AllocationInstance
from fairopt.oracle import (
    Infeasible,
    LatticeSpec,
    TooLarge,
    flp_enumerate,
    lattice_solve,
    permutation_sup,
    sampled_support,
)
from fairopt.solver import OPTIMAL, solve
from fairopt.reform import reformulate_order_based_objective


def test_permutation_sup_examples():
    assert permutation_sup((-1, 0, 1), (3, 1, 2)) == 2
    assert permutation_sup((-1, 0, 1), (5, 5, 5)) == 0
    assert permutation_sup((-8, -4, 0, 4, 8), (1, 2, 2.5, 2.5, 4.5)) == 30


def test_permutation_sup_cap():
    with pytest.raises(TooLarge):
        permutation_sup((-1,) + (0,) * 7 + (1,), tuple(range(9)))


def test_sampled_support_mad_row_a():
    got = sampled_support(dual_set_of(M.MAD, 5), [1, 2, 2.5, 2.5, 4.5], 0.1)
    assert 4 - 0.05 <= got <= 4 + 1e-9


def test_sampled_support_constant_vector():
    got = sampled_support(dual_set_of(M.MAX_MAD, 4), [2, 2, 2, 2], 0.2)
    assert got == pytest.approx(0.0, abs=1e-12)


def test_sampled_support_caps_dimension():
    with pytest.raises(TooLarge):
        sampled_support(dual_set_of(M.MAD, 6), [1, 2, 3, 4, 5, 6], 0.1)


def test_lattice_solve_matches_lp_on_tiny_allocation():
    inst = AllocationInstance(a=np.array([1.0, 3.0]), R=4.0, gamma=0.8, measure=M.RANGE)
    p = build_ra(inst)
    spec = LatticeSpec(ranges=[(0.0, 4.0, 0.01), (0.0, 4.0, 0.01)])
    grid_opt = lattice_solve(p, spec)
    model = reformulate_order_based_objective(p, np.array([-1.0, 1.0]))
    st = solve(model)
    assert st.status == OPTIMAL
    # grid optimum within one step of the LP optimum (Lipschitz slack)
    assert grid_opt >= st.objective - 1e-9
    assert grid_opt <= st.objective + 0.25


def test_lattice_solve_detects_infeasible():
    inst = AllocationInstance(a=np.array([1.0, 1.0]), R=1.0, gamma=0.0,
                              measure=M.RANGE, mode="constraint", eta=0.0,
                              budget_equality=True)
    p = build_ra(inst)
    p.x_rows = p.x_rows + [({0: 1.0, 1: -1.0}, ">=", 0.6)]  # x1 - x2 >= 0.6 forces inequality
    spec = LatticeSpec(ranges=[(0.0, 1.0, 0.05), (0.0, 1.0, 0.05)])
    with pytest.raises(Infeasible):
        lattice_solve(p, spec)


def test_flp_enumerate_matches_milp_pure_efficiency():
    for n, p_count, seed in ((5, 2, 0), (5, 3, 1), (6, 2, 2), (6, 3, 3)):
        fi = random_flp(n, p_count, 1.0, M.RANGE, seed=seed)
        p = build_flp(fi)
        w = np.zeros(n)
        w[0], w[-1] = -1.0, 1.0
        st = solve(reformulate_order_based_objective(p, w))
        assert st.status == OPTIMAL
        assert flp_enumerate(fi) == pytest.approx(st.objective, rel=1e-9)


def test_flp_enumerate_with_fairness_matches_ccg():
    from fairopt.solver import ccg_objective

    fi = random_flp(5, 2, 0.5, M.MAD, seed=3)
    p = build_flp(fi)
    rep = ccg_objective(p, dual_set_of(M.MAD, 5), 1e-8)
    assert rep.objective == pytest.approx(flp_enumerate(fi), rel=1e-7)
