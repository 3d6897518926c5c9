"""Bundled MILP backend and the two generation loops."""

import itertools
import math

import numpy as np
import pytest

import fairopt.measures as M
from fairopt.dualsets import dual_set_contains, dual_set_of, finite_vertices, vertices
from fairopt.models import AllocationInstance, build_flp, build_ra, random_flp, random_ra
from fairopt.reform import CONSTRAINT, OBJECTIVE, LinearModel, build_ccg_master
from fairopt.solver import (
    INFEASIBLE,
    ITER_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    CcgReport,
    NonConvergence,
    SolveLimits,
    ccg_constraint,
    ccg_objective,
    iteration_cap,
    solve,
)


def tiny_lp(rhs=3.0):
    m = LinearModel()
    x = m.add_variable("x_1", 0.0, math.inf, group="x")
    m.add_row({x: 1.0}, ">=", rhs)
    m.set_objective({x: 1.0})
    return m


def test_solve_tiny_lp():
    st = solve(tiny_lp())
    assert st.status == OPTIMAL
    assert st.objective == pytest.approx(3.0, abs=1e-12)


def test_solve_detects_infeasible_row():
    m = LinearModel()
    x = m.add_variable("x_1", 0.0, 1.0)
    m.add_row({x: 0.0}, ">=", 1.0)
    m.set_objective({x: 1.0})
    assert solve(m).status == INFEASIBLE


def test_solve_detects_unbounded():
    m = LinearModel()
    x = m.add_variable("x_1", -math.inf, math.inf)
    m.set_objective({x: 1.0})
    assert solve(m).status == UNBOUNDED


def test_solve_small_knapsack_milp():
    # max 5a + 4b + 3c st 2a+3b+c <= 5, binary -> min form
    m = LinearModel()
    vals = (5.0, 4.0, 3.0)
    wts = (2.0, 3.0, 1.0)
    idx = [m.add_variable(f"x_{i + 1}", 0.0, 1.0, integer=True) for i in range(3)]
    m.add_row({i: w for i, w in zip(idx, wts)}, "<=", 5.0)
    m.set_objective({i: -v for i, v in zip(idx, vals)})
    st = solve(m)
    best = max(
        sum(v for take, v in zip(bits, vals) if take)
        for bits in itertools.product((0, 1), repeat=3)
        if sum(w for take, w in zip(bits, wts) if take) <= 5
    )
    assert st.status == OPTIMAL
    assert st.objective == pytest.approx(-best, abs=1e-9)
    assert np.allclose(st.x, np.round(st.x))


def test_solve_p_median_matches_enumeration():
    from fairopt.oracle import flp_enumerate
    from fairopt.reform import reformulate_order_based_objective

    fi = random_flp(5, 2, 1.0, M.RANGE, seed=20)
    p = build_flp(fi)
    st = solve(reformulate_order_based_objective(p, (-1.0, 0.0, 0.0, 0.0, 1.0)))
    assert st.status == OPTIMAL
    assert st.objective == pytest.approx(flp_enumerate(fi), rel=1e-9)


def test_solve_node_limit_reports_iter_limit():
    fi = random_flp(7, 3, 0.2, M.MAD, seed=21)
    p = build_flp(fi)
    master = build_ccg_master(p, [np.zeros(7)])
    st = solve(master, SolveLimits(nodes=1))
    assert st.status in (ITER_LIMIT, OPTIMAL)  # optimal only if root is integral


def test_solver_determinism():
    fi = random_flp(6, 2, 0.3, M.MAD, seed=22)
    p = build_flp(fi)
    ds = dual_set_of(M.MAD, 6)
    r1 = ccg_objective(p, ds, 1e-6)
    r2 = ccg_objective(p, ds, 1e-6)
    assert [it.cut for it in r1.iterations] == [it.cut for it in r2.iterations]
    assert [(it.lb, it.ub) for it in r1.iterations] == [(it.lb, it.ub) for it in r2.iterations]


# -- objective-mode generation loop -----------------------------------------------


def test_ccg_singleton_two_iterations():
    inst = random_ra(4, 0.5, M.GINI_DEVIATION, seed=23)
    p = build_ra(inst)
    rep = ccg_objective(p, dual_set_of(M.GINI_DEVIATION, 4), 1e-9)
    assert rep.status == OPTIMAL
    assert len(rep.iterations) <= 2
    assert rep.gap <= 1e-9


def test_ccg_bounds_monotone_and_cut_membership():
    rng = np.random.default_rng(24)
    for seed in range(10):
        n = int(rng.integers(3, 7))
        kind = (M.MAD, M.MAX_MAD, M.SUM_MAX_PAIRWISE_DEVIATION)[seed % 3]
        inst = random_ra(n, float(rng.uniform(0.2, 1.5)), kind, seed=seed)
        p = build_ra(inst)
        ds = dual_set_of(kind, n)
        rep = ccg_objective(p, ds, 1e-7)
        assert rep.status == OPTIMAL
        lbs = [it.lb for it in rep.iterations]
        ubs = [it.ub for it in rep.iterations]
        assert all(a <= b + 1e-9 for a, b in zip(lbs, lbs[1:]))
        assert all(a >= b - 1e-9 for a, b in zip(ubs, ubs[1:]))
        for it in rep.iterations:
            assert dual_set_contains(ds, np.array(it.cut), tol=1e-9)


def test_ccg_finite_set_terminates_within_vertex_count():
    for n in (4, 5, 6):
        ds = dual_set_of(M.SUM_MAX_PAIRWISE_DEVIATION, n)
        inst = random_ra(n, 0.8, M.SUM_MAX_PAIRWISE_DEVIATION, seed=n + 30)
        p = build_ra(inst)
        rep = ccg_objective(p, ds, 1e-9)
        assert rep.status == OPTIMAL
        assert len(rep.iterations) <= len(ds.V) + 1


def test_ccg_infeasible_master_reports_infeasible():
    inst = random_ra(3, 0.5, M.MAD, seed=33)
    p = build_ra(inst)
    p.x_rows = p.x_rows + [({0: 1.0}, ">=", 1e6)]  # x_1 >= 1e6 conflicts with budget
    rep = ccg_objective(p, dual_set_of(M.MAD, 3), 1e-6)
    assert rep.status == INFEASIBLE


def test_ccg_rejects_bad_eps():
    inst = random_ra(3, 0.5, M.MAD, seed=34)
    p = build_ra(inst)
    with pytest.raises(ValueError):
        ccg_objective(p, dual_set_of(M.MAD, 3), 0.0)


def test_iteration_caps():
    assert iteration_cap(dual_set_of(M.MAD, 5)) == 200
    assert iteration_cap(dual_set_of(M.GINI_DEVIATION, 5)) == 10
    assert iteration_cap(dual_set_of(M.SUM_MAX_PAIRWISE_DEVIATION, 5)) == 40


def test_nonconvergence_raises_with_partial_report():
    inst = random_ra(5, 1.0, M.MAD, seed=35)
    p = build_ra(inst)
    with pytest.raises(NonConvergence) as err:
        ccg_objective(p, dual_set_of(M.MAD, 5), 1e-12, max_iterations=1)
    assert isinstance(err.value.report, CcgReport)
    assert len(err.value.report.iterations) == 1


def test_report_serialization():
    inst = random_ra(4, 0.4, M.MAD, seed=36)
    p = build_ra(inst)
    rep = ccg_objective(p, dual_set_of(M.MAD, 4), 1e-7)
    payload = rep.to_json()
    assert payload["schema"] == 1
    assert payload["status"] == "optimal"
    assert len(payload["iterations"]) == len(rep.iterations)
    csv_text = rep.iterations_csv()
    assert csv_text.splitlines()[0] == "j,LB,UB,gap"
    assert len(csv_text.splitlines()) == len(rep.iterations) + 1


# -- budget-mode generation loop -----------------------------------------------


def test_ccg_constraint_inactive_budget_one_iteration():
    inst = random_ra(4, 0.0, M.MAD, seed=37, R=10.0)
    inst.mode = CONSTRAINT
    inst.eta = 1e7
    p = build_ra(inst)
    rep = ccg_constraint(p, dual_set_of(M.MAD, 4))
    assert rep.status == OPTIMAL
    assert len(rep.iterations) == 1
    # budget inactive: pure efficiency optimum puts everything on max a
    assert rep.objective == pytest.approx(-10.0 * float(np.max(p.A)), rel=1e-8)


def test_ccg_constraint_eta_zero_infeasible_when_forced_unequal():
    inst = AllocationInstance(a=np.array([1.0, 2.0]), R=3.0, gamma=0.0, measure=M.MAD,
                              K=1.5, budget_equality=True, mode=CONSTRAINT, eta=0.0)
    p = build_ra(inst)
    rep = ccg_constraint(p, dual_set_of(M.MAD, 2))
    assert rep.status == INFEASIBLE


def test_ccg_constraint_matches_all_vertex_master():
    inst = random_ra(5, 0.0, M.MAD, seed=38, R=10.0)
    inst.mode = CONSTRAINT
    inst.eta = 1.0
    p = build_ra(inst)
    ds = dual_set_of(M.MAD, 5)
    rep = ccg_constraint(p, ds)
    st = solve(build_ccg_master(p, vertices(ds)))
    assert rep.status == OPTIMAL
    assert rep.objective == pytest.approx(st.objective, rel=1e-6)
    assert rep.measure_value <= inst.eta * (1 + 1e-6)
