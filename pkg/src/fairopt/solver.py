"""MILP solving and column-and-constraint generation.

The bundled backend solves LP relaxations with scipy's HiGHS dual simplex
and runs a best-first branch-and-bound over the integer variables
(integrality tolerance 1e-6, optimality gap 1e-7).  Alternative backends
plug in by implementing the single `solve(model, limits)` entry point.

The generation loops alternate a relaxed master over a finite cut set of
weight vectors with a support-function subproblem that prices the most
violated weight:

* objective mode: lower bound from the master objective, upper bound from
  the incumbent's exact objective, stop at relative gap eps;
* budget mode: stop as soon as the master solution satisfies the true
  fairness budget, or report infeasibility of the master (hence of the
  full problem).
"""

from __future__ import annotations

import csv
import heapq
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .dualsets import DualSet, support_value, vertices
from .measures import measure_wmax
from .reform import (
    CONSTRAINT,
    OBJECTIVE,
    RELATIVE,
    LinearModel,
    ProblemInstance,
    build_ccg_master,
    efficiency_value,
)

INT_TOL = 1e-6
GAP_TOL = 1e-7

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITER_LIMIT = "iter_limit"
TIMEOUT = "timeout"


class BackendFailure(RuntimeError):
    pass


class NumericalBreakdown(RuntimeError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class SolveLimits:
    time: float | None = None
    nodes: int | None = None


@dataclass
class SolveStatus:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    nodes: int = 0


def _solve_lp(c, A_ub, b_ub, A_eq, b_eq, bounds):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs-ds")
    if res.status == 4:
        raise NumericalBreakdown(res.message)
    if res.status not in (0, 2, 3):
        raise BackendFailure(f"LP backend returned status {res.status}: {res.message}")
    return res


def solve(model: LinearModel, limits: SolveLimits | None = None) -> SolveStatus:
    """Exact MILP optimum via LP relaxation + best-first branch and bound."""
    model.validate()
    limits = limits or SolveLimits()
    c, A_ub, b_ub, A_eq, b_eq, bounds, integer = model.to_arrays()
    start = time.perf_counter()

    root = _solve_lp(c, A_ub, b_ub, A_eq, b_eq, bounds)
    if root.status == 2:
        return SolveStatus(INFEASIBLE, nodes=1)
    if root.status == 3:
        return SolveStatus(UNBOUNDED, nodes=1)
    int_idx = np.flatnonzero(integer)
    if len(int_idx) == 0:
        return SolveStatus(OPTIMAL, x=root.x, objective=float(root.fun), nodes=1)

    def fractional(x):
        vals = x[int_idx]
        frac = np.abs(vals - np.round(vals))
        worst = int(np.argmax(frac))
        return (int(int_idx[worst]), float(vals[worst])) if frac[worst] > INT_TOL else None

    best_x, best_obj = None, math.inf
    heap = []
    counter = 0
    heapq.heappush(heap, (float(root.fun), counter, bounds))
    nodes = 0
    status = OPTIMAL
    while heap:
        bound_est, _, nb = heapq.heappop(heap)
        if bound_est >= best_obj - GAP_TOL * max(1.0, abs(best_obj)):
            continue
        if limits.nodes is not None and nodes >= limits.nodes:
            status = ITER_LIMIT
            break
        if limits.time is not None and time.perf_counter() - start > limits.time:
            status = TIMEOUT
            break
        nodes += 1
        res = _solve_lp(c, A_ub, b_ub, A_eq, b_eq, nb)
        if res.status != 0:
            continue
        obj = float(res.fun)
        if obj >= best_obj - GAP_TOL * max(1.0, abs(best_obj)):
            continue
        frac = fractional(res.x)
        if frac is None:
            x = res.x.copy()
            x[int_idx] = np.round(x[int_idx])
            best_x, best_obj = x, obj
            continue
        j, v = frac
        lo, hi = nb[j]
        counter += 1
        down = list(nb)
        down[j] = (lo, math.floor(v))
        heapq.heappush(heap, (obj, counter, down))
        counter += 1
        up = list(nb)
        up[j] = (math.ceil(v), hi)
        heapq.heappush(heap, (obj, counter, up))

    if best_x is None:
        if status in (ITER_LIMIT, TIMEOUT):
            return SolveStatus(status, nodes=nodes)
        return SolveStatus(INFEASIBLE, nodes=nodes)
    return SolveStatus(status, x=best_x, objective=best_obj, nodes=nodes)


# ---------------------------------------------------------------------------
# Column-and-constraint generation
# ---------------------------------------------------------------------------


@dataclass
class CcgIteration:
    j: int
    lb: float
    ub: float
    cut: tuple
    master_time: float
    sub_time: float

    @property
    def gap(self) -> float:
        return _relative_gap(self.lb, self.ub)


@dataclass
class CcgReport:
    status: str
    iterations: list = field(default_factory=list)
    gap: float = math.inf
    x: np.ndarray | None = None
    u: np.ndarray | None = None
    objective: float | None = None
    measure_value: float | None = None

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "status": self.status,
            "objective": self.objective,
            "gap": None if math.isinf(self.gap) else self.gap,
            "x": None if self.x is None else [float(v) for v in self.x],
            "u": None if self.u is None else [float(v) for v in self.u],
            "measure_value": self.measure_value,
            "iterations": [
                {
                    "j": it.j,
                    "lb": None if math.isinf(it.lb) else it.lb,
                    "ub": None if math.isinf(it.ub) else it.ub,
                    "gap": None if math.isinf(it.gap) else it.gap,
                    "cut": [float(v) for v in it.cut],
                    "master_time": it.master_time,
                    "sub_time": it.sub_time,
                }
                for it in self.iterations
            ],
        }

    def iterations_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["j", "LB", "UB", "gap"])
        for it in self.iterations:
            writer.writerow([it.j, it.lb, it.ub, it.gap])
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.iterations_csv())


def _relative_gap(lb: float, ub: float) -> float:
    if math.isinf(ub) or math.isinf(lb):
        return math.inf
    if ub == 0.0:
        return ub - lb
    return (ub - lb) / abs(ub)


def iteration_cap(ds: DualSet) -> int:
    """10x the vertex count for finite sets, 200 for ball sets."""
    if ds.variant == "norm_ball":
        return 200
    if ds.variant == "singleton":
        return 10
    return 10 * len(ds.V)


def _split_solution(p: ProblemInstance, model: LinearModel, x_full: np.ndarray):
    x = x_full[model.group_indices("x")]
    u = x_full[model.group_indices("u")]
    return x, u


def ccg_objective(p: ProblemInstance, ds: DualSet, eps: float,
                  limits: SolveLimits | None = None,
                  max_iterations: int | None = None,
                  use_dual_bounds: bool = True) -> CcgReport:
    """Objective-mode generation loop (initial cut: the zero weight).

    LB tracks the master objective, UB the best exact objective of a
    master iterate; stops at relative gap below eps (absolute when UB is
    zero).  Raises NonConvergence past the iteration cap.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if p.mode != OBJECTIVE:
        raise ValueError("ccg_objective needs an objective-mode instance")
    cap = max_iterations if max_iterations is not None else iteration_cap(ds)
    cuts = [np.zeros(p.n_subjects)]
    lb, ub = -math.inf, math.inf
    report = CcgReport(status=OPTIMAL)
    best = None
    for j in range(1, cap + 1):
        t0 = time.perf_counter()
        master = build_ccg_master(p, cuts, use_dual_bounds=use_dual_bounds)
        st = solve(master, limits)
        master_time = time.perf_counter() - t0
        if st.status == INFEASIBLE:
            report.status = INFEASIBLE
            return report
        if st.status != OPTIMAL:
            report.status = st.status
            return report
        x_j, u_j = _split_solution(p, master, st.x)
        lb = max(lb, float(st.objective))

        t1 = time.perf_counter()
        d_j, w_j = support_value(ds, u_j)
        sub_time = time.perf_counter() - t1
        cand = efficiency_value(p, x_j, u_j) + p.gamma * d_j
        if cand < ub:
            ub = cand
            best = (x_j, u_j, d_j)
        report.iterations.append(
            CcgIteration(j, lb, ub, tuple(float(v) for v in w_j), master_time, sub_time))
        gap = _relative_gap(lb, ub)
        if gap < eps:
            report.status = OPTIMAL
            report.gap = gap
            report.x, report.u, report.measure_value = best[0], best[1], best[2]
            report.objective = ub
            return report
        cuts.append(w_j)
    raise NonConvergence(f"no convergence within {cap} iterations", report)


def ccg_constraint(p: ProblemInstance, ds: DualSet, eta: float | None = None,
                   limits: SolveLimits | None = None,
                   max_iterations: int | None = None,
                   use_dual_bounds: bool = True,
                   feas_tol: float = 1e-7) -> CcgReport:
    """Budget-mode generation loop.

    An infeasible master certifies infeasibility of the full problem.
    Otherwise the master solution is accepted once its true measure value
    meets the budget (eta, or eta * wmax * sum(u) in relative mode).
    """
    if p.mode not in (CONSTRAINT, RELATIVE):
        raise ValueError("ccg_constraint needs a budget-mode instance")
    eta = p.eta if eta is None else float(eta)
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    cap = max_iterations if max_iterations is not None else iteration_cap(ds)
    wmax = measure_wmax(p.measure, p.n_subjects) if p.mode == RELATIVE else None
    cuts = [np.zeros(p.n_subjects)]
    report = CcgReport(status=OPTIMAL)
    for j in range(1, cap + 1):
        t0 = time.perf_counter()
        master = build_ccg_master(p, cuts, use_dual_bounds=use_dual_bounds)
        st = solve(master, limits)
        master_time = time.perf_counter() - t0
        if st.status == INFEASIBLE:
            report.status = INFEASIBLE
            return report
        if st.status != OPTIMAL:
            report.status = st.status
            return report
        x_j, u_j = _split_solution(p, master, st.x)
        if p.mode == RELATIVE and float(u_j.min()) < -1e-7 * max(1.0, float(np.abs(u_j).max())):
            raise ValueError("relative mode produced negative outcomes; instance flag is wrong")

        t1 = time.perf_counter()
        d_j, w_j = support_value(ds, u_j)
        sub_time = time.perf_counter() - t1
        threshold = eta if p.mode == CONSTRAINT else eta * float(wmax) * float(u_j.sum())
        obj = efficiency_value(p, x_j, u_j)
        report.iterations.append(
            CcgIteration(j, obj, d_j, tuple(float(v) for v in w_j), master_time, sub_time))
        if d_j <= threshold + feas_tol * (1.0 + abs(threshold)):
            report.status = OPTIMAL
            report.gap = 0.0
            report.x, report.u = x_j, u_j
            report.objective = obj
            report.measure_value = d_j
            return report
        cuts.append(w_j)
    raise NonConvergence(f"no convergence within {cap} iterations", report)


def ccg_for_instance(p: ProblemInstance, ds: DualSet, eps: float = 1e-6,
                     limits: SolveLimits | None = None) -> CcgReport:
    if p.mode == OBJECTIVE:
        return ccg_objective(p, ds, eps, limits=limits)
    return ccg_constraint(p, ds, limits=limits)


def all_vertex_report(p: ProblemInstance, ds: DualSet,
                      limits: SolveLimits | None = None) -> SolveStatus:
    """Single master over the full vertex list; exact for polytope sets."""
    return solve(build_ccg_master(p, vertices(ds)), limits)
