"""Brute-force reference implementations for the test suite.

None of these are used on a production code path.  They trade speed for
independence: permutation enumeration instead of sorting, lattice grids
instead of LP solves, raw ball sampling instead of closed-form support
maximizers.  Caps fail loudly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dualsets import DualSet
from .measures import _is_exact, eval_closed_form

MAX_PERMUTATION_N = 8
MAX_LATTICE_POINTS = 10_000_000
MAX_BINARY_VARS = 20


class TooLarge(ValueError):
    pass


class Infeasible(RuntimeError):
    pass


def permutation_sup(w, u) -> float:
    """max over all permutations p of sum_i w[p(i)] * u[i]."""
    w = tuple(w)
    u = tuple(u)
    if len(w) != len(u):
        raise ValueError("length mismatch")
    if len(w) > MAX_PERMUTATION_N:
        raise TooLarge(f"permutation enumeration capped at n={MAX_PERMUTATION_N}")
    exact = _is_exact(w) and _is_exact(u)
    add = sum if exact else math.fsum
    best = None
    for perm in itertools.permutations(range(len(w))):
        val = add(w[perm[i]] * u[i] for i in range(len(u)))
        if best is None or val > best:
            best = val
    return best


def sampled_support(ds: DualSet, u, resolution: float) -> float:
    """Support value over a dense lattice of feasible ball weights.

    Lattice points in [-r, r]^n at step resolution*r are kept when inside
    the q-ball, sorted ascending (q-norms are permutation invariant, so
    sorted points stay feasible), centered, and scored against sorted u.
    Lower bound on the true support within O(resolution * ||u||).
    """
    if ds.variant != "norm_ball":
        raise ValueError("sampled_support covers ball dual sets only")
    n = ds.n
    if n > 5:
        raise TooLarge("ball sampling capped at n=5")
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    r = ds.radius
    axis = np.arange(-r, r + resolution * r / 2, resolution * r)
    if len(axis) ** n > MAX_LATTICE_POINTS:
        raise TooLarge(f"{len(axis) ** n} lattice points exceed cap {MAX_LATTICE_POINTS}")
    su = np.sort(np.asarray(u, dtype=float))
    best = 0.0
    tail_grids = np.meshgrid(*([axis] * (n - 1)), indexing="ij")
    tail = np.column_stack([g.ravel() for g in tail_grids])
    for first in axis:
        pts = np.column_stack([np.full(len(tail), first), tail])
        if ds.q == math.inf:
            ok = np.abs(pts).max(axis=1) <= r * (1 + 1e-12)
        elif ds.q == 2:
            ok = (pts * pts).sum(axis=1) <= r * r * (1 + 1e-12)
        else:
            ok = np.abs(pts).sum(axis=1) <= r * (1 + 1e-12)
        pts = pts[ok]
        if len(pts) == 0:
            continue
        pts = np.sort(pts, axis=1)
        pts -= pts.mean(axis=1, keepdims=True)
        vals = pts @ su
        best = max(best, float(vals.max()))
    return best


@dataclass
class LatticeSpec:
    """Per-dimension (low, high, step) ranges for continuous enumeration."""

    ranges: list = field(default_factory=list)  # list of (lo, hi, step)

    def axes(self):
        out = []
        for lo, hi, step in self.ranges:
            if not step > 0:
                raise ValueError("lattice step must be positive")
            out.append(np.arange(lo, hi + step / 2, step))
        return out


def _row_ok(coeffs: dict, sense: str, rhs: float, x: np.ndarray, tol: float) -> bool:
    lhs = sum(c * x[j] for j, c in coeffs.items())
    if sense == "<=":
        return lhs <= rhs + tol
    if sense == ">=":
        return lhs >= rhs - tol
    return abs(lhs - rhs) <= tol


def lattice_solve(p, spec: LatticeSpec | None = None, tol: float = 1e-9) -> float:
    """Exhaustive minimum of the exact objective over a grid or over all
    binary assignments.

    Continuous instances need a LatticeSpec over at most 3 dimensions;
    all-binary instances up to 20 variables are enumerated exactly.
    Constraint modes filter by the closed-form measure value.  Raises
    Infeasible when no grid point is feasible.
    """
    from .reform import objective_value

    nx = p.A.shape[1]
    if bool(np.all(p.x_integer)) and spec is None:
        if nx > MAX_BINARY_VARS:
            raise TooLarge(f"binary enumeration capped at {MAX_BINARY_VARS} variables")
        candidates = (np.array(bits, dtype=float) for bits in itertools.product((0.0, 1.0), repeat=nx))
    else:
        if spec is None:
            raise ValueError("continuous instances need a LatticeSpec")
        axes = spec.axes()
        if len(axes) != nx:
            raise ValueError("spec dimension mismatch")
        if len(axes) > 3:
            raise TooLarge("continuous lattice capped at 3 dimensions")
        total = 1
        for a in axes:
            total *= len(a)
        if total > MAX_LATTICE_POINTS:
            raise TooLarge(f"{total} lattice points exceed cap {MAX_LATTICE_POINTS}")
        candidates = (np.array(pt) for pt in itertools.product(*axes))

    best = math.inf
    feasible = False
    for x in candidates:
        if any(x[j] < p.x_lb[j] - tol or x[j] > p.x_ub[j] + tol for j in range(nx)):
            continue
        if not all(_row_ok(c, s, r, x, tol) for c, s, r in p.x_rows):
            continue
        u = p.A @ x + p.b
        val = eval_closed_form(p.measure, u)
        if p.mode == "constraint":
            if val > p.eta + tol:
                continue
        elif p.mode == "relative":
            total_u = float(u.sum())
            from .measures import measure_wmax

            if val > p.eta * measure_wmax(p.measure, len(u)) * total_u + tol:
                continue
        feasible = True
        obj = objective_value(p, x, u)
        if obj < best:
            best = obj
    if not feasible:
        raise Infeasible("no lattice point satisfies the constraints")
    return best


def flp_enumerate(instance) -> float:
    """Exact facility-location optimum by enumerating open sets and
    assignments.

    With a zero fairness weight each customer takes its cheapest open
    facility; otherwise every assignment combination is scored, which is
    viable only for small instances.
    """
    from .models import flp_cost_matrix

    n = len(instance.demands)
    cost = flp_cost_matrix(instance)  # demand-weighted, n x n
    gamma_fair = (1.0 - instance.gamma)
    if instance.measure.name == "gini_deviation":
        gamma_fair /= n
    best = math.inf
    for open_set in itertools.combinations(range(n), instance.p):
        cols = cost[:, list(open_set)]
        if gamma_fair == 0.0:
            r = cols.min(axis=1)
            best = min(best, instance.gamma * float(r.sum()))
            continue
        if len(open_set) ** n > 2_000_000:
            raise TooLarge("assignment enumeration too large")
        for assign in itertools.product(range(len(open_set)), repeat=n):
            r = cols[np.arange(n), list(assign)]
            val = instance.gamma * float(r.sum()) + gamma_fair * float(
                eval_closed_form(instance.measure, r)
            )
            if val < best:
                best = val
    return best
