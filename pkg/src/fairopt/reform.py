"""Solver-agnostic LP/MILP models for fairness-promoting problems.

A ProblemInstance couples an affine outcome map u = A x + b with linear
decision constraints, a linear efficiency objective c'x + d'u, a fairness
measure, and one of three modes: a weighted fairness term in the
objective, a fairness budget nu(u) <= eta, or a relative budget
nu(u) <= eta * wmax * sum(u).

The order-based reformulation replaces the sorted-outcome term
sum_i w_i u_(i) by assignment-LP duals: variables lam, the with rows
lam_i + the_j >= u_i w_j make min 1'(lam+the) equal the measure value.
Masters for column-and-constraint generation stack one such block per
generated weight vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measures import DimensionMismatch, MeasureKind, UnsupportedKind, measure_wmax

OBJECTIVE = "objective"
CONSTRAINT = "constraint"
RELATIVE = "relative"

CUT_DEDUP_TOL = 1e-9


class ModeMismatch(ValueError):
    pass


class EmptyCuts(ValueError):
    pass


class InvalidModel(ValueError):
    pass


class InvalidP(ValueError):
    pass


# ---------------------------------------------------------------------------
# Linear model container + LP writer
# ---------------------------------------------------------------------------


@dataclass
class Variable:
    name: str
    lb: float = 0.0
    ub: float = math.inf
    integer: bool = False
    group: str = "aux"


@dataclass
class LinearRow:
    coeffs: dict
    sense: str  # "<=", "=", ">="
    rhs: float
    name: str = ""


@dataclass
class LinearModel:
    variables: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    def add_variable(self, name, lb=-math.inf, ub=math.inf, integer=False, group="aux") -> int:
        self.variables.append(Variable(name, float(lb), float(ub), bool(integer), group))
        return len(self.variables) - 1

    def add_row(self, coeffs: dict, sense: str, rhs: float, name: str = ""):
        if sense not in ("<=", "=", ">="):
            raise InvalidModel(f"bad sense {sense!r}")
        self.rows.append(LinearRow(dict(coeffs), sense, float(rhs), name))

    def set_objective(self, coeffs: dict):
        self.objective = dict(coeffs)

    def add_objective_term(self, idx: int, coef: float):
        self.objective[idx] = self.objective.get(idx, 0.0) + coef

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def group_count(self, group: str) -> int:
        return sum(1 for v in self.variables if v.group == group)

    def group_indices(self, group: str) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.group == group]

    def validate(self):
        nv = len(self.variables)
        names = set()
        for v in self.variables:
            if v.name in names:
                raise InvalidModel(f"duplicate variable name {v.name!r}")
            names.add(v.name)
            if v.lb > v.ub:
                raise InvalidModel(f"{v.name}: lb {v.lb} > ub {v.ub}")
            for bound in (v.lb, v.ub):
                if math.isnan(bound):
                    raise InvalidModel(f"{v.name}: NaN bound")
        for row in self.rows:
            for j, c in row.coeffs.items():
                if not 0 <= j < nv:
                    raise InvalidModel(f"row {row.name!r} references undeclared variable {j}")
                if not math.isfinite(c):
                    raise InvalidModel(f"row {row.name!r} has nonfinite coefficient")
            if not math.isfinite(row.rhs):
                raise InvalidModel(f"row {row.name!r} has nonfinite rhs")
        for j, c in self.objective.items():
            if not 0 <= j < nv:
                raise InvalidModel(f"objective references undeclared variable {j}")
            if not math.isfinite(c):
                raise InvalidModel("objective has nonfinite coefficient")
        return self

    # -- export ------------------------------------------------------------

    def to_arrays(self):
        """Dense (c, A_ub, b_ub, A_eq, b_eq, bounds, integer_mask) for a solver."""
        nv = len(self.variables)
        c = np.zeros(nv)
        for j, coef in self.objective.items():
            c[j] = coef
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for row in self.rows:
            arr = np.zeros(nv)
            for j, coef in row.coeffs.items():
                arr[j] = coef
            if row.sense == "<=":
                ub_rows.append(arr)
                ub_rhs.append(row.rhs)
            elif row.sense == ">=":
                ub_rows.append(-arr)
                ub_rhs.append(-row.rhs)
            else:
                eq_rows.append(arr)
                eq_rhs.append(row.rhs)
        A_ub = np.vstack(ub_rows) if ub_rows else None
        b_ub = np.array(ub_rhs) if ub_rows else None
        A_eq = np.vstack(eq_rows) if eq_rows else None
        b_eq = np.array(eq_rhs) if eq_rows else None
        bounds = [(v.lb if math.isfinite(v.lb) else None, v.ub if math.isfinite(v.ub) else None)
                  for v in self.variables]
        integer = np.array([v.integer for v in self.variables])
        return c, A_ub, b_ub, A_eq, b_eq, bounds, integer

    def lp_format(self, name: str = "model") -> str:
        """CPLEX LP text with Minimize / Subject To / Bounds / Generals sections.

        Coefficients print with 17 significant digits for bit-exact reload.
        """

        def num(x: float) -> str:
            return format(float(x), ".17g")

        def terms(coeffs: dict) -> str:
            parts = []
            for j in sorted(coeffs):
                c = coeffs[j]
                if c == 0:
                    continue
                sign = "-" if c < 0 else "+"
                parts.append(f"{sign} {num(abs(c))} {self.variables[j].name}")
            if not parts:
                return "0 " + self.variables[0].name if self.variables else "0"
            out = " ".join(parts)
            return out[2:] if out.startswith("+ ") else out

        lines = [f"\\ {name}", "Minimize", f" obj: {terms(self.objective)}", "Subject To"]
        for i, row in enumerate(self.rows):
            rname = row.name or f"c{i + 1}"
            lines.append(f" {rname}: {terms(row.coeffs)} {row.sense} {num(row.rhs)}")
        lines.append("Bounds")
        for v in self.variables:
            lo = "-inf" if not math.isfinite(v.lb) else num(v.lb)
            hi = "+inf" if not math.isfinite(v.ub) else num(v.ub)
            if not math.isfinite(v.lb) and not math.isfinite(v.ub):
                lines.append(f" {v.name} free")
            else:
                lines.append(f" {lo} <= {v.name} <= {hi}")
        generals = [v.name for v in self.variables if v.integer]
        if generals:
            lines.append("Generals")
            for g in generals:
                lines.append(f" {g}")
        lines.append("End")
        return "\n".join(lines) + "\n"

    def write_lp(self, path, name: str = "model"):
        with open(path, "w") as fh:
            fh.write(self.lp_format(name))


# ---------------------------------------------------------------------------
# Problem instances
# ---------------------------------------------------------------------------


@dataclass
class ProblemInstance:
    """Fairness-promoting problem with affine outcomes u = A x + b."""

    A: np.ndarray
    b: np.ndarray
    x_lb: np.ndarray
    x_ub: np.ndarray
    x_integer: np.ndarray
    x_rows: list  # (coeffs dict over x indices, sense, rhs)
    eff_x: np.ndarray
    eff_u: np.ndarray
    measure: MeasureKind
    mode: str = OBJECTIVE
    gamma: float = 0.0
    eta: float = 0.0
    u_nonneg: bool = False
    u_min: float | None = None
    u_max: float | None = None
    name: str = "instance"

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.x_lb = np.asarray(self.x_lb, dtype=float)
        self.x_ub = np.asarray(self.x_ub, dtype=float)
        self.x_integer = np.asarray(self.x_integer, dtype=bool)
        self.eff_x = np.asarray(self.eff_x, dtype=float)
        self.eff_u = np.asarray(self.eff_u, dtype=float)
        n_sub, n_x = self.A.shape
        if n_sub < 2:
            raise DimensionMismatch("need at least 2 subjects")
        if self.b.shape != (n_sub,) or self.eff_u.shape != (n_sub,):
            raise DimensionMismatch("outcome-side shapes inconsistent")
        if self.x_lb.shape != (n_x,) or self.x_ub.shape != (n_x,) or self.eff_x.shape != (n_x,):
            raise DimensionMismatch("decision-side shapes inconsistent")
        if self.mode not in (OBJECTIVE, CONSTRAINT, RELATIVE):
            raise ModeMismatch(f"unknown mode {self.mode!r}")
        if self.gamma < 0 or self.eta < 0:
            raise ValueError("gamma and eta must be nonnegative")
        if self.mode == RELATIVE:
            if not 0 <= self.eta <= 1:
                raise ValueError("relative bound eta must lie in [0, 1]")
            if not self.u_nonneg:
                raise ModeMismatch("relative mode needs the u_nonneg guarantee flag")

    @property
    def n_subjects(self) -> int:
        return self.A.shape[0]

    @property
    def n_x(self) -> int:
        return self.A.shape[1]


def outcome_bounds(p: ProblemInstance) -> tuple[float, float] | None:
    """(U_min, U_max): user-supplied, else interval arithmetic on A x + b.

    Returns None when the decision box leaves an outcome unbounded.
    """
    if p.u_min is not None and p.u_max is not None:
        return float(p.u_min), float(p.u_max)
    with np.errstate(invalid="ignore"):
        at_lb = np.where(p.A == 0.0, 0.0, p.A * p.x_lb)
        at_ub = np.where(p.A == 0.0, 0.0, p.A * p.x_ub)
    lo = p.b + np.minimum(at_lb, at_ub).sum(axis=1)
    hi = p.b + np.maximum(at_lb, at_ub).sum(axis=1)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        return None
    return float(lo.min()), float(hi.max())


def efficiency_value(p: ProblemInstance, x, u) -> float:
    return float(p.eff_x @ np.asarray(x, dtype=float) + p.eff_u @ np.asarray(u, dtype=float))


def objective_value(p: ProblemInstance, x, u) -> float:
    """Exact objective (efficiency plus weighted measure in objective mode)."""
    from .measures import eval_closed_form

    eff = efficiency_value(p, x, u)
    if p.mode == OBJECTIVE:
        return eff + p.gamma * float(eval_closed_form(p.measure, np.asarray(u, dtype=float)))
    return eff


# ---------------------------------------------------------------------------
# Model builders
# ---------------------------------------------------------------------------


def _base_model(p: ProblemInstance) -> tuple[LinearModel, list[int], list[int]]:
    m = LinearModel()
    n_sub, n_x = p.A.shape
    x_idx = [m.add_variable(f"x_{j + 1}", p.x_lb[j], p.x_ub[j], bool(p.x_integer[j]), "x")
             for j in range(n_x)]
    ub = outcome_bounds(p)
    u_lo, u_hi = (ub if ub is not None else (-math.inf, math.inf))
    u_idx = [m.add_variable(f"u_{i + 1}", u_lo, u_hi, False, "u") for i in range(n_sub)]
    for i in range(n_sub):
        coeffs = {x_idx[j]: p.A[i, j] for j in range(n_x) if p.A[i, j] != 0.0}
        coeffs[u_idx[i]] = coeffs.get(u_idx[i], 0.0) - 1.0
        m.add_row(coeffs, "=", -p.b[i], name=f"link_{i + 1}")
    for k, (coeffs, sense, rhs) in enumerate(p.x_rows):
        m.add_row({x_idx[j]: c for j, c in coeffs.items()}, sense, rhs, name=f"xcon_{k + 1}")
    return m, x_idx, u_idx


def _dual_block(m: LinearModel, u_idx: list[int], w, k: int,
                bounds: tuple[float, float] | None) -> tuple[list[int], list[int]]:
    """Add lam^k, the^k and the rows lam_i + the_j >= u_i w_j."""
    n = len(u_idx)
    w = np.asarray(w, dtype=float)
    if bounds is not None:
        umin, umax = bounds
        lam_bar = (umax - umin) * float(np.abs(w).max())
        lam_idx = [m.add_variable(f"lam_{k}_{i + 1}", 0.0, lam_bar, False, "lam") for i in range(n)]
        the_idx = []
        for j in range(n):
            lo = min(umax * w[j], umin * w[j]) - lam_bar
            hi = max(umax * w[j], umin * w[j])
            the_idx.append(m.add_variable(f"the_{k}_{j + 1}", lo, hi, False, "the"))
    else:
        lam_idx = [m.add_variable(f"lam_{k}_{i + 1}", -math.inf, math.inf, False, "lam")
                   for i in range(n)]
        the_idx = [m.add_variable(f"the_{k}_{j + 1}", -math.inf, math.inf, False, "the")
                   for j in range(n)]
    for i in range(n):
        for j in range(n):
            coeffs = {lam_idx[i]: 1.0, the_idx[j]: 1.0, u_idx[i]: -w[j]}
            m.add_row(coeffs, ">=", 0.0, name=f"cut{k}_{i + 1}_{j + 1}")
    return lam_idx, the_idx


def _effective_bounds(p: ProblemInstance, use_dual_bounds: bool):
    return outcome_bounds(p) if use_dual_bounds else None


def _check_weight_dim(p: ProblemInstance, w):
    if len(tuple(w)) != p.n_subjects:
        raise DimensionMismatch("weight length does not match subject count")


def reformulate_order_based_objective(p: ProblemInstance, w,
                                      use_dual_bounds: bool = True) -> LinearModel:
    """Single-weight objective reformulation.

    Objective: eff_x'x + eff_u'u + gamma * 1'(lam + the) subject to
    lam_i + the_j >= u_i w_j, the outcome link and the decision rows.
    """
    if p.mode != OBJECTIVE:
        raise ModeMismatch("objective reformulation needs objective mode")
    _check_weight_dim(p, w)
    m, x_idx, u_idx = _base_model(p)
    lam_idx, the_idx = _dual_block(m, u_idx, w, 0, _effective_bounds(p, use_dual_bounds))
    obj = {x_idx[j]: p.eff_x[j] for j in range(p.n_x) if p.eff_x[j] != 0.0}
    for i in range(p.n_subjects):
        if p.eff_u[i] != 0.0:
            obj[u_idx[i]] = p.eff_u[i]
    for i in range(p.n_subjects):
        obj[lam_idx[i]] = obj.get(lam_idx[i], 0.0) + p.gamma
        obj[the_idx[i]] = obj.get(the_idx[i], 0.0) + p.gamma
    m.set_objective(obj)
    return m.validate()


def _efficiency_objective(m: LinearModel, p: ProblemInstance, x_idx, u_idx):
    obj = {x_idx[j]: p.eff_x[j] for j in range(p.n_x) if p.eff_x[j] != 0.0}
    for i in range(p.n_subjects):
        if p.eff_u[i] != 0.0:
            obj[u_idx[i]] = p.eff_u[i]
    m.set_objective(obj)


def reformulate_order_based_constraint(p: ProblemInstance, w,
                                       use_dual_bounds: bool = True) -> LinearModel:
    """Budget form: 1'(lam + the) <= eta with the same dual rows."""
    if p.mode != CONSTRAINT:
        raise ModeMismatch("constraint reformulation needs constraint mode")
    _check_weight_dim(p, w)
    m, x_idx, u_idx = _base_model(p)
    lam_idx, the_idx = _dual_block(m, u_idx, w, 0, _effective_bounds(p, use_dual_bounds))
    m.add_row({i: 1.0 for i in lam_idx + the_idx}, "<=", p.eta, name="budget_0")
    _efficiency_objective(m, p, x_idx, u_idx)
    return m.validate()


def reformulate_relative_constraint(p: ProblemInstance, w, wmax: float,
                                    use_dual_bounds: bool = True) -> LinearModel:
    """Relative budget: 1'(lam + the) - eta * wmax * 1'u <= 0.

    Valid because the normalizer wmax * sum(u) is linear in u and the
    instance guarantees u >= 0.
    """
    if p.mode != RELATIVE:
        raise ModeMismatch("relative reformulation needs relative mode")
    if not p.u_nonneg:
        raise ModeMismatch("relative mode needs the u_nonneg guarantee flag")
    _check_weight_dim(p, w)
    m, x_idx, u_idx = _base_model(p)
    lam_idx, the_idx = _dual_block(m, u_idx, w, 0, _effective_bounds(p, use_dual_bounds))
    coeffs = {i: 1.0 for i in lam_idx + the_idx}
    for i in u_idx:
        coeffs[i] = coeffs.get(i, 0.0) - p.eta * wmax
    m.add_row(coeffs, "<=", 0.0, name="budget_0")
    _efficiency_objective(m, p, x_idx, u_idx)
    return m.validate()


def dedup_cuts(cuts) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for w in cuts:
        w = np.asarray(w, dtype=float)
        if not any(np.abs(w - v).max() <= CUT_DEDUP_TOL for v in out):
            out.append(w)
    return out


def build_ccg_master(p: ProblemInstance, cuts, use_dual_bounds: bool = True) -> LinearModel:
    """Master with one dual block per generated weight vector.

    Objective mode adds an epigraph variable delta with rows
    delta >= 1'(lam^k + the^k); budget modes add one budget row per cut.
    The zero weight is a valid initial cut.  Duplicate cuts are merged.
    """
    cuts = dedup_cuts(cuts)
    if not cuts:
        raise EmptyCuts("masters need at least one cut (the zero weight works)")
    for w in cuts:
        _check_weight_dim(p, w)
    m, x_idx, u_idx = _base_model(p)
    bounds = _effective_bounds(p, use_dual_bounds)
    if p.mode == OBJECTIVE:
        delta = m.add_variable("delta", 0.0, math.inf, False, "delta")
        for k, w in enumerate(cuts):
            lam_idx, the_idx = _dual_block(m, u_idx, w, k, bounds)
            coeffs = {delta: 1.0}
            for i in lam_idx + the_idx:
                coeffs[i] = coeffs.get(i, 0.0) - 1.0
            m.add_row(coeffs, ">=", 0.0, name=f"epi_{k}")
        obj = {x_idx[j]: p.eff_x[j] for j in range(p.n_x) if p.eff_x[j] != 0.0}
        for i in range(p.n_subjects):
            if p.eff_u[i] != 0.0:
                obj[u_idx[i]] = p.eff_u[i]
        obj[delta] = obj.get(delta, 0.0) + p.gamma
        m.set_objective(obj)
    else:
        if p.mode == RELATIVE and not p.u_nonneg:
            raise ModeMismatch("relative mode needs the u_nonneg guarantee flag")
        wmax = measure_wmax(p.measure, p.n_subjects) if p.mode == RELATIVE else None
        for k, w in enumerate(cuts):
            lam_idx, the_idx = _dual_block(m, u_idx, w, k, bounds)
            coeffs = {i: 1.0 for i in lam_idx + the_idx}
            if p.mode == RELATIVE:
                for i in u_idx:
                    coeffs[i] = coeffs.get(i, 0.0) - p.eta * float(wmax)
                m.add_row(coeffs, "<=", 0.0, name=f"budget_{k}")
            else:
                m.add_row(coeffs, "<=", p.eta, name=f"budget_{k}")
        _efficiency_objective(m, p, x_idx, u_idx)
    return m.validate()


def traditional_mad_model(p: ProblemInstance) -> LinearModel:
    """Baseline with z_i >= +-(u_i - mean u); objective eff + gamma * 1'z."""
    if p.measure.name != "mad":
        raise UnsupportedKind("traditional MAD baseline needs the mad measure")
    if p.mode != OBJECTIVE:
        raise ModeMismatch("baseline models are objective-mode only")
    m, x_idx, u_idx = _base_model(p)
    n = p.n_subjects
    z_idx = [m.add_variable(f"z_{i + 1}", 0.0, math.inf, False, "z") for i in range(n)]
    for i in range(n):
        up = {z_idx[i]: 1.0}
        dn = {z_idx[i]: 1.0}
        for j in range(n):
            mean_c = 1.0 / n
            up[u_idx[j]] = up.get(u_idx[j], 0.0) + (mean_c - (1.0 if j == i else 0.0))
            dn[u_idx[j]] = dn.get(u_idx[j], 0.0) + ((1.0 if j == i else 0.0) - mean_c)
        m.add_row(up, ">=", 0.0, name=f"mad_up_{i + 1}")
        m.add_row(dn, ">=", 0.0, name=f"mad_dn_{i + 1}")
    obj = {x_idx[j]: p.eff_x[j] for j in range(p.n_x) if p.eff_x[j] != 0.0}
    for i in range(n):
        if p.eff_u[i] != 0.0:
            obj[u_idx[i]] = p.eff_u[i]
    for i in z_idx:
        obj[i] = obj.get(i, 0.0) + p.gamma
    m.set_objective(obj)
    return m.validate()


def traditional_gini_model(p: ProblemInstance) -> LinearModel:
    """Baseline with z_{i,i'} >= +-(u_i - u_i') over all ordered pairs."""
    if p.measure.name != "gini_deviation":
        raise UnsupportedKind("traditional Gini baseline needs the gini_deviation measure")
    if p.mode != OBJECTIVE:
        raise ModeMismatch("baseline models are objective-mode only")
    m, x_idx, u_idx = _base_model(p)
    n = p.n_subjects
    z_idx = {}
    for i in range(n):
        for j in range(n):
            z_idx[i, j] = m.add_variable(f"z_{i + 1}_{j + 1}", 0.0, math.inf, False, "z")
            up = {z_idx[i, j]: 1.0}
            up[u_idx[i]] = up.get(u_idx[i], 0.0) - 1.0
            up[u_idx[j]] = up.get(u_idx[j], 0.0) + 1.0
            dn = {z_idx[i, j]: 1.0}
            dn[u_idx[i]] = dn.get(u_idx[i], 0.0) + 1.0
            dn[u_idx[j]] = dn.get(u_idx[j], 0.0) - 1.0
            m.add_row(up, ">=", 0.0, name=f"gini_up_{i + 1}_{j + 1}")
            m.add_row(dn, ">=", 0.0, name=f"gini_dn_{i + 1}_{j + 1}")
    obj = {x_idx[j]: p.eff_x[j] for j in range(p.n_x) if p.eff_x[j] != 0.0}
    for i in range(n):
        if p.eff_u[i] != 0.0:
            obj[u_idx[i]] = p.eff_u[i]
    for idx in z_idx.values():
        obj[idx] = obj.get(idx, 0.0) + p.gamma
    m.set_objective(obj)
    return m.validate()
