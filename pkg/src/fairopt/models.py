"""Benchmark families: fair p-median location and fair resource allocation.

Facility instances place customers in the plane, open p of the customer
sites and assign every customer to one open site; the outcome is the
demand-weighted transport cost per customer.  The objective mixes total
cost and unfairness as gamma * sum(r) + (1 - gamma) * nu(r), with the
Gini deviation additionally divided by the number of customers.

Allocation instances split a budget R across n subjects with per-unit
efficiencies a_i, outcome u_i = a_i x_i and objective
-efficiency_weight * 1'u + gamma * nu(u) / wmax; dividing the measure by
its largest dual weight puts efficiency and fairness on the same scale.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .measures import MeasureKind, gini_weights, measure_wmax, order_based
from .reform import CONSTRAINT, OBJECTIVE, RELATIVE, InvalidP, ProblemInstance


@dataclass
class FacilityInstance:
    coords: np.ndarray  # planar customer coordinates, sites == customers
    demands: np.ndarray
    p: int
    gamma: float
    measure: MeasureKind
    seed: int | None = None

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        self.demands = np.asarray(self.demands, dtype=float)
        n = len(self.demands)
        if self.coords.shape != (n, 2):
            raise ValueError("coords must be (n, 2)")
        if not np.all(self.demands > 0):
            raise ValueError("demands must be positive")
        if not 1 <= self.p < n:
            raise InvalidP(f"need 1 <= p < {n}, got p={self.p}")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "type": "facility",
            "coords": [[float(a), float(b)] for a, b in self.coords],
            "demands": [float(d) for d in self.demands],
            "p": int(self.p),
            "gamma": float(self.gamma),
            "measure": self.measure.to_json(),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "FacilityInstance":
        return cls(coords=np.array(d["coords"]), demands=np.array(d["demands"]),
                   p=int(d["p"]), gamma=float(d["gamma"]),
                   measure=MeasureKind.from_json(d["measure"]), seed=d.get("seed"))


@dataclass
class AllocationInstance:
    a: np.ndarray  # per-unit efficiencies
    R: float
    gamma: float
    measure: MeasureKind
    K: float | None = None  # optional per-subject cap
    budget_equality: bool = False
    efficiency_weight: float = 1.0
    mode: str = OBJECTIVE
    eta: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        if not np.all(np.isfinite(self.a)) or not np.all(self.a > 0):
            raise ValueError("efficiencies must be positive and finite")
        if len(self.a) < 2:
            raise ValueError("need at least 2 subjects")
        if not self.R > 0:
            raise ValueError("budget R must be positive")
        if self.K is not None and not self.K > 0:
            raise ValueError("cap K must be positive when given")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.a)

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "type": "allocation",
            "a": [float(v) for v in self.a],
            "R": float(self.R),
            "K": None if self.K is None else float(self.K),
            "gamma": float(self.gamma),
            "eta": float(self.eta),
            "mode": self.mode,
            "budget_equality": bool(self.budget_equality),
            "efficiency_weight": float(self.efficiency_weight),
            "measure": self.measure.to_json(),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "AllocationInstance":
        return cls(a=np.array(d["a"]), R=float(d["R"]),
                   K=None if d.get("K") is None else float(d["K"]),
                   gamma=float(d["gamma"]), eta=float(d.get("eta", 0.0)),
                   mode=d.get("mode", OBJECTIVE),
                   budget_equality=bool(d.get("budget_equality", False)),
                   efficiency_weight=float(d.get("efficiency_weight", 1.0)),
                   measure=MeasureKind.from_json(d["measure"]), seed=d.get("seed"))


def flp_cost_matrix(fi: FacilityInstance) -> np.ndarray:
    """Demand-weighted Euclidean costs: entry (i, j) = d_i * dist(i, j)."""
    diff = fi.coords[:, None, :] - fi.coords[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    return fi.demands[:, None] * dist


def write_cost_csv(fi: FacilityInstance, path):
    cost = flp_cost_matrix(fi)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["customer"] + [f"site_{j + 1}" for j in range(cost.shape[1])])
        for i, row in enumerate(cost):
            writer.writerow([f"c_{i + 1}"] + [f"{v:.12g}" for v in row])


def _solving_measure(kind: MeasureKind, n: int) -> MeasureKind:
    """Envy has no catalog dual set; its measure equals (c/2) * Gini."""
    if kind.name == "envy":
        return order_based(tuple(kind.c / 2.0 * w for w in gini_weights(n)))
    return kind


def build_flp(fi: FacilityInstance) -> ProblemInstance:
    """Binary model: open p sites, assign each customer to one open site.

    Decision vector is [x_j (sites), y_ij (assignments, row major)]; the
    outcome map picks the assigned demand-weighted cost per customer.
    """
    n = len(fi.demands)
    cost = flp_cost_matrix(fi)
    n_x = n + n * n

    def y_col(i, j):
        return n + i * n + j

    A = np.zeros((n, n_x))
    for i in range(n):
        for j in range(n):
            A[i, y_col(i, j)] = cost[i, j]
    rows = []
    rows.append(({j: 1.0 for j in range(n)}, "=", float(fi.p)))
    for i in range(n):
        rows.append(({y_col(i, j): 1.0 for j in range(n)}, "=", 1.0))
    for i in range(n):
        for j in range(n):
            rows.append(({y_col(i, j): 1.0, j: -1.0}, "<=", 0.0))

    measure = _solving_measure(fi.measure, n)
    fair_scale = (1.0 - fi.gamma) / (n if fi.measure.name == "gini_deviation" else 1.0)
    return ProblemInstance(
        A=A,
        b=np.zeros(n),
        x_lb=np.zeros(n_x),
        x_ub=np.ones(n_x),
        x_integer=np.ones(n_x, dtype=bool),
        x_rows=rows,
        eff_x=np.zeros(n_x),
        eff_u=np.full(n, fi.gamma),
        measure=measure,
        mode=OBJECTIVE,
        gamma=fair_scale,
        u_nonneg=True,
        u_min=0.0,
        u_max=float(cost.max()),
        name="facility",
    )


def build_ra(ai: AllocationInstance) -> ProblemInstance:
    """LP model: u = diag(a) x, sum(x) <= R (or = R), 0 <= x <= cap."""
    n = ai.n
    cap = ai.R if ai.K is None else min(ai.K, ai.R)
    wmax = float(measure_wmax(_solving_measure(ai.measure, n), n))
    rows = [({j: 1.0 for j in range(n)}, "=" if ai.budget_equality else "<=", float(ai.R))]
    return ProblemInstance(
        A=np.diag(ai.a),
        b=np.zeros(n),
        x_lb=np.zeros(n),
        x_ub=np.full(n, cap),
        x_integer=np.zeros(n, dtype=bool),
        x_rows=rows,
        eff_x=np.zeros(n),
        eff_u=np.full(n, -float(ai.efficiency_weight)),
        measure=_solving_measure(ai.measure, n),
        mode=ai.mode,
        gamma=ai.gamma / wmax if ai.mode == OBJECTIVE else 0.0,
        eta=ai.eta,
        u_nonneg=True,
        u_min=0.0,
        u_max=float((ai.a * cap).max()),
        name="allocation",
    )


def random_flp(n_customers: int, p: int, gamma: float, measure: MeasureKind,
               seed: int) -> FacilityInstance:
    """Customers uniform on the unit square, demands uniform on [1, 100]."""
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, 1.0, size=(n_customers, 2))
    demands = rng.uniform(1.0, 100.0, size=n_customers)
    return FacilityInstance(coords=coords, demands=demands, p=p, gamma=gamma,
                            measure=measure, seed=seed)


def random_ra(n: int, gamma: float, measure: MeasureKind, seed: int,
              R: float = 100.0, K: float | None = None) -> AllocationInstance:
    """Efficiencies uniform on [1, 10]."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(1.0, 10.0, size=n)
    return AllocationInstance(a=a, R=R, gamma=gamma, measure=measure, K=K, seed=seed)


def dump_instance(instance, path):
    with open(path, "w") as fh:
        json.dump(instance.to_json(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_instance(path):
    with open(path) as fh:
        d = json.load(fh)
    if d.get("type") == "facility":
        return FacilityInstance.from_json(d)
    if d.get("type") == "allocation":
        return AllocationInstance.from_json(d)
    raise ValueError(f"unknown instance type {d.get('type')!r}")


def build_instance(instance) -> ProblemInstance:
    if isinstance(instance, FacilityInstance):
        return build_flp(instance)
    if isinstance(instance, AllocationInstance):
        return build_ra(instance)
    raise TypeError(f"cannot build {type(instance).__name__}")
