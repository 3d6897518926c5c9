"""Closed-form fairness measures over outcome vectors.

An outcome vector u collects the per-subject impact of a decision.  All
measures here are deviation-type inequality measures: nonnegative, zero
exactly on constant vectors, symmetric, translation invariant and
positively homogeneous.  Order-based measures are additionally linear in
the sorted outcomes,

    value(u) = sum_i w_i * u_(i),

with ascending weights summing to zero and w_1 < 0 < w_N.  u_(i) denotes
the i-th smallest entry.

Evaluation uses plain Python arithmetic so that exact inputs (int,
Fraction) produce exact results; float inputs are accumulated with
math.fsum, which makes the result independent of summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

ZERO_SUM_TOL = 1e-9
ORDER_TOL = 1e-9


class DimensionMismatch(ValueError):
    pass


class NotSorted(ValueError):
    pass


class NonZeroSum(ValueError):
    pass


class SignCondition(ValueError):
    pass


class NegativeOutcome(ValueError):
    pass


class UnsupportedKind(ValueError):
    pass


def _is_exact(values: Iterable) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)


def _ssum(terms, exact: bool):
    return sum(terms) if exact else math.fsum(terms)


def _check_outcome(u: Sequence) -> tuple:
    u = tuple(u)
    if len(u) < 2:
        raise DimensionMismatch(f"outcome vector needs length >= 2, got {len(u)}")
    for v in u:
        if not isinstance(v, (int, Fraction)) and not math.isfinite(float(v)):
            raise ValueError("outcome entries must be finite")
    return u


def _mean(u: tuple, exact: bool):
    if exact:
        return Fraction(sum(u), len(u)) if all(isinstance(v, int) for v in u) else sum(u) / len(u)
    return math.fsum(u) / len(u)


@dataclass(frozen=True)
class WeightVector:
    """Ascending zero-sum weights with w_1 < 0 and w_N > 0."""

    weights: tuple

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)


def validate_weight(w: Sequence) -> WeightVector:
    """Check the three weight-set conditions and wrap the vector.

    Raises NotSorted, NonZeroSum or SignCondition.  Order and zero-sum
    checks use absolute tolerance 1e-9 for float input; exact input is
    checked exactly.
    """
    w = tuple(w)
    if len(w) < 2:
        raise DimensionMismatch("weight vector needs length >= 2")
    exact = _is_exact(w)
    tol = 0 if exact else ORDER_TOL
    for a, b in zip(w, w[1:]):
        if b < a - tol:
            raise NotSorted(f"weights must be nondecreasing, got {a} > {b}")
    total = _ssum(w, exact)
    if abs(total) > (0 if exact else ZERO_SUM_TOL):
        raise NonZeroSum(f"weights must sum to zero, got {total}")
    if not (w[0] < 0 and w[-1] > 0):
        raise SignCondition("weights need w_1 < 0 and w_N > 0")
    return WeightVector(w)


# ---------------------------------------------------------------------------
# Measure kinds
# ---------------------------------------------------------------------------

_TABLE_NAMES = (
    "range",
    "gini_deviation",
    "max_pairwise_deviation",
    "mad",
    "std_dev",
    "max_mad",
    "max_sum_pairwise_deviation",
    "sum_max_pairwise_deviation",
)
_EXTRA_NAMES = ("order_based", "rawlsian_gap", "envy")


@dataclass(frozen=True)
class MeasureKind:
    """Tag selecting a fairness measure.

    `weights` is set only for order_based kinds, `c` (a positive scale)
    only for envy.  Envy utilities are restricted to the affine family
    V(y) = c*y + V(0); that is the only family for which total envy is a
    convex fairness measure, and it collapses to (c/2) * Gini deviation.
    """

    name: str
    weights: tuple | None = None
    c: float | None = None

    def __post_init__(self):
        if self.name not in _TABLE_NAMES + _EXTRA_NAMES:
            raise UnsupportedKind(f"unknown measure kind {self.name!r}")
        if self.name == "order_based":
            if self.weights is None:
                raise UnsupportedKind("order_based needs a weight vector")
            validate_weight(self.weights)
        elif self.weights is not None:
            raise UnsupportedKind(f"{self.name} takes no weights")
        if self.name == "envy":
            if self.c is None or not self.c > 0:
                raise UnsupportedKind("envy needs a scale c > 0")
        elif self.c is not None:
            raise UnsupportedKind(f"{self.name} takes no scale")

    def to_json(self) -> dict:
        d = {"kind": self.name}
        if self.name == "order_based":
            d["weights"] = [float(v) for v in self.weights]
        if self.name == "envy":
            d["c"] = float(self.c)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "MeasureKind":
        name = d.get("kind")
        if name == "order_based":
            return cls(name, weights=tuple(d["weights"]))
        if name == "envy":
            return cls(name, c=float(d["c"]))
        return cls(name)

    @classmethod
    def parse(cls, spec: str) -> "MeasureKind":
        """Parse CLI measure specs like 'gini_deviation', 'order_based:[-1,0,1]', 'envy:1.0'."""
        name, _, arg = spec.partition(":")
        name = name.strip()
        if name == "order_based":
            if not arg:
                raise UnsupportedKind("order_based spec needs weights, e.g. order_based:[-1,0,1]")
            vals = arg.strip().strip("[]()")
            return cls(name, weights=tuple(float(v) for v in vals.split(",")))
        if name == "envy":
            return cls(name, c=float(arg) if arg else 1.0)
        if arg:
            raise UnsupportedKind(f"{name} takes no argument")
        return cls(name)


RANGE = MeasureKind("range")
GINI_DEVIATION = MeasureKind("gini_deviation")
MAX_PAIRWISE_DEVIATION = MeasureKind("max_pairwise_deviation")
MAD = MeasureKind("mad")
STD_DEV = MeasureKind("std_dev")
MAX_MAD = MeasureKind("max_mad")
MAX_SUM_PAIRWISE_DEVIATION = MeasureKind("max_sum_pairwise_deviation")
SUM_MAX_PAIRWISE_DEVIATION = MeasureKind("sum_max_pairwise_deviation")
RAWLSIAN_GAP = MeasureKind("rawlsian_gap")

TABLE_KINDS = (
    RANGE,
    GINI_DEVIATION,
    MAX_PAIRWISE_DEVIATION,
    MAD,
    STD_DEV,
    MAX_MAD,
    MAX_SUM_PAIRWISE_DEVIATION,
    SUM_MAX_PAIRWISE_DEVIATION,
)


def order_based(weights: Sequence) -> MeasureKind:
    return MeasureKind("order_based", weights=tuple(weights))


def envy(c: float) -> MeasureKind:
    return MeasureKind("envy", c=c)


def gini_weights(n: int) -> tuple:
    """Ascending weights 2*(2i - 1 - n), i = 1..n, representing the Gini deviation."""
    return tuple(2 * (2 * i - 1 - n) for i in range(1, n + 1))


def rawlsian_weights(n: int) -> tuple:
    """Weights (1/n - 1, 1/n, ..., 1/n): mean minus minimum."""
    return (Fraction(1, n) - 1,) + (Fraction(1, n),) * (n - 1)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_order_based(weights, u: Sequence):
    """sum_i w_i * u_(i) with u_(i) the i-th smallest entry of u."""
    w = tuple(weights.weights if isinstance(weights, WeightVector) else weights)
    u = _check_outcome(u)
    if len(w) != len(u):
        raise DimensionMismatch(f"weights have length {len(w)}, outcomes {len(u)}")
    exact = _is_exact(w) and _is_exact(u)
    su = sorted(u)
    return _ssum((wi * ui for wi, ui in zip(w, su)), exact)


def eval_closed_form(kind: MeasureKind, u: Sequence):
    """Evaluate a measure by its defining formula.

    For envy the outcomes are read as positive impacts and the total envy
    c * sum_{i<j} |u_j - u_i| is returned.
    """
    u = _check_outcome(u)
    n = len(u)
    exact = _is_exact(u)
    name = kind.name

    if name in ("range", "max_pairwise_deviation"):
        return max(u) - min(u)
    if name == "gini_deviation":
        return 2 * _ssum((abs(u[i] - u[j]) for i in range(n) for j in range(i + 1, n)), exact)
    if name == "mad":
        m = _mean(u, exact)
        return _ssum((abs(v - m) for v in u), exact)
    if name == "std_dev":
        m = _mean(u, exact)
        s = _ssum(((v - m) * (v - m) for v in u), exact)
        return math.sqrt(s)
    if name == "max_mad":
        m = _mean(u, exact)
        return max(abs(v - m) for v in u)
    if name == "max_sum_pairwise_deviation":
        return max(_ssum((abs(v - w) for w in u), exact) for v in u)
    if name == "sum_max_pairwise_deviation":
        lo, hi = min(u), max(u)
        return _ssum((max(v - lo, hi - v) for v in u), exact)
    if name == "order_based":
        return eval_order_based(kind.weights, u)
    if name == "rawlsian_gap":
        return _mean(u, exact) - min(u)
    if name == "envy":
        pair_sum = _ssum((abs(u[j] - u[i]) for i in range(n) for j in range(i + 1, n)), exact)
        return kind.c * pair_sum
    raise UnsupportedKind(name)


def measure_wmax(kind: MeasureKind, n: int):
    """Largest positive weight over the measure's dual set.

    Computed as the measure value at (0, ..., 0, 1), which equals
    sup ||w_+||_inf by positive homogeneity; closed forms per kind exist
    and serve as test oracles.
    """
    if n < 2:
        raise DimensionMismatch("need n >= 2")
    return eval_closed_form(kind, (0,) * (n - 1) + (1,))


def eval_relative(kind: MeasureKind, u: Sequence):
    """Relative measure value(u) / (wmax * n * mean(u)), in [0, 1].

    Defined for nonnegative outcomes; returns 0 at u = 0 (the 0/0 = 0
    convention).  1 is attained exactly at permutations of (0,...,0,t).
    """
    u = _check_outcome(u)
    cleaned = []
    for v in u:
        if v < 0:
            if float(v) < -ZERO_SUM_TOL:
                raise NegativeOutcome(f"relative measures need u >= 0, got {v}")
            v = 0
        cleaned.append(v)
    u = tuple(cleaned)
    exact = _is_exact(u)
    total = _ssum(u, exact)
    if total == 0:
        return 0
    value = eval_closed_form(kind, u)
    wmax = measure_wmax(kind, len(u))
    return value / (wmax * total)


def telescoped_order_based(weights, u: Sequence):
    """Equivalent tail-sum form: sum_{j>=2} (sum_{i>=j} w_i) * (u_(j) - u_(j-1))."""
    w = tuple(weights.weights if isinstance(weights, WeightVector) else weights)
    u = _check_outcome(u)
    if len(w) != len(u):
        raise DimensionMismatch
    exact = _is_exact(w) and _is_exact(u)
    su = sorted(u)
    tails = []
    acc = 0
    for wi in reversed(w):
        acc = acc + wi
        tails.append(acc)
    tails.reverse()
    return _ssum((tails[j] * (su[j] - su[j - 1]) for j in range(1, len(u))), exact)


# ---------------------------------------------------------------------------
# Non-equivalence witnesses
# ---------------------------------------------------------------------------

# Named outcome-vector pairs on which one measure of a pair is constant
# while the other changes, proving the pair is not equivalent under any
# positive scaling.  Rows are parameterized by dimension n.


def _row_a(n):
    return ((1, 2) + (Fraction(5, 2),) * (n - 3) + (Fraction(9, 2),),
            (1, 1) + (2,) * (n - 3) + (4,))


def _row_b(n):
    return ((2,) + (5,) * (n - 2) + (9,),
            (2, 2) + (4,) * (n - 3) + (8,))


def _row_b_prime(n):
    if n != 5:
        return None
    return ((2, 5, 5, 6, 9), (2, 2, 4, 4, 8))


def _row_c(n):
    return ((2, 5) + (Fraction(16, 3),) * (n - 3) + (9,),
            (2, 2) + (Fraction(13, 3),) * (n - 3) + (9,))


def _row_d(n):
    r = math.sqrt(21)
    return ((1.0, 2.0) + (3.0,) * (n - 3) + (6.0,),
            (3.0, 3.0) + (3.0 + r / 3.0,) * (n - 3) + (3.0 + r,))


def _row_e(n):
    if n < 4:
        return None
    return ((1,) + (7,) * (n - 3) + (8, 12),
            (5, 10) + (Fraction(21, 2),) * (n - 4) + (13, 14))


_ROWS = {"A": _row_a, "B": _row_b, "B'": _row_b_prime, "C": _row_c, "D": _row_d, "E": _row_e}

# Witness row per unordered pair of table measure names, for n > 3.
_WITNESS_ROW = {
    frozenset({"range", "gini_deviation"}): "C",
    frozenset({"range", "mad"}): "A",
    frozenset({"range", "std_dev"}): "C",
    frozenset({"range", "max_mad"}): "A",
    frozenset({"range", "max_sum_pairwise_deviation"}): "A",
    frozenset({"range", "sum_max_pairwise_deviation"}): "B",
    frozenset({"gini_deviation", "max_pairwise_deviation"}): "C",
    frozenset({"gini_deviation", "mad"}): "A",
    frozenset({"gini_deviation", "std_dev"}): "D",
    frozenset({"gini_deviation", "max_mad"}): "A",
    frozenset({"gini_deviation", "max_sum_pairwise_deviation"}): "A",
    frozenset({"gini_deviation", "sum_max_pairwise_deviation"}): "B",
    frozenset({"max_pairwise_deviation", "mad"}): "A",
    frozenset({"max_pairwise_deviation", "std_dev"}): "C",
    frozenset({"max_pairwise_deviation", "max_mad"}): "A",
    frozenset({"max_pairwise_deviation", "max_sum_pairwise_deviation"}): "A",
    frozenset({"max_pairwise_deviation", "sum_max_pairwise_deviation"}): "B",
    frozenset({"mad", "std_dev"}): "A",
    frozenset({"mad", "max_mad"}): "E",
    frozenset({"mad", "max_sum_pairwise_deviation"}): "E",
    frozenset({"mad", "sum_max_pairwise_deviation"}): "A",
    frozenset({"std_dev", "max_mad"}): "A",
    frozenset({"std_dev", "max_sum_pairwise_deviation"}): "A",
    frozenset({"std_dev", "sum_max_pairwise_deviation"}): "B",
    frozenset({"max_mad", "sum_max_pairwise_deviation"}): "A",
    frozenset({"max_sum_pairwise_deviation", "sum_max_pairwise_deviation"}): "A",
}

_ALWAYS_EQUIVALENT = {
    frozenset({"range", "max_pairwise_deviation"}),
    frozenset({"max_mad", "max_sum_pairwise_deviation"}),
}
_EQUIVALENT_AT_3 = {
    frozenset({"range", "gini_deviation"}),
    frozenset({"gini_deviation", "max_pairwise_deviation"}),
    frozenset({"mad", "max_mad"}),
    frozenset({"mad", "max_sum_pairwise_deviation"}),
}


def distinguishing_pair(kind1: MeasureKind, kind2: MeasureKind, n: int):
    """Witness (u1, u2) with kind_a(u1) == kind_a(u2) but kind_b(u1) != kind_b(u2).

    Returns None when the measures are equivalent at this n, or when no
    cataloged witness applies.  Only the eight table kinds are covered.
    """
    key = frozenset({kind1.name, kind2.name})
    if len(key) == 1 or n < 3:
        return None
    if key in _ALWAYS_EQUIVALENT:
        return None
    if n == 3 and key in _EQUIVALENT_AT_3:
        return None
    row = _WITNESS_ROW.get(key)
    if row is None:
        return None
    if row == "B" and n == 5 and key == frozenset({"gini_deviation", "sum_max_pairwise_deviation"}):
        row = "B'"
    pair = _ROWS[row](n)
    return pair
