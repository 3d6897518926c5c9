"""Dual-set representations of convex fairness measures.

Every convex fairness measure equals a worst case of order-based measures
over a compact set of ascending zero-sum weight vectors, its dual set.
Three shapes cover the whole catalog:

* ``singleton``: one weight vector (range, Gini deviation, Rawlsian gap,
  any explicitly order-based measure);
* ``vertices``: an explicit finite vertex list (sum of maximum pairwise
  deviation);
* ``norm_ball``: the centered image {w' - mean(w') 1 : ||w'||_q <= r,
  w' ascending} for q in {1, 2, inf} (max-MAD, standard deviation, MAD,
  and the scaled variant for max sum of pairwise deviation).

Evaluating a measure is computing the support function of its dual set at
the sorted outcome vector; that is also the pricing subproblem of the
column-and-constraint generation solver.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    DimensionMismatch,
    MeasureKind,
    UnsupportedKind,
    gini_weights,
    rawlsian_weights,
)

S_TOL = 1e-9
DEDUP_TOL = 1e-9


class NotPolytope(ValueError):
    pass


def _in_ascending_zero_sum(w: np.ndarray, tol: float = S_TOL) -> bool:
    return bool(np.all(np.diff(w) >= -tol) and abs(w.sum()) <= tol * max(1.0, np.abs(w).max()))


@dataclass(frozen=True)
class DualSet:
    """A dual set in dimension n; exactly one variant's fields are set."""

    variant: str  # "singleton" | "vertices" | "norm_ball"
    n: int
    w: tuple | None = None
    V: tuple | None = None
    q: float | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise DimensionMismatch("dual sets need dimension >= 2")
        if self.variant == "singleton":
            w = np.asarray(self.w, dtype=float)
            if w.shape != (self.n,):
                raise DimensionMismatch("singleton weight has wrong length")
            if not _in_ascending_zero_sum(w):
                raise ValueError("singleton weight must be ascending with zero sum")
            if np.abs(w).max() == 0:
                raise ValueError("dual set must not be {0}")
        elif self.variant == "vertices":
            V = np.asarray(self.V, dtype=float)
            if V.ndim != 2 or V.shape[1] != self.n or V.shape[0] == 0:
                raise DimensionMismatch("vertex list has wrong shape")
            for v in V:
                if not _in_ascending_zero_sum(v):
                    raise ValueError("every vertex must be ascending with zero sum")
            if np.abs(V).max() == 0:
                raise ValueError("dual set must not be {0}")
        elif self.variant == "norm_ball":
            if self.q not in (1, 2, math.inf):
                raise ValueError("q must be 1, 2 or inf")
            if not self.radius > 0:
                raise ValueError("radius must be positive")
        else:
            raise ValueError(f"unknown variant {self.variant!r}")

    def to_json(self) -> dict:
        if self.variant == "singleton":
            return {"variant": "singleton", "w": [float(v) for v in self.w]}
        if self.variant == "vertices":
            return {"variant": "vertices", "V": [[float(x) for x in v] for v in self.V]}
        q = "inf" if self.q == math.inf else int(self.q)
        return {"variant": "norm_ball", "q": q, "radius": float(self.radius), "n": self.n}

    @classmethod
    def from_json(cls, d: dict) -> "DualSet":
        if d["variant"] == "singleton":
            return singleton(d["w"])
        if d["variant"] == "vertices":
            return finite_vertices(d["V"])
        q = math.inf if d["q"] in ("inf", "Inf") else float(d["q"])
        return norm_ball(q, d["radius"], int(d["n"]))


def singleton(w) -> DualSet:
    w = tuple(float(v) for v in w)
    return DualSet("singleton", len(w), w=w)


def finite_vertices(V) -> DualSet:
    V = tuple(tuple(float(x) for x in v) for v in V)
    return DualSet("vertices", len(V[0]), V=V)


def norm_ball(q: float, radius: float, n: int) -> DualSet:
    q = math.inf if q in ("inf", math.inf) else float(q)
    if q == 1.0 or q == 2.0:
        q = int(q)
    return DualSet("norm_ball", n, q=q, radius=float(radius))


def dual_set_of(kind: MeasureKind, n: int) -> DualSet:
    """Canonical dual set of a measure kind in dimension n.

    Envy is excluded: its dual representation is the Gini one scaled by
    c/2, which callers can request directly via order-based weights.
    """
    if n < 2:
        raise DimensionMismatch("need n >= 2")
    name = kind.name
    if name in ("range", "max_pairwise_deviation"):
        return singleton((-1.0,) + (0.0,) * (n - 2) + (1.0,))
    if name == "gini_deviation":
        return singleton(gini_weights(n))
    if name == "mad":
        return norm_ball(math.inf, 1.0, n)
    if name == "std_dev":
        return norm_ball(2, 1.0, n)
    if name == "max_mad":
        return norm_ball(1, 1.0, n)
    if name == "max_sum_pairwise_deviation":
        return norm_ball(1, float(n), n)
    if name == "sum_max_pairwise_deviation":
        V = []
        for k in range(1, n):
            V.append((-(n - k) - 1.0,) + (-1.0,) * (k - 1) + (1.0,) * (n - 1 - k) + (k + 1.0,))
        return finite_vertices(V)
    if name == "rawlsian_gap":
        return singleton(tuple(float(v) for v in rawlsian_weights(n)))
    if name == "order_based":
        return singleton(kind.weights)
    raise UnsupportedKind(f"no dual set for kind {name!r}")


def scale(ds: DualSet, factor: float) -> DualSet:
    """Dual set of the measure scaled by factor > 0."""
    if not factor > 0:
        raise ValueError("scale factor must be positive")
    if ds.variant == "singleton":
        return singleton(tuple(factor * v for v in ds.w))
    if ds.variant == "vertices":
        return finite_vertices(tuple(tuple(factor * x for x in v) for v in ds.V))
    return norm_ball(ds.q, factor * ds.radius, ds.n)


# ---------------------------------------------------------------------------
# Support function
# ---------------------------------------------------------------------------


def support_value(ds: DualSet, u) -> tuple[float, np.ndarray]:
    """Measure value at u and a maximizing weight vector.

    The maximizer is returned ascending with zero sum.  For norm balls
    the closed form is used: sort u, center it, take the dual-norm
    maximizer of the centered vector (automatically ascending) and center
    that.  The zero weight is skipped when enumerating explicit vertices.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (ds.n,):
        raise DimensionMismatch(f"outcome has length {u.shape}, dual set dimension {ds.n}")
    su = np.sort(u)

    if ds.variant == "singleton":
        w = np.asarray(ds.w)
        return float(w @ su), w.copy()

    if ds.variant == "vertices":
        best_val, best_w = -math.inf, None
        for v in ds.V:
            w = np.asarray(v)
            if np.abs(w).max() <= DEDUP_TOL:
                continue
            val = float(w @ su)
            if val > best_val:
                best_val, best_w = val, w
        return best_val, best_w.copy()

    v = su - su.mean()
    r = ds.radius
    n = ds.n
    if not np.any(np.abs(v) > 0):
        return 0.0, np.zeros(n)
    if ds.q == math.inf:
        value = r * float(np.abs(v).sum())
        wp = r * np.sign(v)
    elif ds.q == 2:
        nv = float(np.linalg.norm(v))
        value = r * nv
        wp = r * v / nv
    else:  # q == 1
        value = r * float(np.abs(v).max())
        wp = np.zeros(n)
        if abs(v[-1]) >= abs(v[0]):
            wp[-1] = r
        else:
            wp[0] = -r
    w = wp - wp.mean()
    return value, w


def dual_set_contains(ds: DualSet, w, tol: float = S_TOL) -> bool:
    """Membership test used to validate generated cuts."""
    w = np.asarray(w, dtype=float)
    if w.shape != (ds.n,):
        return False
    scale_ = max(1.0, float(np.abs(w).max()))
    if not _in_ascending_zero_sum(w, tol * scale_):
        return False
    if ds.variant == "singleton":
        return bool(np.abs(w - np.asarray(ds.w)).max() <= tol * scale_)
    if ds.variant == "vertices":
        V = [np.asarray(v) for v in ds.V]
        d, _ = project_to_hull(w, V)
        return d <= tol * scale_
    # norm ball: w is in the centered image iff some shift w + c 1 has
    # q-norm <= r; minimize the q-norm of the shift over c.
    r = ds.radius * (1 + tol)
    if ds.q == math.inf:
        return float(w.max() - w.min()) / 2 <= r
    if ds.q == 2:
        return float(np.linalg.norm(w)) <= r
    shifted = w - np.median(w)
    return float(np.abs(shifted).sum()) <= r


# ---------------------------------------------------------------------------
# Vertex enumeration
# ---------------------------------------------------------------------------


def _dedup(points: list[np.ndarray]) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if not any(np.abs(p - q).max() <= DEDUP_TOL for q in out):
            out.append(p)
    return out


def _prune_nonextreme(points: list[np.ndarray]) -> list[np.ndarray]:
    """Keep the extreme points of conv(points).

    A point is dropped iff it is a convex combination of the others,
    decided by a small feasibility LP.
    """
    from scipy.optimize import linprog

    pts = list(points)
    keep = [True] * len(pts)
    for i, p in enumerate(pts):
        others = [q for j, q in enumerate(pts) if j != i and keep[j]]
        if not others:
            continue
        A = np.vstack([np.column_stack(others), np.ones(len(others))])
        b = np.concatenate([p, [1.0]])
        res = linprog(np.zeros(len(others)), A_eq=A, b_eq=b,
                      bounds=[(0, None)] * len(others), method="highs")
        if res.status == 0 and res.x is not None:
            recon = np.column_stack(others) @ res.x
            if np.abs(recon - p).max() <= 1e-8:
                keep[i] = False
    return [p for p, k in zip(pts, keep) if k]


def _ball_candidates(q: float, r: float, n: int) -> list[np.ndarray]:
    cands = []
    if q == math.inf:
        # Sign-change vectors (-r)^k (+r)^(n-k); k = 0 and k = n center to 0.
        for k in range(n + 1):
            wp = np.array([-r] * k + [r] * (n - k))
            cands.append(wp - wp.mean())
    elif q == 1:
        # Leading equal-negative block or trailing equal-positive block;
        # a tight-constraint count shows no other vertex shape exists.
        for k in range(1, n + 1):
            wp = np.array([-r / k] * k + [0.0] * (n - k))
            cands.append(wp - wp.mean())
        for m in range(1, n + 1):
            wp = np.array([0.0] * (n - m) + [r / m] * m)
            cands.append(wp - wp.mean())
    else:
        raise NotPolytope("q=2 dual sets are not polytopes")
    return cands


def vertices(ds: DualSet) -> list[np.ndarray]:
    """Extreme points of the dual set (polytope variants only).

    For norm balls the centered candidate families are deduplicated and
    pruned to extreme points of the image polytope; the zero vector is
    kept when it is extreme.  q=2 balls are polytopes only at n=2 (a
    segment); elsewhere they raise NotPolytope.
    """
    if ds.variant == "singleton":
        return [np.asarray(ds.w, dtype=float)]
    if ds.variant == "vertices":
        pts = _dedup([np.asarray(v, dtype=float) for v in ds.V])
        pts = _prune_nonextreme(pts)
    else:
        if ds.q == 2:
            if ds.n != 2:
                raise NotPolytope("q=2 dual sets are polytopes only at n=2")
            t = ds.radius / math.sqrt(2.0)
            pts = [np.zeros(2), np.array([-t, t])]
        else:
            pts = _prune_nonextreme(_dedup(_ball_candidates(ds.q, ds.radius, ds.n)))
    return sorted(pts, key=lambda p: tuple(np.round(p, 12)))


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------


def check_equivalent(ds1: DualSet, ds2: DualSet, tol: float = 1e-8) -> float | None:
    """Positive beta with measure1 = beta * measure2, or None.

    Compares canonical vertex sets: each vertex list is augmented with
    the zero vector (always in the maximal dual set) and reduced to the
    extreme points of the augmented hull before the proportionality
    match.
    """
    if ds1.n != ds2.n:
        raise DimensionMismatch("dual sets have different dimensions")
    smooth1 = ds1.variant == "norm_ball" and ds1.q == 2 and ds1.n > 2
    smooth2 = ds2.variant == "norm_ball" and ds2.q == 2 and ds2.n > 2
    if smooth1 and smooth2:
        return ds1.radius / ds2.radius
    if smooth1 or smooth2:
        # a curved-boundary set is never a positive multiple of a polytope
        return None
    V1 = _canonical_vertices(ds1)
    V2 = _canonical_vertices(ds2)
    if len(V1) != len(V2):
        return None
    m1 = max(float(np.linalg.norm(v)) for v in V1)
    m2 = max(float(np.linalg.norm(v)) for v in V2)
    beta = m1 / m2
    used = [False] * len(V2)
    for v in V1:
        hit = False
        for j, w in enumerate(V2):
            if not used[j] and np.abs(v - beta * w).max() <= tol * max(1.0, float(np.abs(v).max())):
                used[j] = True
                hit = True
                break
        if not hit:
            return None
    return beta


def _canonical_vertices(ds: DualSet) -> list[np.ndarray]:
    pts = vertices(ds) + [np.zeros(ds.n)]
    return _prune_nonextreme(_dedup(pts)) or [np.zeros(ds.n)]


# ---------------------------------------------------------------------------
# Hausdorff distance
# ---------------------------------------------------------------------------


def _affine_min_norm(P: np.ndarray) -> np.ndarray:
    """Coefficients of the min-norm point of the affine hull of rows of P."""
    k = P.shape[0]
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = 2.0 * (P @ P.T)
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(points: list[np.ndarray], tol: float = 1e-12) -> np.ndarray:
    """Min-norm point of conv(points) by Wolfe's active-set method."""
    P = np.asarray(points, dtype=float)
    norms2 = (P * P).sum(axis=1)
    scale_ = max(1.0, float(norms2.max()))
    j = int(np.argmin(norms2))
    active = [j]
    lam = np.array([1.0])
    x = P[j].copy()
    for _ in range(100 * len(P) + 100):
        dots = P @ x
        jstar = int(np.argmin(dots))
        if dots[jstar] >= float(x @ x) - tol * scale_:
            break
        if jstar in active:
            break
        active.append(jstar)
        lam = np.append(lam, 0.0)
        while True:
            alpha = _affine_min_norm(P[active])
            if np.all(alpha > 1e-11):
                lam = alpha
                x = alpha @ P[active]
                break
            shrink = lam - alpha
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(shrink > 1e-14, lam / shrink, np.inf)
            theta = min(1.0, float(ratios.min()))
            lam = lam + theta * (alpha - lam)
            keep = lam > 1e-11
            if keep.all():
                keep[int(np.argmin(lam))] = False
            active = [a for a, k in zip(active, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
            if len(active) == 1:
                x = P[active[0]].copy()
                lam = np.array([1.0])
                break
    return x


def project_to_hull(point: np.ndarray, V: list[np.ndarray]) -> tuple[float, np.ndarray]:
    """Euclidean distance from point to conv(V) and the nearest point."""
    point = np.asarray(point, dtype=float)
    shifted = [np.asarray(v, dtype=float) - point for v in V]
    x = min_norm_point(shifted)
    return float(np.linalg.norm(x)), x + point


def hausdorff(ds1: DualSet, ds2: DualSet) -> float:
    """Hausdorff distance between two polytope dual sets.

    Each directed part is a supremum of a convex function over a
    polytope, hence attained at a vertex, so it suffices to project every
    vertex of one set onto the hull of the other.
    """
    if ds1.n != ds2.n:
        raise DimensionMismatch("dual sets have different dimensions")
    V1 = vertices(ds1)
    V2 = vertices(ds2)
    d12 = max(project_to_hull(v, V2)[0] for v in V1)
    d21 = max(project_to_hull(v, V1)[0] for v in V2)
    return max(d12, d21)


def dumps(ds: DualSet) -> str:
    return json.dumps(ds.to_json(), sort_keys=True)


def loads(s: str) -> DualSet:
    return DualSet.from_json(json.loads(s))
