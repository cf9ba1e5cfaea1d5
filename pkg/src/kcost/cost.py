"""Clustering cost, nearest-center assignment, centroids and 1-center costs.

All totals are accumulated with :func:`math.fsum`, which is exactly rounded
and therefore independent of summation order. Two routes that arrive at the
same partition report bit-identical costs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import CostKind, FiniteMetric, WeightedSet, as_points, pairwise_distances, point_distances

WEISZFELD_TOL = 1e-9
WEISZFELD_MAX_ITER = 10_000


@dataclass(frozen=True)
class CostReport:
    total: float
    kind: CostKind
    assignment: np.ndarray
    per_center: np.ndarray
    point_costs: np.ndarray

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "kind": int(self.kind),
            "assignment": [int(a) for a in self.assignment],
            "per_center": [float(v) for v in self.per_center],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _centers(C, dim: int) -> np.ndarray:
    C = as_points(C, name="centers", allow_empty=True)
    if C.shape[0] == 0:
        raise ValueError("center set is empty")
    if C.shape[1] != dim:
        raise ValueError(f"dimension mismatch: centers have {C.shape[1]}, data has {dim}")
    return C


def assign(C, X, kind=CostKind.MEANS) -> tuple[np.ndarray, np.ndarray]:
    """Index of the nearest center for each point (lowest index wins ties) and its cost."""
    X = as_points(X)
    C = _centers(C, X.shape[1])
    kind = CostKind.coerce(kind)
    if C.shape[0] == 1:
        return np.zeros(X.shape[0], dtype=np.intp), point_distances(X, C[0], kind)
    D = pairwise_distances(X, C, kind)
    idx = np.argmin(D, axis=1)
    return idx, D[np.arange(X.shape[0]), idx]


def evaluate(C, X, kind=CostKind.MEANS) -> CostReport:
    """Phi(C, X): sum over points of the distance to the nearest center."""
    kind = CostKind.coerce(kind)
    X = as_points(X)
    C = _centers(C, X.shape[1])
    idx, costs = assign(C, X, kind)
    per_center = np.array([math.fsum(costs[idx == j]) for j in range(C.shape[0])])
    return CostReport(math.fsum(costs), kind, idx, per_center, costs)


def cost(C, X, kind=CostKind.MEANS) -> float:
    """Shorthand for ``evaluate(C, X, kind).total``."""
    _, costs = assign(C, X, kind)
    return math.fsum(costs)


def evaluate_weighted(C, S: WeightedSet, kind=CostKind.MEANS) -> float:
    """Phi(C, S, w) = sum_s w(s) * min_c D(s, c)^kind."""
    _, costs = assign(C, S.points, kind)
    mask = S.weights > 0  # zero-weight points never contribute, even if far away
    return math.fsum(S.weights[mask] * costs[mask])


def centroid(X) -> np.ndarray:
    """Coordinate-wise mean, each coordinate summed exactly."""
    X = as_points(X)
    n = X.shape[0]
    if np.all(X == X[0]):
        return X[0].copy()  # fsum(n*x)/n need not round back to x
    return np.array([math.fsum(col) / n for col in X.T])


def geometric_median(X, *, tol: float = WEISZFELD_TOL,
                     max_iter: int = WEISZFELD_MAX_ITER) -> np.ndarray:
    """Weiszfeld iteration for the point minimizing the sum of distances.

    In one dimension the lower median is returned (exact).
    """
    X = as_points(X)
    if X.shape[1] == 1:
        return np.array([_lower_median(X[:, 0])])
    uniq = np.unique(X, axis=0)
    if uniq.shape[0] == 1:
        return uniq[0].copy()
    y = centroid(X)
    for _ in range(max_iter):
        d = np.sqrt(np.einsum("ij,ij->i", X - y, X - y))
        hit = d < 1e-15
        if hit.any():
            # Vardi-Zhang step: stay at a data point when it is optimal
            w = 1.0 / d[~hit]
            T = (X[~hit] * w[:, None]).sum(axis=0) / w.sum()
            r = np.linalg.norm(((X[~hit] - y) * w[:, None]).sum(axis=0))
            mult = hit.sum()
            if r <= mult:
                return y
            eta = mult / r
            y_new = (1 - eta) * T + eta * y
        else:
            w = 1.0 / d
            y_new = (X * w[:, None]).sum(axis=0) / w.sum()
        step = np.linalg.norm(y_new - y)
        y = y_new
        if step <= tol * max(1.0, np.linalg.norm(y)):
            break
    return y


def _lower_median(v: np.ndarray) -> float:
    s = np.sort(v)
    return float(s[(s.size - 1) // 2])


def cluster_cost(X, kind=CostKind.MEANS) -> float:
    """Cost of serving every point of ``X`` from its best single center.

    Means: centroid. Median: lower median in 1-D (exact), Weiszfeld otherwise.
    """
    X = as_points(X)
    kind = CostKind.coerce(kind)
    c = centroid(X) if kind == CostKind.MEANS else geometric_median(X)
    return math.fsum(point_distances(X, c, kind))


def delta1(X, kind=CostKind.MEANS) -> float:
    """Optimal 1-center cost of ``X``."""
    return cluster_cost(X, kind)


def voronoi_partition(C, X, kind=CostKind.MEANS) -> list[np.ndarray]:
    """Cells of ``X`` indexed by center; ties go to the lowest index, cells may be empty."""
    X = as_points(X)
    idx, _ = assign(C, X, kind)
    k = as_points(C, name="centers").shape[0]
    return [X[idx == j] for j in range(k)]


def metric_cost(metric: FiniteMetric, centers, members=None, kind=CostKind.MEDIAN) -> CostReport:
    """Cost of serving ``members`` (default: all indices) from metric ``centers``."""
    kind = CostKind.coerce(kind)
    centers = np.asarray(centers, dtype=np.intp).reshape(-1)
    if centers.size == 0:
        raise ValueError("center set is empty")
    members = np.arange(metric.n) if members is None else np.asarray(members, dtype=np.intp)
    D = metric.dist[np.ix_(members, centers)]
    if kind == CostKind.MEANS:
        D = D * D
    idx = np.argmin(D, axis=1)
    costs = D[np.arange(members.size), idx]
    per_center = np.array([math.fsum(costs[idx == j]) for j in range(centers.size)])
    return CostReport(math.fsum(costs), kind, idx, per_center, costs)
