"""Covers, doubling dimension and covering numbers of finite metrics.

Minimal r-covers (parts of diameter <= r) are NP-hard; the greedy cover
absorbs every point within r/2 of a chosen pivot, so each part has diameter
at most r by the triangle inequality and the count only over-estimates the
minimum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import REL_TOL, CostKind, FiniteMetric
from .sampling import make_rng


@dataclass(frozen=True)
class CoverResult:
    r: float
    parts: list          # index arrays into the metric
    pivots: list

    @property
    def size(self) -> int:
        return len(self.parts)

    def to_dict(self) -> dict:
        return {"r": self.r, "size": self.size, "pivots": [int(p) for p in self.pivots],
                "parts": [[int(i) for i in p] for p in self.parts]}


def _subset(metric: FiniteMetric, subset) -> np.ndarray:
    if subset is None:
        return np.arange(metric.n)
    return np.asarray(subset, dtype=np.intp).reshape(-1)


def greedy_cover(metric: FiniteMetric, r: float, subset=None) -> CoverResult:
    """Greedy r-cover: the lowest-index unassigned point absorbs every
    unassigned point within r/2.
    """
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    idx = _subset(metric, subset)
    D = metric.dist[np.ix_(idx, idx)]
    free = np.ones(idx.size, dtype=bool)
    parts, pivots = [], []
    for a in range(idx.size):
        if not free[a]:
            continue
        take = free & (D[a] <= r / 2.0)
        parts.append(idx[take])
        pivots.append(int(idx[a]))
        free &= ~take
    return CoverResult(float(r), parts, pivots)


def diameter(metric: FiniteMetric, subset=None) -> float:
    idx = _subset(metric, subset)
    if idx.size == 0:
        return 0.0
    return float(metric.dist[np.ix_(idx, idx)].max())


def ball(metric: FiniteMetric, c: int, r: float) -> np.ndarray:
    """Closed ball M(c, r) as sorted indices."""
    return np.flatnonzero(metric.dist[int(c)] <= r)


def check_cover(metric: FiniteMetric, cover: CoverResult, subset=None) -> bool:
    """Parts partition the subset and each has diameter <= r (relative 1e-9)."""
    idx = np.sort(_subset(metric, subset))
    got = np.sort(np.concatenate(cover.parts)) if cover.parts else np.array([], dtype=np.intp)
    if not np.array_equal(got, idx):
        return False
    return all(diameter(metric, p) <= cover.r * (1 + REL_TOL) for p in cover.parts)


def _sample_balls(metric: FiniteMetric, count: int, rng):
    """(center, radius) pairs: random center, radius drawn from its distance profile."""
    out = []
    for _ in range(count):
        c = int(rng.integers(metric.n))
        dists = np.unique(metric.dist[c])
        out.append((c, float(dists[int(rng.integers(dists.size))])))
    return out


@dataclass(frozen=True)
class DoublingEstimate:
    d_hat: float
    worst_size: int
    balls: int

    def to_dict(self) -> dict:
        return {"d_hat": self.d_hat, "worst_size": self.worst_size, "balls": self.balls,
                "note": "greedy covers use r/2 absorption and over-count minimal covers"}


def estimate_doubling(metric: FiniteMetric, sample_balls: int = 64, rng_seed=0) -> DoublingEstimate:
    """max log2 |greedy_cover(S, dia(S)/2)| over X itself and sampled balls S."""
    rng = make_rng(rng_seed)
    subsets = [np.arange(metric.n)] + [ball(metric, c, r) for c, r in _sample_balls(metric, sample_balls, rng)]
    worst = 1
    for S in subsets:
        dia = diameter(metric, S)
        if dia == 0:
            continue
        worst = max(worst, greedy_cover(metric, dia / 2.0, S).size)
    return DoublingEstimate(math.log2(worst), worst, len(subsets))


def gamma_estimate(metric: FiniteMetric, epsilon: float, sample_balls: int = 64, rng_seed=0,
                   *, all_balls: bool = False) -> int:
    """max |greedy_cover(M(c, r), eps * r)| over sampled (or, with ``all_balls``,
    every) center and radius drawn from the distance matrix.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if all_balls:
        pairs = [(c, float(r)) for c in range(metric.n) for r in np.unique(metric.dist[c])]
    else:
        pairs = _sample_balls(metric, sample_balls, make_rng(rng_seed))
    best = 1
    for c, r in pairs:
        if r == 0:
            continue
        best = max(best, greedy_cover(metric, epsilon * r, ball(metric, c, r)).size)
    return best


def gamma_bound(epsilon: float, d: float, slack: float = 1.0) -> float:
    """(4/eps)^(d + slack)."""
    return (4.0 / epsilon) ** (d + slack)


def soft_gamma_check(metric: FiniteMetric, epsilon: float, sample_balls: int = 64, rng_seed=0,
                     slack: float = 1.0) -> dict:
    """Compare gamma_hat with (4/eps)^(d_hat + slack); warns instead of failing,
    since both sides are estimates.
    """
    d_hat = estimate_doubling(metric, sample_balls, rng_seed).d_hat
    g = gamma_estimate(metric, epsilon, sample_balls, rng_seed)
    bound = gamma_bound(epsilon, d_hat, slack)
    ok = g <= bound
    if not ok:
        warnings.warn(f"gamma_hat={g} exceeds (4/eps)^(d_hat+{slack})={bound:.4g}", stacklevel=2)
    return {"gamma_hat": g, "d_hat": d_hat, "bound": bound, "within": ok, "soft": True}


def embed_lower_bound(epsilon: float, k: int, d: int, t: int, rng_seed=0, net=None):
    """The Euclidean k-median lower-bound instance as a finite metric.

    Co-located points collapse to one site each, since a metric separates
    distinct points; site multiplicities are returned as weights. The k
    apexes are appended last with weight 0, so the reference cost is
    ``weighted_metric_cost(metric, weights, range(n - k, n))``. Returns
    ``(metric, weights, spec)``.
    """
    from .generators import gen_lower_ddim

    W, spec = gen_lower_ddim(epsilon, k, d, t, net, CostKind.MEDIAN, rng_seed=rng_seed, compress=True)
    P = np.vstack([W.points, spec.apexes])
    w = np.concatenate([W.weights, np.zeros(spec.k)])
    return FiniteMetric.from_points(P), w, spec


def weighted_metric_cost(metric: FiniteMetric, weights, centers) -> float:
    centers = np.asarray(centers, dtype=np.intp).reshape(-1)
    D = metric.dist[:, centers].min(axis=1)
    return math.fsum(np.asarray(weights) * D)
