"""epsilon-covers and epsilon-packings of the unit sphere S^{d-1}.

Distances are chordal (Euclidean) throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .sampling import make_rng

PACKING_TOL = 1e-12
POOL_MIN = 10**4
POOL_MAX = 10**6
SATURATE_BATCH = 2 * 10**4
HOLE_CLIMB_ITERS = 30
SATURATE_ROUNDS = 50


def covering_upper_bound(d: int, epsilon: float) -> float:
    """Volume bound (1 + 2/eps)^d on the size of a minimal eps-cover of S^{d-1}."""
    return (1.0 + 2.0 / epsilon) ** d


def packing_lower_bound(d: int, epsilon: float) -> float:
    """Cap-area bound 1/(4 eps)^(d-1) on the largest eps-packing of S^{d-1} (eps < 1/4)."""
    return 1.0 / (4.0 * epsilon) ** (d - 1)


def default_pool(d: int, epsilon: float) -> int:
    return int(max(POOL_MIN, min(200 * covering_upper_bound(d, epsilon), POOL_MAX)))


@dataclass(frozen=True)
class SphereNet:
    dim: int
    epsilon: float
    points: np.ndarray
    kind: str = "both"  # cover | packing | both
    pool: int = 0
    seed: object = None
    method: str = ""
    saturation_draws: int = 0

    def __post_init__(self):
        P = np.asarray(self.points, dtype=np.float64)
        if P.ndim != 2 or P.shape[1] != self.dim or P.shape[0] == 0:
            raise ValueError(f"net points must have shape (m, {self.dim})")
        norms = np.linalg.norm(P, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("net points must be unit vectors")
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    def __len__(self) -> int:
        return self.points.shape[0]

    def certificate(self, cover=None, packing=None) -> dict:
        return {
            "epsilon": self.epsilon, "dim": self.dim, "kind": self.kind, "size": len(self),
            "pool": self.pool, "saturation_draws": self.saturation_draws, "method": self.method,
            "max_gap": None if cover is None else cover.max_gap,
            "cover_method": None if cover is None else cover.method,
            "min_pairwise": None if packing is None else packing.min_pairwise,
        }


def unit_vectors(d: int, count: int, rng_seed=0) -> np.ndarray:
    """``count`` vectors drawn uniformly from S^{d-1}."""
    rng = make_rng(rng_seed)
    V = rng.standard_normal((count, d))
    norms = np.linalg.norm(V, axis=1)
    while np.any(norms == 0):  # measure-zero, but cheap to guard
        bad = norms == 0
        V[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(V, axis=1)
    return V / norms[:, None]


def circle_grid(epsilon: float) -> np.ndarray:
    """Equally spaced unit vectors in the plane, pairwise chord >= epsilon.

    Angular step 2*arcsin(eps/2) gives chord exactly eps; taking the floor of
    the count keeps the wrap-around gap at least one full step.
    """
    step = 2.0 * math.asin(epsilon / 2.0)
    m = max(1, math.floor(2.0 * math.pi / step))
    theta = 2.0 * math.pi * np.arange(m) / m
    return np.column_stack([np.cos(theta), np.sin(theta)])


def greedy_packing(pool: np.ndarray, epsilon: float) -> np.ndarray:
    """Maximal eps-packing of ``pool`` by a single greedy pass.

    Every pool vector ends within ``epsilon`` of a selected one, so the
    output is also an eps-cover of the pool.
    """
    tree = cKDTree(pool)
    alive = np.ones(pool.shape[0], dtype=bool)
    keep = []
    for i in range(pool.shape[0]):
        if not alive[i]:
            continue
        keep.append(i)
        alive[tree.query_ball_point(pool[i], epsilon)] = False
    return pool[keep]


def climb(V: np.ndarray, P: np.ndarray, iters: int = HOLE_CLIMB_ITERS) -> tuple[np.ndarray, np.ndarray]:
    """Move each row of ``V`` along the sphere away from its nearest point of ``P``.

    A move is kept only if it increases the distance to the net, so every row
    ends at or near a local maximum of that distance, i.e. at the centre of a hole.
    Returns ``(V, distance_to_net)``.
    """
    tree = cKDTree(P)
    dist, idx = tree.query(V)
    step = np.full(V.shape[0], 0.5)
    for _ in range(iters):
        W = V + step[:, None] * (V - P[idx])
        W /= np.linalg.norm(W, axis=1)[:, None]
        d_new, i_new = tree.query(W)
        better = d_new > dist
        V[better], dist[better], idx[better] = W[better], d_new[better], i_new[better]
        step = np.where(better, step, step * 0.5)
    return V, dist


def saturate(P: np.ndarray, epsilon: float, batch: int, rng, max_rounds: int = SATURATE_ROUNDS):
    """Grow packing ``P`` with vectors lying more than ``epsilon`` from it until
    a whole batch of hole-climbing candidates adds nothing.

    Returns ``(P, candidates_drawn)``.
    """
    d = P.shape[1]
    drawn = 0
    for _ in range(max_rounds):
        V = unit_vectors(d, batch, rng)
        drawn += batch
        V, dist = climb(V, P)
        far = V[dist > epsilon]
        if far.shape[0] == 0:
            break
        P = np.vstack([P, greedy_packing(far, epsilon)])
    return P, drawn


def build_net(d: int, epsilon: float, candidate_pool: int | None = None, rng_seed=0,
              *, saturate_batch: int | None = None) -> SphereNet:
    """Net on S^{d-1} that is simultaneously an eps-packing and an eps-cover.

    d=1 gives {-1, +1}; d=2 a deterministic angular grid; d>=3 a greedy
    maximal packing of ``candidate_pool`` random unit vectors, then topped up
    from fresh batches until one batch of ``saturate_batch`` vectors (default
    ``2*10**4``; 0 disables) climbs into no hole deeper than epsilon. The cover property in
    d>=3 is therefore statistical (see :func:`verify_cover`).
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if d == 1:
        return SphereNet(1, epsilon, np.array([[-1.0], [1.0]]), "both", 0, None, "exact")
    if d == 2:
        return SphereNet(2, epsilon, circle_grid(epsilon), "both", 0, None, "grid")
    pool = default_pool(d, epsilon) if candidate_pool is None else int(candidate_pool)
    if pool < 1:
        raise ValueError("candidate_pool must be positive")
    rng = make_rng(rng_seed)
    P = greedy_packing(unit_vectors(d, pool, rng), epsilon)
    batch = SATURATE_BATCH if saturate_batch is None else int(saturate_batch)
    drawn = 0
    if batch > 0:
        P, drawn = saturate(P, epsilon, batch, rng)
    return SphereNet(d, epsilon, P, "both", pool, rng_seed, "greedy-pool", drawn)


def pool_cover_gap(net: SphereNet) -> float:
    """Largest distance from a vector of the initial candidate pool to the net."""
    if net.method != "greedy-pool":
        raise ValueError("net was not built from a candidate pool")
    pool = unit_vectors(net.dim, net.pool, make_rng(net.seed))
    gaps, _ = cKDTree(net.points).query(pool)
    return float(gaps.max())


@dataclass(frozen=True)
class CoverCheck:
    max_gap: float
    passed: bool
    method: str  # exact | analytic | probe
    probes: int = 0


@dataclass(frozen=True)
class PackingCheck:
    min_pairwise: float
    passed: bool


def _circle_gap(P: np.ndarray) -> float:
    theta = np.sort(np.arctan2(P[:, 1], P[:, 0]))
    gaps = np.diff(np.r_[theta, theta[0] + 2.0 * math.pi])
    widest = float(gaps.max())
    # the arc midpoint is the worst point: chord to either neighbor
    return 2.0 * math.sin(min(widest, 2.0 * math.pi) / 4.0)


def verify_cover(net: SphereNet, probes: int = 10**5, rng_seed=12345) -> CoverCheck:
    """Largest distance from the sphere to the net.

    Exact for d <= 2 (closed form); for d >= 3 the maximum over ``probes``
    uniform random unit vectors, a lower estimate of the true gap.
    """
    P = net.points
    if net.dim == 1:
        sphere = np.array([[-1.0], [1.0]])
        gap = float(np.abs(sphere - P.T).min(axis=1).max())
        return CoverCheck(gap, gap <= net.epsilon, "exact")
    if net.dim == 2:
        gap = _circle_gap(P)
        return CoverCheck(gap, gap <= net.epsilon, "analytic")
    tree = cKDTree(P)
    gap = 0.0
    chunk = 50_000
    rng = make_rng(rng_seed)
    for lo in range(0, probes, chunk):
        V = unit_vectors(net.dim, min(chunk, probes - lo), rng)
        dist, _ = tree.query(V)
        gap = max(gap, float(dist.max()))
    return CoverCheck(gap, gap <= net.epsilon, "probe", probes)


def verify_packing(net: SphereNet) -> PackingCheck:
    """Exact minimum pairwise distance; passes when it is at least epsilon."""
    if len(net) < 2:
        raise ValueError("packing check needs at least two points")
    dist, _ = cKDTree(net.points).query(net.points, k=2)
    mn = float(dist[:, 1].min())
    return PackingCheck(mn, mn >= net.epsilon - PACKING_TOL)


def nearest_direction(net: SphereNet, V: np.ndarray) -> np.ndarray:
    """Index of the net direction with the largest inner product with each row of V."""
    return np.argmax(V @ net.points.T, axis=1)
