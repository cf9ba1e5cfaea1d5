"""Upper-bound builders: the 1-D grid set, the d-dimensional fan, metric annuli.

Each builder returns a small candidate-center set whose cost on the input is
at most ``epsilon`` times the cost of the reference center(s), and checks that
guarantee on its own output before returning.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cost import assign, cost, metric_cost
from .geometry import REL_TOL, CostKind, FiniteMetric, as_points
from .nets import SphereNet, build_net


class GuaranteeError(RuntimeError):
    """A construction produced a set violating its cost guarantee."""


# --- one dimension -------------------------------------------------------------

@dataclass(frozen=True)
class GridParams:
    R: float
    g: float
    r: float
    t: int
    steps: int
    base_cost: float


def grid_scale(epsilon: float, kind: CostKind) -> float:
    """Relative grid spacing: sqrt(eps/2) for squared distances, eps/2 otherwise."""
    return math.sqrt(epsilon / 2.0) if kind == CostKind.MEANS else epsilon / 2.0


def grid_params(x: np.ndarray, epsilon: float, kind: CostKind) -> GridParams:
    n = x.size
    if kind == CostKind.MEANS:
        base = math.fsum(x * x)
        R = math.sqrt(base) / n
        steps = math.floor(math.sqrt(2.0 / epsilon))
    else:
        base = math.fsum(np.abs(x))
        R = base / n
        steps = math.floor(2.0 / epsilon)
    g = grid_scale(epsilon, kind)
    r = 1.0 + g
    t = math.ceil(math.log(n) / math.log(r)) if n > 1 else 0
    return GridParams(R, g, r, t, steps, base)


def build_1d_upper(X, epsilon: float, kind=CostKind.MEANS, *, one_sided: bool = False) -> np.ndarray:
    """Sorted set S on the line with Phi(S, X) <= epsilon * Phi({0}, X).

    S is a uniform grid of step g*R on [-R, R] together with the geometric
    sequence +-R*(1+g)^i, i = 0..t, where g = sqrt(eps/2) (means) or eps/2
    (median), R = sqrt(Phi({0},X))/n (means) or Phi({0},X)/n (median) and
    t = ceil(log n / log(1+g)). ``X`` is taken relative to the origin.
    With ``one_sided`` (all of ``X`` nonnegative) only the nonnegative half is kept.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    kind = CostKind.coerce(kind)
    x = as_points(X)
    if x.shape[1] != 1:
        raise ValueError(f"build_1d_upper needs 1-D data, got d={x.shape[1]}")
    x = x[:, 0]
    if one_sided and np.any(x < 0):
        raise ValueError("one_sided construction needs nonnegative data")
    p = grid_params(x, epsilon, kind)
    if p.base_cost == 0:
        return np.zeros(1)
    top = p.R * p.r ** p.t
    if np.abs(x).max() > top * (1 + REL_TOL):
        raise GuaranteeError(f"max |x| = {np.abs(x).max()!r} exceeds r^t R = {top!r}")
    half = np.concatenate([np.arange(p.steps + 1) * p.g * p.R,
                           p.R * p.r ** np.arange(p.t + 1)])
    S = half if one_sided else np.concatenate([half, -half])
    S = np.unique(S) + 0.0  # folds -0.0 into 0.0
    got = cost(S[:, None], x[:, None], kind)
    if got > epsilon * p.base_cost * (1 + REL_TOL):
        raise GuaranteeError(f"Phi(S,X)={got!r} > eps*Phi(0,X)={epsilon * p.base_cost!r}")
    return S


def size_bound_1d(n: int, epsilon: float) -> int:
    """2(floor(sqrt(2/eps)) + 1) + 2(ceil(log n / log(1 + sqrt(eps/2))) + 1)."""
    t = math.ceil(math.log(n) / math.log(1.0 + math.sqrt(epsilon / 2.0))) if n > 1 else 0
    return 2 * (math.floor(math.sqrt(2.0 / epsilon)) + 1) + 2 * (t + 1)


# --- fan -----------------------------------------------------------------------

@dataclass
class FanResult:
    points: np.ndarray
    epsilon: float
    kind: CostKind
    net: SphereNet | None
    baseline: float            # sum_i Phi({c_i}, cell_i)
    cost: float                # Phi(xi, X)
    snap_ratio: np.ndarray     # |y - y'| / |y - c| per point (0 where y == c)
    ray_counts: list = field(default_factory=list)
    cell_sizes: list = field(default_factory=list)

    @property
    def cost_ratio(self) -> float:
        if self.baseline == 0:
            return 0.0 if self.cost == 0 else math.inf
        return self.cost / self.baseline

    @property
    def max_per_line(self) -> int:
        return max(self.ray_counts, default=0)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon, "kind": int(self.kind), "size": int(self.points.shape[0]),
            "cost": self.cost, "baseline": self.baseline, "cost_ratio": self.cost_ratio,
            "net_size": None if self.net is None else len(self.net),
            "max_snap_ratio": float(self.snap_ratio.max()) if self.snap_ratio.size else 0.0,
            "cell_sizes": self.cell_sizes, "max_per_line": self.max_per_line,
        }


def fan_net_scale(epsilon: float, kind: CostKind) -> float:
    """Direction-net scale: sqrt(eps/2) for means, eps/2 for median."""
    return grid_scale(epsilon, kind)


def build_fan_coreset(X, centers, labels=None, epsilon: float = 0.5, kind=CostKind.MEANS,
                      net: SphereNet | None = None, rng_seed=0,
                      candidate_pool: int | None = None) -> FanResult:
    """Union over clusters of 1-D grids laid on rays from each cluster center.

    Each point is projected onto the ray whose direction best matches it
    (projection parameter clamped at 0); the projected radii on every ray get
    a one-sided :func:`build_1d_upper` set at precision eps/2. For any
    clustering, ``Phi(xi, X) <= eps * sum_i Phi({c_i}, cell_i)`` provided the
    direction net is a cover at :func:`fan_net_scale`.

    ``labels`` assigns points to ``centers``; when omitted the Voronoi
    assignment is used. Empty cells are skipped.
    """
    X = as_points(X)
    kind = CostKind.coerce(kind)
    C = as_points(centers, name="centers")
    if C.shape[1] != X.shape[1]:
        raise ValueError("centers and data differ in dimension")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if labels is None:
        labels, _ = assign(C, X, kind)
    labels = np.asarray(labels, dtype=np.intp)
    d = X.shape[1]
    scale = fan_net_scale(epsilon, kind)
    if net is None:
        net = build_net(d, scale, candidate_pool, rng_seed)
    elif net.dim != d:
        raise ValueError(f"net dimension {net.dim} != data dimension {d}")
    U = net.points

    pieces = []
    snap = np.zeros(X.shape[0])
    ray_counts, cell_sizes = [], []
    baseline_terms = []
    for j in range(C.shape[0]):
        members = np.flatnonzero(labels == j)
        cell_sizes.append(int(members.size))
        if members.size == 0:
            continue
        c = C[j]
        V = X[members] - c
        norm = np.sqrt(np.einsum("ij,ij->i", V, V))
        baseline_terms.append(math.fsum(norm * norm if kind == CostKind.MEANS else norm))
        if np.all(norm == 0):
            pieces.append(c[None, :])
            continue
        dots = V @ U.T
        ray = np.argmax(dots, axis=1)
        s = np.maximum(dots[np.arange(members.size), ray], 0.0)
        resid = V - s[:, None] * U[ray]
        resid_norm = np.sqrt(np.einsum("ij,ij->i", resid, resid))
        nz = norm > 0
        snap[members[nz]] = resid_norm[nz] / norm[nz]
        for l in np.unique(ray):
            radii = s[ray == l]
            S_l = build_1d_upper(radii, epsilon / 2.0, kind, one_sided=True)
            ray_counts.append(int(S_l.size))
            pieces.append(c + S_l[:, None] * U[l])
    xi = np.unique(np.vstack(pieces), axis=0)
    baseline = math.fsum(baseline_terms)
    total = cost(xi, X, kind)
    return FanResult(xi, epsilon, kind, net, baseline, total, snap, ray_counts, cell_sizes)


# --- metric annuli ---------------------------------------------------------------

@dataclass
class AnnuliResult:
    reps: np.ndarray                 # chosen indices (into the metric)
    center: int
    epsilon: float
    R: float
    t: int
    annuli: list                     # index arrays Y_0..Y_t
    radii: list                      # absorption radius (eps/2) 2^j R per annulus
    rep_distance: dict               # member index -> distance to its own representative
    annulus_of: dict                 # member index -> j
    cost: float
    base_cost: float

    @property
    def size(self) -> int:
        return int(self.reps.size)

    def to_dict(self) -> dict:
        return {"reps": [int(i) for i in self.reps], "center": self.center, "epsilon": self.epsilon,
                "R": self.R, "t": self.t, "annulus_sizes": [int(a.size) for a in self.annuli],
                "cost": self.cost, "base_cost": self.base_cost, "size": self.size}


def build_metric_annuli(metric: FiniteMetric, c: int, epsilon: float, members=None) -> AnnuliResult:
    """Representatives of doubling annuli around ``c`` in a finite metric.

    With R the mean distance to ``c``, annulus Y_0 holds points within R and
    Y_j those within 2^j R but not 2^(j-1) R, for j up to ceil(log2 |Y|) + 1.
    Each annulus is covered greedily: repeatedly take the lowest-index
    uncovered point as representative and absorb every uncovered point of the
    annulus within (eps/2) 2^j R of it.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    Y = np.arange(metric.n) if members is None else np.unique(np.asarray(members, dtype=np.intp))
    if Y.size == 0:
        raise ValueError("member set is empty")
    c = int(c)
    D = metric.dist
    dc = D[Y, c]
    base = math.fsum(dc)
    if base == 0:
        return AnnuliResult(np.array([c]), c, epsilon, 0.0, 0, [Y], [0.0],
                            {int(y): 0.0 for y in Y}, {int(y): 0 for y in Y}, 0.0, 0.0)
    R = base / Y.size
    t = math.ceil(math.log2(Y.size)) + 1
    if dc.max() > (2 ** t) * R * (1 + REL_TOL):
        raise GuaranteeError("outermost annulus does not reach the farthest point")
    reps, annuli, radii = [], [], []
    rep_distance, annulus_of = {}, {}
    inner = -np.inf
    for j in range(t + 1):
        outer = (2 ** j) * R
        ring = Y[(dc > inner) & (dc <= outer)] if j else Y[dc <= outer]
        inner = outer
        rho = (epsilon / 2.0) * outer
        annuli.append(ring)
        radii.append(rho)
        uncovered = np.ones(ring.size, dtype=bool)
        for a in range(ring.size):
            if not uncovered[a]:
                continue
            p = ring[a]
            reps.append(int(p))
            near = uncovered & (D[p, ring] <= rho)
            for b in np.flatnonzero(near):
                rep_distance[int(ring[b])] = float(D[p, ring[b]])
                annulus_of[int(ring[b])] = j
            uncovered &= ~near
    reps = np.array(sorted(set(reps)), dtype=np.intp)
    got = metric_cost(metric, reps, Y).total
    return AnnuliResult(reps, c, epsilon, R, t, annuli, radii, rep_distance, annulus_of, got, base)
