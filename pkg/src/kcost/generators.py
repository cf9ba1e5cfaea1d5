"""Lower-bound instance families and random test data.

Lower-bound instances put ``r^(2(t-i))`` co-located points at distance
``r^i`` (i = 1..t) from a center, with ``r = ceil(1 + sqrt(32 eps))``. Every
site radius and multiplicity is an exact integer, so the reference cost is
computed in integer arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cost import assign, cost
from .geometry import EXPLICIT_POINT_CAP, CostKind, WeightedSet
from .nets import SphereNet, build_net, verify_packing
from .sampling import make_rng

LOWER_BOUND_CAP = EXPLICIT_POINT_CAP


def lower_bound_ratio(epsilon: float) -> int:
    """r = ceil(1 + sqrt(32 eps))."""
    return math.ceil(1.0 + math.sqrt(32.0 * epsilon))


def packing_scale(epsilon: float, kind=CostKind.MEANS) -> float:
    """Direction packing scale: sqrt(8 eps) for means, 4 eps for median."""
    kind = CostKind.coerce(kind)
    return math.sqrt(8.0 * epsilon) if kind == CostKind.MEANS else 4.0 * epsilon


@dataclass
class LowerBoundSpec:
    epsilon: float
    k: int
    d: int
    t: int
    r: int
    eta: int                       # points per ray (or per side in 1-D)
    realized_n: int
    reference_cost: int            # cost of the apex/origin centers, exact integer
    kind: CostKind = CostKind.MEANS
    apexes: np.ndarray | None = None
    packing_net: SphereNet | None = None
    sites: np.ndarray | None = None          # populated locations
    site_levels: np.ndarray | None = None    # i such that the site is at distance r^i
    site_counts: np.ndarray | None = None    # multiplicity of each site
    compressed: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon, "k": self.k, "d": self.d, "t": self.t, "r": self.r,
            "eta": self.eta, "realized_n": self.realized_n, "reference_cost": self.reference_cost,
            "kind": int(self.kind), "net_size": None if self.packing_net is None else len(self.packing_net),
            "compressed": self.compressed,
            "apexes": None if self.apexes is None else self.apexes.tolist(),
        }


def _check_epsilon(epsilon: float):
    if not 0 < epsilon < 1 / 8:
        raise ValueError(f"epsilon must lie in (0, 1/8), got {epsilon}")


def _profile(r: int, t: int, kind=CostKind.MEANS):
    """Integer radii r^i and multiplicities r^(kind*(t-i)) for i = 1..t.

    Each level then contributes exactly r^(kind*t) to the cost of the apex.
    """
    e = int(kind)
    radii = [r ** i for i in range(1, t + 1)]
    counts = [r ** (e * (t - i)) for i in range(1, t + 1)]
    return radii, counts


def _emit(sites: np.ndarray, counts: np.ndarray, compress: bool):
    if compress:
        return WeightedSet(sites, counts.astype(np.float64))
    return np.repeat(sites, counts.astype(np.int64), axis=0)


def gen_lower_1d(epsilon: float, t: int, *, compress: bool | None = None):
    """Symmetric 1-D instance: r^(2(t-i)) points at each of +r^i and -r^i.

    Returns ``(X, spec)``. ``X`` is an ``(n, 1)`` array, or a multiplicity
    :class:`WeightedSet` when ``compress`` is set (automatic above 10^6 points).
    The cost of the single center 0 is exactly 2 t r^(2t).
    """
    _check_epsilon(epsilon)
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    r = lower_bound_ratio(epsilon)
    radii, counts = _profile(r, t)
    n = 2 * sum(counts)
    if n != 2 * (r ** (2 * t) - 1) // (r * r - 1):
        raise AssertionError("multiplicity series mismatch")
    if compress is None:
        compress = n > LOWER_BOUND_CAP
    ref = sum(2 * c * rad * rad for rad, c in zip(radii, counts))
    if ref != 2 * t * r ** (2 * t):
        raise AssertionError("reference cost mismatch")
    site_vals = np.array([-rad for rad in reversed(radii)] + radii, dtype=np.float64)
    site_counts = np.array(list(reversed(counts)) + counts, dtype=np.int64)
    levels = np.array(list(range(t, 0, -1)) + list(range(1, t + 1)))
    X = _emit(site_vals[:, None], site_counts, compress)
    spec = LowerBoundSpec(epsilon, 1, 1, t, r, sum(counts), n, ref, CostKind.MEANS,
                          np.zeros((1, 1)), None, site_vals[:, None], levels, site_counts, compress)
    return X, spec


def gen_lower_ddim(epsilon: float, k: int, d: int, t: int, net: SphereNet | None = None,
                   kind=CostKind.MEANS, *, rng_seed=0, candidate_pool: int | None = None,
                   compress: bool | None = None):
    """k well-separated fans, each carrying the 1-D lower-bound profile on every ray.

    Rays point along the directions of a packing ``net`` (built at
    :func:`packing_scale` when omitted). Apexes sit on the first axis, spaced
    2 n^2 apart. The reference cost, serving every point from its own apex, is
    k * |net| * t * r^(kind*t); for means that is k * |net| * t * r^(2t).
    For median the multiplicities are r^(t-i) so every level still weighs
    the same.
    """
    _check_epsilon(epsilon)
    kind = CostKind.coerce(kind)
    if k < 1 or d < 1 or t < 1:
        raise ValueError("k, d and t must all be >= 1")
    scale = packing_scale(epsilon, kind)
    if net is None:
        net = build_net(d, scale, candidate_pool, rng_seed)
    if net.dim != d:
        raise ValueError(f"net dimension {net.dim} != {d}")
    if len(net) >= 2 and not verify_packing(net).min_pairwise >= scale - 1e-12:
        raise ValueError(f"net is not a packing at scale {scale}")
    r = lower_bound_ratio(epsilon)
    radii, counts = _profile(r, t, kind)
    per_ray = sum(counts)
    m = len(net)
    n = k * m * per_ray
    if compress is None:
        compress = False
    if n > LOWER_BOUND_CAP and not compress:
        raise ValueError(f"instance would have n={n} > {LOWER_BOUND_CAP} points; pass compress=True")
    spacing = 2.0 * float(n) ** 2
    apexes = np.zeros((k, d))
    apexes[:, 0] = spacing * np.arange(k)
    U = np.asarray(net.points)
    sites, levels, site_counts = [], [], []
    for a in range(k):
        for u in U:
            for i, (rad, c) in enumerate(zip(radii, counts), start=1):
                sites.append(apexes[a] + rad * u)
                levels.append(i)
                site_counts.append(c)
    sites = np.array(sites)
    site_counts = np.array(site_counts, dtype=np.int64)
    unit = sum(c * rad ** int(kind) for rad, c in zip(radii, counts))
    if unit != t * r ** (int(kind) * t):
        raise AssertionError("reference cost mismatch")
    ref = k * m * unit
    X = _emit(sites, site_counts, compress)
    spec = LowerBoundSpec(epsilon, k, d, t, r, per_ray, n, ref, kind, apexes, net,
                          sites, np.array(levels), site_counts, compress)
    return X, spec


# --- certificates -------------------------------------------------------------------

def ball_radius_factor(epsilon: float, kind=CostKind.MEANS) -> float:
    """Half the packing scale: sqrt(2 eps) for means, 2 eps for median."""
    return packing_scale(epsilon, kind) / 2.0


def check_disjoint_balls(spec: LowerBoundSpec, tol: float = 1e-9) -> tuple[bool, float]:
    """Exact pairwise check that balls of radius factor * r^i around the sites
    have disjoint interiors. Returns ``(ok, min slack)`` where slack is
    ``dist - (rad_p + rad_q)`` relative to the larger radius.
    """
    f = ball_radius_factor(spec.epsilon, spec.kind)
    rad = f * np.power(float(spec.r), spec.site_levels.astype(np.float64))
    P = spec.sites
    worst = math.inf
    for i in range(P.shape[0] - 1):
        diff = P[i + 1:] - P[i]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        need = rad[i + 1:] + rad[i]
        slack = (dist - need) / np.maximum(rad[i + 1:], rad[i])
        worst = min(worst, float(slack.min()))
    return worst >= -tol, worst


def check_apex_cells(X, spec: LowerBoundSpec) -> bool:
    """Each apex's Voronoi cell holds exactly the points built around it."""
    pts = X.points if isinstance(X, WeightedSet) else X
    per_apex = pts.shape[0] // spec.k
    labels, _ = assign(spec.apexes, pts, spec.kind)
    expected = np.repeat(np.arange(spec.k), per_apex)
    return bool(np.array_equal(labels, expected))


def adversarial_check(X, spec: LowerBoundSpec, size: int | None = None, iters: int = 200,
                      rng_seed=0) -> dict:
    """Heuristic adversary: local search for ``size`` centers minimizing cost.

    Candidates are the populated sites and the apexes. The default size is
    one less than half the number of sites, below which the ball argument
    forces cost above ``eps * reference``. Reports the best cost found and
    whether it still exceeds the threshold; the search is not exhaustive.
    """
    pts = X.points if isinstance(X, WeightedSet) else X
    w = X.weights if isinstance(X, WeightedSet) else None
    cand = np.vstack([spec.sites, spec.apexes])
    n_sites = spec.sites.shape[0]
    if size is None:
        size = max(1, math.ceil(n_sites / 2) - 1)
    size = min(size, cand.shape[0])
    threshold = spec.epsilon * spec.reference_cost
    rng = make_rng(rng_seed)

    def phi(idx):
        C = cand[list(idx)]
        if w is None:
            return cost(C, pts, spec.kind)
        _, c = assign(C, pts, spec.kind)
        return math.fsum(w * c)

    # greedy start: repeatedly add the candidate with the largest cost drop
    chosen = []
    for _ in range(size):
        best = None
        for j in range(cand.shape[0]):
            if j in chosen:
                continue
            v = phi(chosen + [j])
            if best is None or v < best[0]:
                best = (v, j)
        chosen.append(best[1])
    current = phi(chosen)
    for _ in range(iters):
        out = int(rng.integers(len(chosen)))
        inn = int(rng.integers(cand.shape[0]))
        if inn in chosen:
            continue
        trial = chosen.copy()
        trial[out] = inn
        v = phi(trial)
        if v < current:
            chosen, current = trial, v
    return {"size": size, "best_cost": current, "threshold": threshold,
            "holds": current > threshold, "heuristic": True}


# --- random data ---------------------------------------------------------------

RANDOM_KINDS = ("uniform-box", "gaussian-mixture", "separated-clusters")


def gen_random(kind: str, n: int = 100, d: int = 2, *, k: int = 3, sigma: float = 1.0,
               box: float = 1.0, separation: float = 100.0, rng_seed=0):
    """Reproducible random datasets.

    ``uniform-box``: n points uniform in [-box, box]^d.
    ``gaussian-mixture``: k means uniform in [-box, box]^d, n points split
    round-robin, isotropic noise sigma.
    ``separated-clusters``: k clusters of n // k points (the first n % k get
    one more) with Gaussian offsets sigma; centers on the first axis spaced
    ``separation`` times the largest within-cluster radius (or ``separation``
    itself when every cluster is a single location).
    Returns ``(X, labels)``; ``labels`` is None for the box.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if sigma < 0 or box <= 0:
        raise ValueError("sigma must be >= 0 and box > 0")
    rng = make_rng(rng_seed)
    if kind == "uniform-box":
        return rng.uniform(-box, box, size=(n, d)), None
    if k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    labels = np.arange(n) % k
    if kind == "gaussian-mixture":
        means = rng.uniform(-box, box, size=(k, d))
        return means[labels] + sigma * rng.standard_normal((n, d)), labels
    if kind == "separated-clusters":
        if separation <= 0:
            raise ValueError("separation must be positive")
        labels = np.sort(labels)
        offsets = sigma * rng.standard_normal((n, d))
        radius = float(np.sqrt(np.einsum("ij,ij->i", offsets, offsets)).max())
        gap = separation * (radius if radius > 0 else 1.0)
        centers = np.zeros((k, d))
        centers[:, 0] = gap * np.arange(k)
        return centers[labels] + offsets, labels
    raise ValueError(f"unknown random kind {kind!r}; expected one of {RANDOM_KINDS}")


def gen_heavy_light(k: int, heavy: int, spreads, d: int = 2, separation: float = 1e4, rng_seed=0):
    """k separated clusters, each ``heavy`` co-located points plus one light
    point at distance ``spreads[j]`` in a random direction.

    Clusters sit on the first axis, ``separation`` apart. Returns ``(X, labels)``.
    """
    spreads = [float(s) for s in spreads]
    if k < 1 or heavy < 1 or d < 1 or len(spreads) != k:
        raise ValueError("need k >= 1, heavy >= 1, d >= 1 and one spread per cluster")
    if min(spreads) < 0 or separation <= 2 * max(spreads):
        raise ValueError("spreads must be >= 0 and well below the separation")
    rng = make_rng(rng_seed)
    pts, labels = [], []
    for j, s in enumerate(spreads):
        c = np.zeros(d)
        c[0] = separation * j
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u) or 1.0
        pts += [c] * heavy + [c + s * u]
        labels += [j] * (heavy + 1)
    return np.array(pts), np.array(labels)
