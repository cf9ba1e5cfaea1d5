"""Exact and heuristic oracles for the optimal k-center cost, and L(X, k, eps).

``exact_1d`` and ``enumerate_exact`` are independent exact routes; both report
the value of their optimal partition through :func:`kcost.cost.cluster_cost`,
so agreement on the partition means bit-identical values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cost import assign, centroid, cluster_cost, cost, geometric_median
from .geometry import CostKind, as_points
from .sampling import child_seed, d2_sample

ENUMERATE_MAX_N = 12
LLOYD_MAX_ITER = 200


@dataclass(frozen=True)
class OptimalCostResult:
    value: float
    centers: np.ndarray
    exact: bool
    method: str  # dp1d | enumerate | lloyd-multistart
    labels: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "exact": self.exact, "method": self.method,
                "centers": self.centers.tolist()}


@dataclass(frozen=True)
class LEstimate:
    k: int
    epsilon: float
    L_hat: int
    exact: bool
    delta_k_used: float
    method: str = ""

    def to_dict(self) -> dict:
        return {"k": self.k, "epsilon": self.epsilon, "L_hat": self.L_hat,
                "exact": self.exact, "delta_k_used": self.delta_k_used, "method": self.method}


@dataclass(frozen=True)
class DecayCurve:
    """Delta_m (or a heuristic estimate) for m = 1..len(values)."""

    values: list
    exact: list

    def pairs(self):
        return [(m + 1, v, e) for m, (v, e) in enumerate(zip(self.values, self.exact))]


def _center_of(P: np.ndarray, kind: CostKind) -> np.ndarray:
    return centroid(P) if kind == CostKind.MEANS else geometric_median(P)


def _result_from_labels(X, labels, kind, exact, method) -> OptimalCostResult:
    parts = [X[labels == j] for j in range(int(labels.max()) + 1)]
    parts = [P for P in parts if P.shape[0]]
    value = math.fsum(cluster_cost(P, kind) for P in parts)
    centers = np.vstack([_center_of(P, kind) for P in parts])
    return OptimalCostResult(value, centers, exact, method, labels)


# --- 1-D dynamic program ------------------------------------------------------

def _interval_costs(xs: np.ndarray, P1: np.ndarray, P2: np.ndarray, i: int, kind: CostKind) -> np.ndarray:
    """Cost of xs[s:i] for every s in 0..i-1."""
    s = np.arange(i)
    length = i - s
    if kind == CostKind.MEANS:
        tot = P1[i] - P1[s]
        c = (P2[i] - P2[s]) - tot * tot / length
        return np.maximum(c, 0.0)
    med = s + (length - 1) // 2  # lower median
    x = xs[med]
    left = x * (med - s) - (P1[med] - P1[s])
    right = (P1[i] - P1[med + 1]) - x * (i - med - 1)
    return np.maximum(left + right, 0.0)


def _dp_1d(xs: np.ndarray, k: int, kind: CostKind):
    n = xs.size
    P1 = np.concatenate([[0.0], np.cumsum(xs)])
    P2 = np.concatenate([[0.0], np.cumsum(xs * xs)])
    costs = [None] + [_interval_costs(xs, P1, P2, i, kind) for i in range(1, n + 1)]
    dp = np.full((k + 1, n + 1), np.inf)
    back = np.zeros((k + 1, n + 1), dtype=np.intp)
    dp[0, 0] = 0.0
    for j in range(1, k + 1):
        for i in range(j, n + 1):
            cand = dp[j - 1, :i] + costs[i]
            s = int(np.argmin(cand))
            dp[j, i] = cand[s]
            back[j, i] = s
    return dp, back


def exact_1d(X, k: int, kind=CostKind.MEANS) -> OptimalCostResult:
    """Optimal k-clustering of 1-D data by dynamic programming over sorted order."""
    X = as_points(X)
    kind = CostKind.coerce(kind)
    if X.shape[1] != 1:
        raise ValueError(f"exact_1d needs d=1, got d={X.shape[1]}")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    order = np.argsort(X[:, 0], kind="stable")
    xs = X[order, 0]
    _, back = _dp_1d(xs, k, kind)
    sorted_labels = np.empty(n, dtype=np.intp)
    i = n
    for j in range(k, 0, -1):
        s = back[j, i]
        sorted_labels[s:i] = j - 1
        i = s
    labels = np.empty(n, dtype=np.intp)
    labels[order] = sorted_labels
    return _result_from_labels(X, labels, kind, True, "dp1d")


# --- brute force over set partitions -------------------------------------------

@lru_cache(maxsize=None)
def _partition_pairs(n: int):
    """All (mask, part) with part a subset of mask containing mask's lowest bit.

    Every set partition of ``mask`` is reached by repeatedly peeling off the
    part that contains its lowest element.
    """
    masks, parts = [], []
    full = (1 << n) - 1
    for part in range(1, full + 1):
        low = part & -part
        free = full & ~part & ~(low - 1)
        sub = free
        while True:
            masks.append(part | sub)
            parts.append(part)
            if sub == 0:
                break
            sub = (sub - 1) & free
    masks = np.array(masks, dtype=np.intp)
    parts = np.array(parts, dtype=np.intp)
    order = np.argsort(masks, kind="stable")
    masks, parts = masks[order], parts[order]
    starts = np.flatnonzero(np.r_[True, masks[1:] != masks[:-1]])
    return masks, parts, starts


def _subset_costs(X: np.ndarray, kind: CostKind) -> np.ndarray:
    key = (X.shape, X.tobytes(), int(kind))
    hit = _SUBSET_CACHE.get(key)
    if hit is None:
        hit = _SUBSET_CACHE[key] = _compute_subset_costs(X, kind)
        while len(_SUBSET_CACHE) > 64:
            _SUBSET_CACHE.pop(next(iter(_SUBSET_CACHE)))
    return hit


_SUBSET_CACHE: dict = {}


def _compute_subset_costs(X: np.ndarray, kind: CostKind) -> np.ndarray:
    """Single-part cost of every subset, indexed by bitmask.

    Used only to select the optimal partition; the reported value is recomputed
    from the selected parts.
    """
    n = X.shape[0]
    if kind == CostKind.MEANS:
        size = np.zeros(1 << n)
        lin = np.zeros((1 << n, X.shape[1]))
        sq = np.zeros(1 << n)
        for b in range(n):
            lo, hi = 1 << b, 1 << (b + 1)
            size[lo:hi] = size[:lo] + 1
            lin[lo:hi] = lin[:lo] + X[b]
            sq[lo:hi] = sq[:lo] + X[b] @ X[b]
        size[0] = 1
        costs = sq - np.einsum("ij,ij->i", lin, lin) / size
        return np.maximum(costs, 0.0)
    costs = np.zeros(1 << n)
    bits = np.arange(n)
    for mask in range(1, 1 << n):
        members = bits[(mask >> bits) & 1 == 1]
        costs[mask] = cluster_cost(X[members], kind)
    return costs


def _enumerate_levels(X: np.ndarray, kmax: int, kind: CostKind):
    """best[j][mask]: optimal cost of ``mask`` split into at most j parts."""
    n = X.shape[0]
    masks, parts, starts = _partition_pairs(n)
    sub_cost = _subset_costs(X, kind)
    best = [None, sub_cost]
    part_cost = sub_cost[parts]
    rest = masks ^ parts
    for _ in range(2, kmax + 1):
        vals = part_cost + best[-1][rest]
        level = np.zeros(1 << n)
        level[masks[starts]] = np.minimum.reduceat(vals, starts)
        best.append(level)
    return best, sub_cost


def _enumerate_labels(best, sub_cost, n: int, k: int) -> np.ndarray:
    labels = np.empty(n, dtype=np.intp)
    mask = (1 << n) - 1
    j, label = k, 0
    bits = np.arange(n)
    while mask:
        low = mask & -mask
        free = mask ^ low
        target = best[j][mask]
        choice, sub = None, free
        # first pass: exact match; floating ties resolved by first hit
        while True:
            part = low | sub
            rest = mask ^ part
            val = sub_cost[part] + (best[j - 1][rest] if j > 1 else (0.0 if rest == 0 else np.inf))
            if val == target:
                choice = part
                break
            if sub == 0:
                break
            sub = (sub - 1) & free
        if choice is None:
            raise RuntimeError("partition reconstruction failed")
        labels[bits[(choice >> bits) & 1 == 1]] = label
        label += 1
        mask ^= choice
        j -= 1
    return labels


def enumerate_exact(X, k: int, kind=CostKind.MEANS) -> OptimalCostResult:
    """Optimal cost by exhaustive search over partitions into at most k parts.

    Each part is served by its centroid (means) or geometric median (median).
    Limited to n <= 12.
    """
    X = as_points(X)
    kind = CostKind.coerce(kind)
    n = X.shape[0]
    if n > ENUMERATE_MAX_N:
        raise ValueError(f"enumerate_exact is limited to n <= {ENUMERATE_MAX_N}, got n={n}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    k = min(k, n)
    best, sub_cost = _enumerate_levels(X, k, kind)
    labels = _enumerate_labels(best, sub_cost, n, k)
    return _result_from_labels(X, labels, kind, True, "enumerate")


# --- Lloyd with D^2 seeding ------------------------------------------------------

def lloyd(X, init, kind=CostKind.MEANS, max_iter: int = LLOYD_MAX_ITER):
    """Lloyd iterations from ``init``; returns ``(centers, labels, iterations)``.

    Stops when no assignment changes or after ``max_iter`` rounds. An empty
    cluster is reseeded at the point currently paying the most.
    """
    X = as_points(X)
    kind = CostKind.coerce(kind)
    C = as_points(init, name="init").copy()
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        new_labels, costs = assign(C, X, kind)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        taken = set()
        for j in range(C.shape[0]):
            members = X[labels == j]
            if members.shape[0]:
                C[j] = _center_of(members, kind)
                continue
            order = np.argsort(-costs, kind="stable")
            far = next(int(i) for i in order if int(i) not in taken)
            taken.add(far)
            C[j] = X[far]
            costs[far] = 0.0
    labels, _ = assign(C, X, kind)
    return C, labels, it


def lloyd_multistart(X, k: int, restarts: int = 10, rng_seed=0, kind=CostKind.MEANS,
                     max_iter: int = LLOYD_MAX_ITER) -> OptimalCostResult:
    """Best of ``restarts`` runs of D^2 seeding followed by Lloyd iterations."""
    X = as_points(X)
    kind = CostKind.coerce(kind)
    n = X.shape[0]
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    best = None
    for r in range(restarts):
        trace = d2_sample(X, k, kind, child_seed(rng_seed, r))
        C, labels, _ = lloyd(X, X[trace.chosen], kind, max_iter)
        value = cost(C, X, kind)
        if best is None or value < best[0]:  # strict: ties keep the lower restart index
            best = (value, C, labels)
    value, C, labels = best
    return OptimalCostResult(value, C, False, "lloyd-multistart", labels)


# --- oracle dispatch, decay curves, L estimate ------------------------------------

def _pick_oracle(X: np.ndarray, oracle: str) -> str:
    if oracle in ("auto", None):
        if X.shape[1] == 1:
            return "dp1d"
        if X.shape[0] <= ENUMERATE_MAX_N:
            return "enumerate"
        return "lloyd"
    aliases = {"lloyd-multistart": "lloyd", "exact": "auto"}
    oracle = aliases.get(oracle, oracle)
    if oracle == "auto":
        return _pick_oracle(X, "auto")
    if oracle not in ("dp1d", "enumerate", "lloyd"):
        raise ValueError(f"unknown oracle {oracle!r}")
    return oracle


def solve(X, k: int, kind=CostKind.MEANS, method: str = "auto", restarts: int = 10,
          rng_seed=0) -> OptimalCostResult:
    X = as_points(X)
    method = _pick_oracle(X, method)
    if method == "dp1d":
        return exact_1d(X, k, kind)
    if method == "enumerate":
        return enumerate_exact(X, k, kind)
    return lloyd_multistart(X, k, restarts, rng_seed, kind)


class _DeltaOracle:
    """Memoized m -> Delta_m for one dataset."""

    def __init__(self, X, kind, oracle, restarts, rng_seed):
        self.X = as_points(X)
        self.kind = CostKind.coerce(kind)
        self.method = _pick_oracle(self.X, oracle)
        self.exact = self.method != "lloyd"
        self.restarts = restarts
        self.rng_seed = rng_seed
        self.n_distinct = np.unique(self.X, axis=0).shape[0]
        self._cache = {}
        self._levels = None

    def __call__(self, m: int) -> float:
        if m >= self.n_distinct:
            return 0.0
        if m not in self._cache:
            if self.method == "enumerate":
                if self._levels is None:
                    n = self.X.shape[0]
                    best, sub_cost = _enumerate_levels(self.X, n, self.kind)
                    self._levels = (best, sub_cost)
                best, sub_cost = self._levels
                labels = _enumerate_labels(best, sub_cost, self.X.shape[0], m)
                self._cache[m] = _result_from_labels(self.X, labels, self.kind, True, "enumerate").value
            else:
                self._cache[m] = solve(self.X, m, self.kind, self.method, self.restarts,
                                       self.rng_seed).value
        return self._cache[m]


def delta_curve(X, m_max: int | None = None, kind=CostKind.MEANS, oracle: str = "auto",
                restarts: int = 10, rng_seed=0) -> DecayCurve:
    """Delta_m for m = 1..m_max (default n)."""
    delta = _DeltaOracle(X, kind, oracle, restarts, rng_seed)
    n = delta.X.shape[0]
    m_max = n if m_max is None else min(int(m_max), n)
    values = [delta(m) for m in range(1, m_max + 1)]
    return DecayCurve(values, [delta.exact] * len(values))


def estimate_L(X, k: int, epsilon: float, kind=CostKind.MEANS, oracle: str = "auto",
               restarts: int = 10, rng_seed=0) -> LEstimate:
    """Least m with Delta_m(X) <= epsilon * Delta_k(X), found by binary search.

    Binary search is valid because Delta_m is non-increasing in m; with the
    heuristic oracle that only holds approximately and ``exact`` is False.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    delta = _DeltaOracle(X, kind, oracle, restarts, rng_seed)
    n = delta.X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    delta_k = delta(k)
    threshold = epsilon * delta_k
    lo, hi = 1, n  # Delta_n == 0 always satisfies the condition
    while lo < hi:
        mid = (lo + hi) // 2
        if delta(mid) <= threshold:
            hi = mid
        else:
            lo = mid + 1
    return LEstimate(k, float(epsilon), lo, delta.exact, delta_k, delta.method)
