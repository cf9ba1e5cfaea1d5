"""Geometric coresets, the nearest-count weighting rule, and weighted-coreset validation.

A geometric coreset is an unweighted set S with Phi(S, X) <= eps * Delta_k(X).
Weighting each s by the number of points of X that snap to it turns a
geometric coreset at precision eps^2/32 into a (k, eps) weighted coreset:
|Phi(C, S, w) - Phi(C, X)| <= eps * Phi(C, X) for every k-center set C.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constructions import build_fan_coreset
from .cost import assign, cost, evaluate_weighted
from .geometry import REL_TOL, CostKind, WeightedSet, as_points
from .nets import SphereNet
from .sampling import child_seed, d2_sample, make_rng
from .solvers import estimate_L, lloyd, lloyd_multistart, solve

CENTER_SOURCES = ("random", "lloyd", "subset", "adversarial-grid")
PIPELINE_DIVISOR = 32.0


def weigh(S, X, kind=CostKind.MEANS) -> WeightedSet:
    """w(s) = number of points of X whose nearest point of S is s (lowest index on ties).

    Points of S that attract nothing keep weight 0.
    """
    X = as_points(X)
    S = as_points(S, name="S")
    if S.shape[1] != X.shape[1]:
        raise ValueError("S and X differ in dimension")
    idx, _ = assign(S, X, kind)
    counts = np.bincount(idx, minlength=S.shape[0]).astype(np.float64)
    return WeightedSet(S, counts)


@dataclass(frozen=True)
class GeometricCheck:
    ratio: float
    passed: bool
    cost: float
    delta_k: float
    exact: bool
    method: str

    def to_dict(self) -> dict:
        return {"ratio": self.ratio, "pass": self.passed, "cost": self.cost,
                "delta_k": self.delta_k, "exact": self.exact, "method": self.method}


def check_geometric(S, X, k: int, epsilon: float, kind=CostKind.MEANS, oracle: str = "auto",
                    restarts: int = 10, rng_seed=0, delta_k: float | None = None) -> GeometricCheck:
    """Phi(S, X) / Delta_k(X) and whether it is at most ``epsilon``.

    ``delta_k`` overrides the oracle (e.g. with a known clustering cost).
    A zero Delta_k with positive cost yields ratio inf.
    """
    X = as_points(X)
    kind = CostKind.coerce(kind)
    phi = cost(S, X, kind)
    if delta_k is None:
        res = solve(X, k, kind, oracle, restarts, rng_seed)
        delta_k, exact, method = res.value, res.exact, res.method
    else:
        exact, method = False, "given"
    if delta_k == 0:
        ratio = 0.0 if phi == 0 else math.inf
    else:
        ratio = phi / delta_k
    return GeometricCheck(ratio, ratio <= epsilon * (1 + REL_TOL), phi, float(delta_k), exact, method)


@dataclass
class CoresetCertificate:
    epsilon: float
    trials: int
    worst_relative_error: float
    passed: bool
    center_source: str | None          # source of the worst candidate
    beta: float | None = None
    sources: tuple = CENTER_SOURCES
    skipped: int = 0                   # candidates with Phi(C, X) = 0
    worst_by_source: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "trials": self.trials,
                "worst_relative_error": self.worst_relative_error, "pass": self.passed,
                "center_source": self.center_source, "beta": self.beta,
                "sources": list(self.sources), "skipped": self.skipped,
                "worst_by_source": dict(self.worst_by_source)}


def _candidate(source: str, X: np.ndarray, k: int, rng, trial_seed, kind) -> np.ndarray:
    n, d = X.shape
    lo, hi = X.min(axis=0), X.max(axis=0)
    if source == "random":
        return rng.uniform(lo, hi, size=(k, d))
    if source == "lloyd":
        init = X[d2_sample(X, min(k, n), kind, trial_seed).chosen]
        C, _, _ = lloyd(X, init, kind, max_iter=20)
        return C
    if source == "subset":
        C = np.empty((k, d))
        for j in range(k):
            size = int(rng.integers(1, n + 1))
            C[j] = X[rng.choice(n, size=size, replace=False)].mean(axis=0)
        return C
    if source == "adversarial-grid":
        # one center far outside the data, the rest on a coarse grid of an enlarged box
        span = np.where(hi > lo, hi - lo, 1.0)
        mid = (lo + hi) / 2.0
        C = mid + span * (rng.integers(-2, 3, size=(k, d)) / 2.0)
        direction = rng.standard_normal(d)
        direction /= np.linalg.norm(direction) or 1.0
        C[0] = mid + direction * span.max() * float(10.0 ** rng.uniform(0.5, 3.0))
        return C
    raise ValueError(f"unknown center source {source!r}")


def validate_coreset(X, S: WeightedSet, k: int, epsilon: float, trials: int = 1000, rng_seed=0,
                     kind=CostKind.MEANS, sources=CENTER_SOURCES, beta: float | None = None,
                     centers: list | None = None) -> CoresetCertificate:
    """Worst |Phi(C, S, w) - Phi(C, X)| / Phi(C, X) over sampled k-center sets C.

    Candidates cycle through ``sources``: uniform in the bounding box, short
    Lloyd runs from D^2 seeds, centroids of random subsets, and a grid over an
    enlarged box with one far-away center. Extra candidate sets may be passed
    in ``centers``. Candidates with Phi(C, X) = 0 are skipped. Monte Carlo
    cannot exhaust all C, so the certificate records trial count and sources.
    """
    X = as_points(X)
    kind = CostKind.coerce(kind)
    if S.dim != X.shape[1]:
        raise ValueError("coreset and data differ in dimension")
    if k < 1:
        raise ValueError("k must be positive")
    rng = make_rng(rng_seed)
    worst, worst_src, skipped = 0.0, None, 0
    by_source: dict = {}
    done = 0
    plan = [(sources[i % len(sources)], None) for i in range(trials)] if sources else []
    plan += [("given", np.asarray(C, dtype=np.float64)) for C in (centers or [])]
    for i, (src, C) in enumerate(plan):
        if C is None:
            C = _candidate(src, X, k, rng, child_seed(rng_seed, i), kind)
        phi_x = cost(C, X, kind)
        if phi_x == 0:
            skipped += 1
            continue
        err = abs(evaluate_weighted(C, S, kind) - phi_x) / phi_x
        done += 1
        by_source[src] = max(by_source.get(src, 0.0), err)
        if err > worst or worst_src is None:
            worst, worst_src = err, src
    passed = done > 0 and worst <= epsilon + 1e-9
    return CoresetCertificate(float(epsilon), done, float(worst), passed, worst_src, beta,
                              tuple(sources), skipped, by_source)


@dataclass
class CoresetBuild:
    coreset: WeightedSet
    method: str                 # fan | d2
    epsilon: float
    inner_epsilon: float        # precision of the geometric coreset
    k: int
    baseline: float             # clustering cost the geometric guarantee is measured against
    geometric_cost: float
    exact_baseline: bool
    beta: float | None = None
    centers: np.ndarray | None = None

    @property
    def geometric_ratio(self) -> float:
        if self.baseline == 0:
            return 0.0 if self.geometric_cost == 0 else math.inf
        return self.geometric_cost / self.baseline

    def to_dict(self) -> dict:
        return {"method": self.method, "epsilon": self.epsilon, "inner_epsilon": self.inner_epsilon,
                "k": self.k, "size": len(self.coreset), "baseline": self.baseline,
                "geometric_cost": self.geometric_cost, "geometric_ratio": self.geometric_ratio,
                "exact_baseline": self.exact_baseline, "beta": self.beta}


def build_coreset(X, k: int, epsilon: float, method: str = "fan", kind=CostKind.MEANS,
                  rng_seed=0, restarts: int = 5, beta: float = 1.0, net: SphereNet | None = None,
                  candidate_pool: int | None = None) -> CoresetBuild:
    """Weighted (k, eps) coreset from a geometric coreset.

    ``fan``: fan construction at precision eps^2/32 around a Lloyd
    clustering, then :func:`weigh`. The geometric guarantee is relative to
    that clustering's cost, which stands in for Delta_k.
    ``d2``: D^2-sample m = L(X, k, eps^2/beta) points (heuristic L when the
    exact oracles do not apply), then :func:`weigh`.
    """
    X = as_points(X)
    kind = CostKind.coerce(kind)
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if method == "fan":
        inner = epsilon * epsilon / PIPELINE_DIVISOR
        sol = lloyd_multistart(X, k, restarts, rng_seed, kind)
        fan = build_fan_coreset(X, sol.centers, sol.labels, inner, kind, net, rng_seed, candidate_pool)
        return CoresetBuild(weigh(fan.points, X, kind), "fan", epsilon, inner, k, fan.baseline,
                            fan.cost, False, None, sol.centers)
    if method == "d2":
        if beta <= 0:
            raise ValueError("beta must be positive")
        inner = min(1.0, epsilon * epsilon / beta)
        est = estimate_L(X, k, inner, kind, restarts=restarts, rng_seed=rng_seed)
        trace = d2_sample(X, est.L_hat, kind, rng_seed)
        S = X[trace.chosen]
        return CoresetBuild(weigh(S, X, kind), "d2", epsilon, inner, k, est.delta_k_used,
                            trace.cost_after[-1], est.exact, beta)
    raise ValueError(f"unknown coreset method {method!r}; expected 'fan' or 'd2'")
