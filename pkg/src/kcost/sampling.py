"""D^2-sampling (k-means++ seeding), including over-seeding beyond k centers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CostKind, as_points, point_distances


def make_rng(seed) -> np.random.Generator:
    """Accept an int, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Independent stream for trial/restart ``index`` derived from ``seed``."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))


@dataclass(frozen=True)
class SeedingTrace:
    chosen: list[int]
    cost_after: list[float]
    seed: object = None
    stopped_early: bool = False

    def to_dict(self) -> dict:
        seed = self.seed if isinstance(self.seed, (int, type(None))) else str(self.seed)
        return {"chosen": list(self.chosen), "cost_after": list(self.cost_after),
                "seed": seed, "stopped_early": self.stopped_early}


def d2_sample(X, m: int, kind=CostKind.MEANS, rng_seed=0, *, first: int | None = None) -> SeedingTrace:
    """Pick up to ``m`` centers from ``X`` by D^kind sampling.

    The first center is uniform over the rows of ``X`` (or ``first`` when
    given); each later one is drawn with probability proportional to its
    current distance, raised to ``kind``, from the chosen set. Sampling stops
    early, with ``stopped_early`` set, once every point sits on a center.
    """
    X = as_points(X)
    n = X.shape[0]
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m > n:
        raise ValueError(f"m={m} exceeds the number of points n={n}")
    kind = CostKind.coerce(kind)
    rng = make_rng(rng_seed)

    idx = int(rng.integers(n)) if first is None else int(first)
    if not 0 <= idx < n:
        raise ValueError(f"first={first} out of range")
    chosen = [idx]
    mass = point_distances(X, X[idx], kind)
    cost_after = [float(mass.sum())]
    stopped = False
    while len(chosen) < m:
        cum = np.cumsum(mass)
        total = cum[-1]
        if total <= 0.0:
            stopped = True
            break
        # side="right" never lands on a zero-mass point
        idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
        idx = min(idx, n - 1)
        chosen.append(idx)
        np.minimum(mass, point_distances(X, X[idx], kind), out=mass)
        cost_after.append(float(mass.sum()))
    seed = None if isinstance(rng_seed, np.random.Generator) else rng_seed
    return SeedingTrace(chosen, cost_after, seed, stopped)


@dataclass
class OverseedReport:
    k: int
    epsilon: float
    c_const: float
    m: int
    delta_k: float
    threshold: float
    trials: int
    successes: int
    exact_oracle: bool
    final_costs: list[float] = field(default_factory=list)
    mean_curve: list[float] = field(default_factory=list)
    exact_curve: list[float] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        return {
            "k": self.k, "epsilon": self.epsilon, "c_const": self.c_const, "m": self.m,
            "delta_k": self.delta_k, "threshold": self.threshold, "trials": self.trials,
            "successes": self.successes, "success_rate": self.success_rate,
            "exact_oracle": self.exact_oracle, "final_costs": self.final_costs,
            "mean_curve": self.mean_curve, "exact_curve": self.exact_curve,
        }


def overseed_experiment(X, k: int, epsilon: float, c_const: float = 1.0, trials: int = 50,
                        rng_seed=0, kind=CostKind.MEANS, oracle: str = "auto",
                        restarts: int = 10) -> OverseedReport:
    """Over-seed with m = L(X, k, epsilon / c_const) centers and count how often
    the sampled set costs at most ``epsilon * Delta_k(X)``.
    """
    from .solvers import delta_curve, estimate_L

    X = as_points(X)
    kind = CostKind.coerce(kind)
    if c_const <= 0:
        raise ValueError("c_const must be positive")
    est = estimate_L(X, k, min(1.0, epsilon / c_const), kind, oracle=oracle,
                     restarts=restarts, rng_seed=rng_seed)
    delta_k = est.delta_k_used
    threshold = epsilon * delta_k
    m = est.L_hat
    finals, curves = [], []
    successes = 0
    for trial in range(trials):
        tr = d2_sample(X, m, kind, child_seed(rng_seed, trial))
        final = tr.cost_after[-1]
        finals.append(final)
        curve = tr.cost_after + [final] * (m - len(tr.cost_after))
        curves.append(curve)
        successes += final <= threshold
    mean_curve = [math.fsum(c[i] for c in curves) / len(curves) for i in range(m)] if curves else []
    exact_curve = []
    if est.exact:
        exact_curve = delta_curve(X, m, kind, oracle=est.method).values
    return OverseedReport(k, epsilon, c_const, m, delta_k, threshold, trials, int(successes),
                          est.exact, finals, mean_curve, exact_curve)
