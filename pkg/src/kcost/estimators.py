"""scikit-learn style wrappers over the functional API."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .constructions import build_fan_coreset
from .coreset import weigh
from .cost import assign, cost
from .geometry import CostKind
from .sampling import d2_sample
from .solvers import lloyd_multistart


class D2Seeder(BaseEstimator):
    """D^2-sampling seeding of ``n_centers`` centers (over-seeding allowed)."""

    def __init__(self, n_centers: int = 8, kind: str = "means", random_state: int = 0):
        self.n_centers = n_centers
        self.kind = kind
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        trace = d2_sample(X, self.n_centers, CostKind.coerce(self.kind), self.random_state)
        self.trace_ = trace
        self.indices_ = np.asarray(trace.chosen, dtype=np.intp)
        self.cluster_centers_ = X[self.indices_]
        self.cost_ = trace.cost_after[-1]
        return self

    def score(self, X, y=None) -> float:
        """Negative cost of the seeded centers on X."""
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        return -cost(self.cluster_centers_, X, CostKind.coerce(self.kind))


class LloydKMeans(ClusterMixin, BaseEstimator):
    """Best of ``restarts`` D^2-seeded Lloyd runs."""

    def __init__(self, n_clusters: int = 8, restarts: int = 10, kind: str = "means",
                 max_iter: int = 200, random_state: int = 0):
        self.n_clusters = n_clusters
        self.restarts = restarts
        self.kind = kind
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        res = lloyd_multistart(X, self.n_clusters, self.restarts, self.random_state,
                               CostKind.coerce(self.kind), self.max_iter)
        self.cluster_centers_ = res.centers
        self.labels_ = res.labels
        self.inertia_ = res.value
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        return assign(self.cluster_centers_, X, CostKind.coerce(self.kind))[0]

    def score(self, X, y=None) -> float:
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        return -cost(self.cluster_centers_, X, CostKind.coerce(self.kind))


class FanCoreset(TransformerMixin, BaseEstimator):
    """Fan construction around a Lloyd clustering, weighted by nearest counts.

    ``transform`` snaps each row to its nearest coreset point.
    """

    def __init__(self, n_clusters: int = 3, epsilon: float = 0.5, kind: str = "means",
                 restarts: int = 5, random_state: int = 0):
        self.n_clusters = n_clusters
        self.epsilon = epsilon
        self.kind = kind
        self.restarts = restarts
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        kind = CostKind.coerce(self.kind)
        sol = lloyd_multistart(X, self.n_clusters, self.restarts, self.random_state, kind)
        fan = build_fan_coreset(X, sol.centers, sol.labels, self.epsilon, kind,
                                rng_seed=self.random_state)
        ws = weigh(fan.points, X, kind)
        self.coreset_ = ws.points
        self.weights_ = ws.weights
        self.cost_ratio_ = fan.cost_ratio
        self.result_ = fan
        return self

    def transform(self, X):
        check_is_fitted(self, "coreset_")
        X = check_array(X, dtype=np.float64)
        idx, _ = assign(self.coreset_, X, CostKind.coerce(self.kind))
        return self.coreset_[idx]
