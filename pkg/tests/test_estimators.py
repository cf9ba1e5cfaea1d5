import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from kcost.cost import cost
from kcost.estimators import D2Seeder, FanCoreset, LloydKMeans
from kcost.generators import gen_random


@pytest.fixture(scope="module")
def blobs():
    X, labels = gen_random("separated-clusters", n=60, d=2, k=3, sigma=1.0, rng_seed=4)
    return X, labels


def test_params_roundtrip():
    est = LloydKMeans(n_clusters=4, restarts=3)
    assert est.get_params()["n_clusters"] == 4
    twin = clone(est).set_params(kind="median")
    assert twin.kind == "median" and est.kind == "means"


def test_lloyd_recovers_clusters(blobs):
    X, labels = blobs
    km = LloydKMeans(n_clusters=3, restarts=4, random_state=1).fit(X)
    pred = km.fit_predict(X)
    for j in range(3):
        assert len(set(pred[labels == j])) == 1
    assert km.score(X) == pytest.approx(-km.inertia_, rel=1e-9)
    assert np.array_equal(km.predict(X), km.labels_)


def test_seeder(blobs):
    X, _ = blobs
    s = D2Seeder(n_centers=5, random_state=2).fit(X)
    assert s.cluster_centers_.shape == (5, 2) and len(set(s.indices_.tolist())) == 5
    assert s.cost_ == pytest.approx(cost(s.cluster_centers_, X), rel=1e-12)
    assert s.score(X) == pytest.approx(-s.cost_)


def test_fan_coreset_transform(blobs):
    X, _ = blobs
    fc = FanCoreset(n_clusters=3, epsilon=0.5, random_state=0).fit(X)
    assert fc.weights_.sum() == X.shape[0]
    assert fc.cost_ratio_ <= 0.5 * (1 + 1e-9)
    T = fc.transform(X)
    assert T.shape == X.shape
    assert all(any(np.array_equal(t, c) for c in fc.coreset_) for t in T[:10])


@pytest.mark.parametrize("est,method", [(LloydKMeans(), "predict"), (D2Seeder(), "score"),
                                        (FanCoreset(), "transform")])
def test_not_fitted(est, method):
    with pytest.raises(NotFittedError):
        getattr(est, method)(np.zeros((3, 2)))
