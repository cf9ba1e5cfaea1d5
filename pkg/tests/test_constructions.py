import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kcost.constructions import (build_1d_upper, build_fan_coreset, build_metric_annuli,
                                 fan_net_scale, grid_params, size_bound_1d)
from kcost.cost import cost
from kcost.geometry import FiniteMetric
from kcost.metricspace import gamma_estimate
from kcost.nets import build_net, verify_cover
from kcost.solvers import lloyd_multistart

EPS = [1.0, 0.5, 0.25, 0.1]


def test_1d_upper_worked_example():
    X = np.array([[1.0], [-1.0]])
    p = grid_params(X.ravel(), 0.5, 2)
    assert math.isclose(p.R, math.sqrt(2) / 2) and p.g == 0.5 and p.r == 1.5 and p.t == 2
    S = build_1d_upper(X, 0.5)
    R = math.sqrt(2) / 2
    expected = sorted({0.0, R / 2, R, 1.5 * R, 2.25 * R} | {-R / 2, -R, -1.5 * R, -2.25 * R})
    assert np.allclose(S, expected, rtol=1e-15, atol=0)
    # 1.5 R = 1.06066 is the grid point nearest to +-1
    got = cost(S[:, None], X)
    assert math.isclose(got, 2 * (1.5 * R - 1) ** 2, rel_tol=1e-9)
    assert got <= 2 * (1 - R) ** 2 <= 0.5 * 2


def test_1d_upper_degenerate():
    assert build_1d_upper([[0.0]], 0.5).tolist() == [0.0]
    assert build_1d_upper([[0.0], [0.0]], 0.1, 1).tolist() == [0.0]
    with pytest.raises(ValueError):
        build_1d_upper([[1.0], [-1.0]], 0.5, one_sided=True)
    with pytest.raises(ValueError):
        build_1d_upper([[1.0, 2.0]], 0.5)
    with pytest.raises(ValueError):
        build_1d_upper([[1.0]], 1.5)


values = st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False)


@given(arrays(np.float64, st.integers(1, 300), elements=values), st.sampled_from(EPS),
       st.sampled_from([1, 2]))
def test_1d_upper_guarantee(x, eps, e):
    S = build_1d_upper(x, eps, e)
    base = cost([[0.0]], x[:, None], e)
    assert cost(S[:, None], x[:, None], e) <= eps * base * (1 + 1e-9)
    if e == 2:
        assert S.size <= size_bound_1d(x.size, eps)


def test_size_bound_formula():
    assert size_bound_1d(1, 0.5) == 2 * (2 + 1) + 2 * 1
    n, eps = 1000, 0.25
    t = math.ceil(math.log(n) / math.log(1 + math.sqrt(eps / 2)))
    assert size_bound_1d(n, eps) == 2 * (math.floor(math.sqrt(2 / eps)) + 1) + 2 * (t + 1)


def test_fan_reduces_to_1d_in_one_dimension():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 1)) * 5 + 2.0
    c = np.array([[2.0]])
    fan = build_fan_coreset(X, c, epsilon=0.5)
    v = X[:, 0] - 2.0
    pos = build_1d_upper(v[v > 0], 0.25, one_sided=True)
    neg = build_1d_upper(-v[v < 0], 0.25, one_sided=True)
    expected = np.unique(np.concatenate([2.0 + pos, 2.0 - neg]))
    assert np.array_equal(np.sort(fan.points.ravel()), expected)


def test_fan_single_location_cell():
    X = np.tile([[1.0, -2.0]], (7, 1))
    fan = build_fan_coreset(X, [[1.0, -2.0]], epsilon=0.5)
    assert fan.points.tolist() == [[1.0, -2.0]] and fan.cost == 0.0


def test_fan_uniform_disk():
    rng = np.random.default_rng(11)
    r = np.sqrt(rng.random(200)) * 3
    th = rng.random(200) * 2 * np.pi
    c = np.array([4.0, -1.0])
    X = c + np.column_stack([r * np.cos(th), r * np.sin(th)])
    fan = build_fan_coreset(X, [c], epsilon=0.5)
    assert fan.cost <= 0.5 * cost([c], X) * (1 + 1e-9)
    assert fan.cost_ratio <= 0.5


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]), st.sampled_from([0.5, 0.25]),
       st.integers(1, 3), st.sampled_from([1, 2]))
def test_fan_guarantee_and_snapping(seed, d, eps, k, e):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(80, d)) * rng.uniform(0.1, 10) + rng.integers(-5, 5, size=(80, d)) * 10
    sol = lloyd_multistart(X, k, restarts=2, rng_seed=seed, kind=e)
    fan = build_fan_coreset(X, sol.centers, sol.labels, eps, e)
    assert fan.cost <= eps * fan.baseline * (1 + 1e-9)
    g = fan_net_scale(eps, e)
    gap = verify_cover(fan.net).max_gap  # exact for d <= 2
    assert gap <= g
    assert fan.snap_ratio.max() <= gap * (1 + 1e-12) + 1e-15
    assert fan.points.shape[0] <= len(fan.net) * fan.max_per_line * k


def test_fan_median_uses_half_epsilon_scale():
    assert fan_net_scale(0.5, 2) == 0.5 and fan_net_scale(0.5, 1) == 0.25


def test_fan_errors():
    with pytest.raises(ValueError):
        build_fan_coreset(np.zeros((3, 2)), [[0.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        build_fan_coreset(np.zeros((3, 2)), [[0.0, 0.0]], net=build_net(3, 0.5, candidate_pool=200))


def test_fan_skips_empty_cells():
    X = np.array([[0.0, 0.0], [1.0, 0.0]])
    fan = build_fan_coreset(X, [[0.0, 0.0], [100.0, 100.0]], epsilon=0.5)
    assert fan.cell_sizes == [2, 0]


def test_annuli_single_point():
    res = build_metric_annuli(FiniteMetric(np.zeros((1, 1))), 0, 0.5)
    assert res.reps.tolist() == [0] and res.cost == 0.0


def test_annuli_uniform_metric():
    n = 9
    m = FiniteMetric(np.ones((n, n)) - np.eye(n))
    res = build_metric_annuli(m, 3, 0.5)
    assert math.isclose(res.R, (n - 1) / n)
    assert res.reps.tolist() == list(range(n)) and res.cost == 0.0


def test_annuli_line():
    m = FiniteMetric.from_points(np.arange(16.0)[:, None])
    res = build_metric_annuli(m, 0, 1.0)
    assert res.cost <= res.base_cost
    gamma = gamma_estimate(m, 0.5, all_balls=True)
    assert res.size <= gamma * (res.t + 1)
    for y, j in res.annulus_of.items():
        assert res.rep_distance[y] <= res.radii[j]
        if j >= 1:
            assert res.radii[j] <= 1.0 * m.dist[y, 0] * (1 + 1e-12)


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.sampled_from([1.0, 0.5, 0.25]), st.integers(1, 3))
def test_annuli_guarantee(seed, eps, d):
    rng = np.random.default_rng(seed)
    X = rng.standard_exponential(size=(int(rng.integers(1, 60)), d)) * 3
    m = FiniteMetric.from_points(X)
    c = int(rng.integers(m.n))
    res = build_metric_annuli(m, c, eps)
    assert res.cost <= eps * res.base_cost * (1 + 1e-9)
    for y, j in res.annulus_of.items():
        assert res.rep_distance[y] <= res.radii[j]
        if j >= 1:
            assert res.radii[j] <= eps * m.dist[y, c] * (1 + 1e-12)
    members = np.sort(np.concatenate(res.annuli))
    assert members.tolist() == list(range(m.n))
