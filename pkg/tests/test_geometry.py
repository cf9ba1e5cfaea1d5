import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kcost.geometry import (CostKind, FiniteMetric, WeightedSet, distance, format_dataset,
                            read_dataset, read_metric, read_weighted, validate_metric, write_dataset,
                            write_metric, write_weighted)

coords = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def point_sets(max_n=12, max_d=3):
    return st.integers(1, max_d).flatmap(
        lambda d: arrays(np.float64, st.tuples(st.integers(1, max_n), st.just(d)), elements=coords))


def test_distance_examples():
    assert distance((0, 0), (3, 4), 2) == 25.0
    assert distance((0, 0), (3, 4), 1) == 5.0
    assert distance((1.5, -2.0), (1.5, -2.0), 2) == 0.0


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        distance((0, 0), (1, 2, 3))


def test_cost_kind_coerce():
    assert CostKind.coerce("means") == CostKind.MEANS == 2
    assert CostKind.coerce("median") == CostKind.MEDIAN == 1
    assert CostKind.coerce(1) == CostKind.MEDIAN
    with pytest.raises(ValueError):
        CostKind.coerce(3)
    with pytest.raises(ValueError):
        CostKind.coerce("manhattan")


@given(st.lists(coords, min_size=3, max_size=3), st.lists(coords, min_size=3, max_size=3))
def test_distance_symmetric_and_squared(a, b):
    assert distance(a, b, 2) == distance(b, a, 2)
    d1 = distance(a, b, 1)
    d2 = distance(a, b, 2)
    assert (d1 == 0) == (a == b)
    if d2 > 1e-290:  # below that the square is not representable
        assert abs(d1 * d1 - d2) <= 1e-12 * d2


def test_validate_metric_examples():
    assert validate_metric(np.array([[0, 1], [1, 0]])) is None
    v = validate_metric(np.array([[0, 1], [2, 0]]))
    assert v.kind == "asymmetry" and v.indices == (0, 1)
    v = validate_metric(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]]))
    assert v.kind == "triangle"
    i, j, k = v.indices
    assert {i, k} == {0, 2} and j == 1


def test_validate_metric_distinguishes_failures():
    assert validate_metric(np.array([[0, -1], [-1, 0]])).kind == "negative"
    assert validate_metric(np.array([[1, 1], [1, 0]])).kind == "diagonal"
    assert validate_metric(np.zeros((2, 3))).kind == "shape"


@given(point_sets())
def test_euclidean_matrices_are_metrics(X):
    assert validate_metric(FiniteMetric.from_points(X)) is None


def test_weighted_set_validation():
    with pytest.raises(ValueError):
        WeightedSet(np.zeros((2, 1)), [1.0])
    with pytest.raises(ValueError):
        WeightedSet(np.zeros((1, 1)), [-1.0])
    S = WeightedSet([[1.0], [2.0]], [2, 0])
    assert S.total_weight == 2 and S.dim == 1
    assert S.expand().ravel().tolist() == [1.0, 1.0]


def test_dataset_rejects_bad_input(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("# dim=3\n1,2\n3,4\n")
    with pytest.raises(ValueError):
        read_dataset(p)
    p.write_text("1,2\n3\n")
    with pytest.raises(ValueError):
        read_dataset(p)


@given(point_sets(max_n=6))
def test_csv_round_trip(X):
    text = format_dataset(X)
    assert text.startswith(f"# dim={X.shape[1]}\n")
    import tempfile, os
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "x.csv")
        write_dataset(path, X)
        assert np.array_equal(read_dataset(path), X)


def test_weighted_and_metric_round_trip(tmp_path):
    S = WeightedSet([[0.1, 0.2], [3.0, -4.0]], [3.0, 0.0])
    write_weighted(tmp_path / "w.csv", S)
    T = read_weighted(tmp_path / "w.csv")
    assert np.array_equal(T.points, S.points) and np.array_equal(T.weights, S.weights)
    m = FiniteMetric.from_points([[0.0], [1.0], [3.0]])
    write_metric(tmp_path / "m.csv", m)
    assert np.array_equal(read_metric(tmp_path / "m.csv").dist, m.dist)
    assert math.isclose(m.dist[0, 2], 3.0)
