import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from diagnet import geometry
from diagnet.geometry import DistanceKind

EUC = DistanceKind.EUCLIDEAN


@pytest.mark.parametrize("a,b,d", [([1, 0], [1, 0], 0.0), ([1, 0], [0, 1], 1.0), ([1, 0], [-1, 0], 2.0)])
def test_cosine_reference_values(a, b, d):
    assert geometry.angular_cosine_distance(a, b) == pytest.approx(d, abs=1e-15)


def test_zero_vector_is_distance_one():
    assert geometry.angular_cosine_distance([0, 0], [1, 2]) == 1.0
    D = geometry.pairwise(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([[1.0, 0.0]]))
    np.testing.assert_array_equal(D.ravel(), [1.0, 0.0])


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        geometry.angular_cosine_distance([1, 0], [1, 0, 0])


def test_min_distance_to_set():
    S = np.array([[0.0, 1.0], [1.0, 1.0]])
    assert geometry.min_distance_to_set([1.0, 0.0], S) == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-12)
    assert geometry.min_distance_to_set(S[1], S) == pytest.approx(0.0, abs=1e-15)
    assert geometry.min_distance_to_set([1.0, 0.0], np.empty((0, 2))) == math.inf


def test_dataset_min_pairwise():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    rho = geometry.dataset_min_pairwise(X)
    assert rho == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-12)
    assert geometry.dataset_min_pairwise(X[[2, 0, 1]]) == rho
    assert geometry.dataset_min_pairwise(np.vstack([X, X[:1]])) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        geometry.dataset_min_pairwise(X[:1])


def test_knn_colinear():
    pool = np.array([[0.0], [1.0], [3.0]])
    assert geometry.knn(0, pool, 1, EUC) == [1]
    assert sorted(geometry.knn(0, pool, 3, EUC, exclude_self=False)) == [0, 1, 2]
    with pytest.raises(ValueError):
        geometry.knn(0, pool, 3, EUC)


def test_knn_ties_by_index():
    pool = np.array([[0.0], [1.0], [-1.0], [1.0]])
    assert geometry.knn(0, pool, 3, EUC) == [1, 2, 3]


@pytest.mark.parametrize("kind", list(DistanceKind))
def test_knn_matches_sort_oracle(kind):
    rng = np.random.default_rng(3)
    pool = rng.normal(size=(50, 4))
    for q in range(0, 50, 7):
        scalar = [(geometry.distance(pool[q], pool[j], kind), j) for j in range(50) if j != q]
        oracle = [j for _, j in sorted(scalar)[:5]]
        assert geometry.knn(q, pool, 5, kind) == oracle


finite = st.floats(-1e3, 1e3, allow_nan=False).filter(lambda v: abs(v) > 1e-3)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 3, elements=finite), arrays(np.float64, 3, elements=finite),
       st.floats(1e-3, 1e3))
def test_cosine_properties(a, b, scale):
    d = geometry.angular_cosine_distance(a, b)
    assert 0.0 <= d <= 2.0
    assert d == pytest.approx(geometry.angular_cosine_distance(b, a), abs=1e-12)
    assert d == pytest.approx(geometry.angular_cosine_distance(scale * a, b), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (6, 3), elements=finite), arrays(np.float64, (4, 3), elements=finite))
def test_pairwise_matches_scalar(A, B):
    for kind in DistanceKind:
        D = geometry.pairwise(A, B, kind)
        ref = np.array([[geometry.distance(a, b, kind) for b in B] for a in A])
        np.testing.assert_allclose(D, ref, atol=1e-9, rtol=1e-9)
