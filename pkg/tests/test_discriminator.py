import math

import numpy as np
import pytest

from diagnet import discriminator
from diagnet.discriminator import LinearSvm


def test_one_dimensional_symmetry():
    svm = discriminator.train([[1.0]], [[-1.0]], seed=0)
    assert svm.weights[0] > 0


def test_contradictory_point_soft_margin():
    svm = discriminator.train([[0.5, 0.5], [1, 1]], [[0.5, 0.5], [-1, -1]], seed=1)
    X = np.array([[0.5, 0.5], [1, 1], [0.5, 0.5], [-1, -1]])
    y = np.array([1, 1, -1, -1])
    assert svm.hinge_loss(X, y) > 0


def test_separable_blobs():
    rng = np.random.default_rng(0)
    P = rng.normal(size=(40, 2)) * 0.3 + [2, 2]
    N = rng.normal(size=(40, 2)) * 0.3 - [2, 2]
    svm = discriminator.train(P, N, epochs=500, seed=4)
    assert (svm.predict(P) == 1).all() and (svm.predict(N) == -1).all()


def test_training_deterministic():
    P, N = [[1.0, 0.2], [0.8, 0.1]], [[-1.0, 0.0]]
    a = discriminator.train(P, N, seed=9)
    b = discriminator.train(P, N, seed=9)
    assert a.weights.tobytes() == b.weights.tobytes() and a.bias == b.bias


def test_signed_distance():
    svm = LinearSvm(np.array([1.0, 0.0]), 0.0)
    assert discriminator.signed_distance(svm, [2.0, 5.0]) == 2.0
    assert discriminator.signed_distance(svm, [0.0, 3.0]) == 0.0
    tilted = LinearSvm(np.array([3.0, 4.0]), -5.0)
    x = np.array([3.0, 2.0])
    reflected = x - 2 * discriminator.signed_distance(tilted, x) * tilted.weights / 5.0
    assert discriminator.signed_distance(tilted, reflected) == pytest.approx(
        -discriminator.signed_distance(tilted, x))


def test_degenerate():
    with pytest.raises(discriminator.DegenerateModel):
        discriminator.signed_distance(LinearSvm(np.zeros(2), 1.0), [1.0, 1.0])


def test_probability():
    svm = LinearSvm(np.array([1.0, 0.0]), 0.0)
    assert discriminator.probability(svm, [0.0, 7.0]) == 0.5
    assert discriminator.probability(svm, [-2.0, 0.0]) == pytest.approx(1 / (1 + math.e**2), abs=1e-15)
    assert discriminator.probability(svm, [1e6, 0.0]) == 1.0
    assert 0.0 <= discriminator.probability(svm, [-1e6, 0.0]) < 1e-300


def test_batched_probability_matches_single():
    svm = LinearSvm(np.array([0.3, -1.2]), 0.4)
    X = np.random.default_rng(2).normal(size=(5, 2)) * 5
    batch = discriminator.probability(svm, X)
    assert np.array_equal(batch, [discriminator.probability(svm, x) for x in X])


def test_train_rejects_empty_side():
    with pytest.raises(ValueError):
        discriminator.train(np.empty((0, 2)), [[1.0, 0.0]])
