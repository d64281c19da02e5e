"""The compiled kernels and the numpy fallback must agree."""
import numpy as np
import pytest

from diagnet import _core, _kernels_py

try:
    from diagnet import _kernels as compiled
except ImportError:  # pragma: no cover
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_backend_name():
    assert _core.BACKEND in ("cython", "python")


@needs_compiled
def test_distance_matrices_agree():
    rng = np.random.default_rng(0)
    A, B = rng.normal(size=(30, 5)), rng.normal(size=(20, 5))
    A[3] = 0.0
    for name in ("cosine_distance_matrix", "euclidean_distance_matrix"):
        np.testing.assert_allclose(getattr(compiled, name)(A, B), getattr(_kernels_py, name)(A, B),
                                   rtol=0, atol=1e-13)


@needs_compiled
def test_knn_select_agrees_with_ties():
    rng = np.random.default_rng(1)
    D = rng.integers(0, 4, size=(40, 40)).astype(float)
    allowed = rng.random((40, 40)) < 0.6
    for k in (0, 1, 3, 30):
        assert np.array_equal(compiled.knn_select(D, allowed, k), _kernels_py.knn_select(D, allowed, k))


@needs_compiled
def test_graph_loss_agrees():
    rng = np.random.default_rng(2)
    H = rng.normal(size=(25, 4))
    H[7] = 0.0
    src, dst = rng.integers(0, 25, 80), rng.integers(0, 25, 80)
    phi = rng.choice([-1.0, 1.0], 80)
    v1, g1 = compiled.signed_graph_loss(H, src, dst, phi, 1.0)
    v2, g2 = _kernels_py.signed_graph_loss(H, src, dst, phi, 1.0)
    assert v1 == pytest.approx(v2, abs=1e-12)
    np.testing.assert_allclose(g1, g2, atol=1e-12)


@needs_compiled
def test_pegasos_agrees():
    rng = np.random.default_rng(3)
    X = np.hstack([rng.normal(size=(30, 3)), np.ones((30, 1))])
    y = np.where(rng.random(30) < 0.5, 1.0, -1.0)
    order = rng.integers(0, 30, 600)
    np.testing.assert_allclose(compiled.pegasos_train(X, y, 0.01, order),
                               _kernels_py.pegasos_train(X, y, 0.01, order), rtol=1e-12, atol=1e-12)
