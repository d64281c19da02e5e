"""Distances and exact k-nearest-neighbor queries."""
from __future__ import annotations

import enum
import logging
import math

import numpy as np

from diagnet import _core

log = logging.getLogger(__name__)

ZERO_NORM = 1e-12
_zero_norm_logged = False


class DistanceKind(str, enum.Enum):
    ANGULAR_COSINE = "angular_cosine"
    EUCLIDEAN = "euclidean"


def _note_zero_norm():
    global _zero_norm_logged
    if not _zero_norm_logged:
        log.warning("zero-norm vector in angular cosine distance; distance defined as 1")
        _zero_norm_logged = True


def angular_cosine_distance(a, b) -> float:
    """``1 - cos(a, b)`` clamped to [0, 2]; 1 if either vector is (near) zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    sa = float(np.dot(a, a))
    sb = float(np.dot(b, b))
    if sa < ZERO_NORM**2 or sb < ZERO_NORM**2:
        _note_zero_norm()
        return 1.0
    return min(2.0, max(0.0, 1.0 - float(np.dot(a, b)) / math.sqrt(sa * sb)))


def euclidean_distance(a, b) -> float:
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return math.sqrt(float(np.dot(diff, diff)))


def distance(a, b, kind=DistanceKind.ANGULAR_COSINE) -> float:
    if DistanceKind(kind) is DistanceKind.ANGULAR_COSINE:
        return angular_cosine_distance(a, b)
    return euclidean_distance(a, b)


def pairwise(A, B, kind=DistanceKind.ANGULAR_COSINE) -> np.ndarray:
    """Distance matrix between the rows of A and the rows of B."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if DistanceKind(kind) is DistanceKind.ANGULAR_COSINE:
        if (np.einsum("ij,ij->i", A, A) < ZERO_NORM**2).any() or (
            np.einsum("ij,ij->i", B, B) < ZERO_NORM**2
        ).any():
            _note_zero_norm()
        return _core.cosine_distance_matrix(A, B)
    return _core.euclidean_distance_matrix(A, B)


def min_distance_to_set(x, S, kind=DistanceKind.ANGULAR_COSINE) -> float:
    """Smallest distance from ``x`` to any member of ``S``; ``inf`` when S is empty."""
    S = np.asarray(S, dtype=np.float64)
    if S.size == 0:
        return math.inf
    return float(pairwise(np.asarray(x)[None, :], S.reshape(len(S), -1), kind).min())


def min_distances_to_set(X, S, kind=DistanceKind.ANGULAR_COSINE) -> np.ndarray:
    """Row-wise :func:`min_distance_to_set` for a batch of points."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    S = np.asarray(S, dtype=np.float64)
    if S.size == 0:
        return np.full(len(X), math.inf)
    return pairwise(X, S.reshape(len(S), -1), kind).min(axis=1)


def dataset_min_pairwise(Xc, kind=DistanceKind.ANGULAR_COSINE) -> float:
    """Minimum distance over unordered pairs of distinct positions in ``Xc``."""
    Xc = np.atleast_2d(np.asarray(Xc, dtype=np.float64))
    if len(Xc) < 2:
        raise ValueError("need at least 2 samples for a pairwise minimum")
    D = pairwise(Xc, Xc, kind)
    iu = np.triu_indices(len(Xc), k=1)
    return float(D[iu].min())


def knn(query_index, pool, k, kind=DistanceKind.ANGULAR_COSINE, exclude_self=True) -> list[int]:
    """Indices of the ``k`` pool members nearest to ``pool[query_index]``.

    Ascending by distance, ties broken by ascending index.
    """
    pool = np.atleast_2d(np.asarray(pool, dtype=np.float64))
    n = len(pool)
    available = n - 1 if exclude_self else n
    if k < 0 or k > available:
        raise ValueError(f"k={k} exceeds the {available} available pool members")
    d = pairwise(pool[query_index][None, :], pool, kind)
    allowed = np.ones((1, n), dtype=bool)
    if exclude_self:
        allowed[0, query_index] = False
    return [int(i) for i in _core.knn_select(d, allowed, k)[0]]
