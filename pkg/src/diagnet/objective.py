"""Signed graph regularizer, cross-entropy, and their weighted sum."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from diagnet import _core
from diagnet.geometry import ZERO_NORM, DistanceKind

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class LossConfig:
    lam: float = 1.0
    margin_m: float = 1.0
    embedding_distance: DistanceKind = DistanceKind.ANGULAR_COSINE
    normalize_graph_term: bool = True

    def __post_init__(self):
        object.__setattr__(self, "embedding_distance", DistanceKind(self.embedding_distance))
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.margin_m <= 0:
            raise ValueError("margin must be > 0")


@dataclass(frozen=True)
class LossBreakdown:
    j_l: float
    j_g: float
    j_total: float


def _edges(graph):
    if hasattr(graph, "src"):
        return graph.src, graph.dst, graph.phi
    src, dst, phi = graph
    return np.asarray(src, np.int64), np.asarray(dst, np.int64), np.asarray(phi)


def _euclidean_signed_loss(H, src, dst, phi, margin):
    diff = H[src] - H[dst]
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    positive = phi > 0
    active = ~positive & (margin - d > 0.0)
    values = np.where(positive, d, np.where(active, margin - d, 0.0))
    coef = np.where(positive, 1.0, np.where(active, -1.0, 0.0))
    safe = np.where(d > 0, d, 1.0)
    g = np.where((d > 0)[:, None], diff / safe[:, None], 0.0) * coef[:, None]
    grad = np.zeros_like(H)
    np.add.at(grad, src, g)
    np.add.at(grad, dst, -g)
    return float(values.sum()), grad


def graph_regularizer(embeddings, graph, cfg: LossConfig = LossConfig(), scale: float | None = None):
    """Signed graph term and its gradient w.r.t. every embedding row.

    A +1 edge adds ``dist(h_i, h_j)``; a -1 edge adds ``max(0, m - dist)``,
    with zero subgradient at the kink. The edge sum is divided by the edge
    count when ``cfg.normalize_graph_term`` is set; ``scale`` overrides that
    factor (the trainer uses it for edge minibatches).
    """
    H = np.asarray(embeddings, dtype=np.float64)
    src, dst, phi = _edges(graph)
    if len(src) == 0:
        return 0.0, np.zeros_like(H)
    if cfg.embedding_distance is DistanceKind.ANGULAR_COSINE:
        norms = np.sqrt(np.einsum("ij,ij->i", H, H))
        if (norms[np.concatenate([src, dst])] < ZERO_NORM).any():
            log.debug("zero-norm embedding on a graph edge; distance 1, gradient 0")
        value, grad = _core.signed_graph_loss(H, src, dst, np.asarray(phi, np.float64), cfg.margin_m)
    else:
        value, grad = _euclidean_signed_loss(H, src, dst, phi, cfg.margin_m)
    if scale is None:
        scale = 1.0 / len(src) if cfg.normalize_graph_term else 1.0
    return value * scale, grad * scale


def cross_entropy(probabilities, labels):
    """Mean negative log-likelihood of the true class and its gradient w.r.t. the logits.

    The logit gradient is the softmax/cross-entropy composite ``(p - onehot) / n``.
    """
    P = np.atleast_2d(np.asarray(probabilities, dtype=np.float64))
    y = np.asarray(labels, dtype=np.int64)
    n = len(y)
    if n == 0:
        return 0.0, np.zeros_like(P)
    picked = P[np.arange(n), y]
    if (picked < PROB_FLOOR).any():
        log.warning("true-class probability below %g clamped", PROB_FLOOR)
    value = float(-np.log(np.maximum(picked, PROB_FLOOR)).mean())
    grad = P.copy()
    grad[np.arange(n), y] -= 1.0
    return value, grad / n


def joint_loss(embeddings, probabilities, labels, graph, cfg: LossConfig = LossConfig(),
               labeled=None, graph_scale: float | None = None):
    """Cross-entropy over the labeled rows plus ``lam`` times the graph term.

    Returns ``(LossBreakdown, grad_embeddings, grad_logits)``; gradients are
    full-size arrays aligned with the input rows. With ``lam == 0`` the graph
    term is still reported but contributes no gradient.
    """
    H = np.asarray(embeddings, dtype=np.float64)
    P = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    rows = np.arange(len(P)) if labeled is None else np.flatnonzero(np.asarray(labeled, bool))
    j_l, g_rows = cross_entropy(P[rows], labels[rows])
    grad_logits = np.zeros_like(P)
    grad_logits[rows] = g_rows
    j_g, grad_h = graph_regularizer(H, graph, cfg, graph_scale)
    if cfg.lam == 0.0:
        grad_h = np.zeros_like(H)
    else:
        grad_h = cfg.lam * grad_h
    return LossBreakdown(j_l, j_g, j_l + cfg.lam * j_g), grad_h, grad_logits
