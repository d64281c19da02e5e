"""Signed kNN graph over an expanded dataset.

Every node ``i`` of class ``c`` gets ``n_plus`` edges with sign +1 to its
nearest nodes among class ``c`` originals and positive neighbors, and
``n_minus`` edges with sign -1 to its nearest nodes among all other-class
nodes and class ``c`` negative neighbors. Edges are directed.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from diagnet import _core, geometry
from diagnet.augment import NEGATIVE, PROVENANCE, ExpandedDataset
from diagnet.geometry import DistanceKind

log = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphConfig:
    n_plus: int = 1
    n_minus: int = 4
    distance: DistanceKind = DistanceKind.ANGULAR_COSINE

    def __post_init__(self):
        object.__setattr__(self, "distance", DistanceKind(self.distance))
        if self.n_plus < 0 or self.n_minus < 0:
            raise ValueError("n_plus and n_minus must be >= 0")


@dataclass(frozen=True)
class SignedGraph:
    node_count: int
    src: np.ndarray
    dst: np.ndarray
    phi: np.ndarray
    node_class: np.ndarray
    node_provenance: np.ndarray
    n_plus: int = 0
    n_minus: int = 0

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        return [(int(i), int(j), int(p)) for i, j, p in zip(self.src, self.dst, self.phi)]

    @property
    def edge_count(self) -> int:
        return len(self.src)

    def subset(self, idx) -> "SignedGraph":
        idx = np.asarray(idx, dtype=np.int64)
        return SignedGraph(self.node_count, self.src[idx], self.dst[idx], self.phi[idx],
                           self.node_class, self.node_provenance, self.n_plus, self.n_minus)


def pool_masks(node_class, node_provenance) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (N, N) masks of admissible +1 and -1 targets per source row."""
    same = node_class[:, None] == node_class[None, :]
    neg_target = (node_provenance == NEGATIVE)[None, :]
    not_self = ~np.eye(len(node_class), dtype=bool)
    positive = same & ~neg_target & not_self
    negative = (~same | neg_target) & not_self
    return positive, negative


def build(expanded: ExpandedDataset, cfg: GraphConfig = GraphConfig()) -> SignedGraph:
    X = expanded.X
    cls = expanded.classes_of
    prov = expanded.provenance
    N = len(X)
    if N < 2:
        raise GraphError("graph needs at least 2 nodes")
    pos_ok, neg_ok = pool_masks(cls, prov)
    if cfg.n_minus > 0 and not neg_ok.any(axis=1).all():
        bad = int(np.flatnonzero(~neg_ok.any(axis=1))[0])
        raise GraphError(f"node {bad} has an empty negative pool (single class without negative neighbors)")
    short = (pos_ok.sum(axis=1) < cfg.n_plus) | (neg_ok.sum(axis=1) < cfg.n_minus)
    if short.any():
        log.info("%d node(s) have fewer pool members than requested neighbors", int(short.sum()))

    D = geometry.pairwise(X, X, cfg.distance)
    plus = _core.knn_select(D, pos_ok, cfg.n_plus)
    minus = _core.knn_select(D, neg_ok, cfg.n_minus)
    src, dst, phi = [], [], []
    for i in range(N):
        for j in plus[i]:
            if j >= 0:
                src.append(i), dst.append(j), phi.append(1)
        for j in minus[i]:
            if j >= 0:
                src.append(i), dst.append(j), phi.append(-1)
    return SignedGraph(N, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                       np.array(phi, dtype=np.int64), cls, prov, cfg.n_plus, cfg.n_minus)


def edge_partition(g: SignedGraph):
    """Split the edges into (+1 edges, -1 edges), each in original order."""
    edges = g.edges
    return [e for e in edges if e[2] > 0], [e for e in edges if e[2] < 0]


def validate(g: SignedGraph, expanded: ExpandedDataset) -> list[str]:
    """Invariant violations as human-readable strings; empty when the graph is sound."""
    problems = []
    cls, prov = expanded.classes_of, expanded.provenance
    if g.node_count != len(cls):
        return [f"graph has {g.node_count} nodes but dataset has {len(cls)}"]
    pos_ok, neg_ok = pool_masks(cls, prov)
    seen = set()
    out_plus = np.zeros(g.node_count, dtype=int)
    out_minus = np.zeros(g.node_count, dtype=int)
    for i, j, p in g.edges:
        if i == j:
            problems.append(f"self-edge at node {i}")
            continue
        if (i, j) in seen:
            problems.append(f"duplicate edge ({i}, {j})")
        seen.add((i, j))
        if p > 0:
            out_plus[i] += 1
            if not pos_ok[i, j]:
                problems.append(f"+1 edge ({i}, {j}) leaves the same-class positive pool")
        elif p < 0:
            out_minus[i] += 1
            if not neg_ok[i, j]:
                problems.append(f"-1 edge ({i}, {j}) targets a node outside the negative pool")
        else:
            problems.append(f"edge ({i}, {j}) has sign 0")
    want_plus = np.minimum(g.n_plus, pos_ok.sum(axis=1))
    want_minus = np.minimum(g.n_minus, neg_ok.sum(axis=1))
    for i in np.flatnonzero((out_plus != want_plus) | (out_minus != want_minus)):
        problems.append(f"node {i} has out-degree (+{out_plus[i]}, -{out_minus[i]}), "
                        f"expected (+{want_plus[i]}, -{want_minus[i]})")
    return problems


def write_edge_list(g: SignedGraph, path, meta_path=None):
    """``i j phi`` per line; optional ``index,class,provenance`` sidecar CSV."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, j, p in g.edges:
            fh.write(f"{i} {j} {p}\n")
    if meta_path is not None:
        with open(meta_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "class", "provenance"])
            for i in range(g.node_count):
                w.writerow([i, int(g.node_class[i]), PROVENANCE[g.node_provenance[i]]])


def read_edge_list(path, meta_path) -> SignedGraph:
    inverse = {v: k for k, v in PROVENANCE.items()}
    with open(meta_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    cls = np.array([int(r["class"]) for r in rows], dtype=np.int64)
    prov = np.array([inverse[r["provenance"]] for r in rows])
    triples = np.loadtxt(path, dtype=np.int64, ndmin=2) if _nonempty(path) else np.empty((0, 3), np.int64)
    src, dst, phi = triples[:, 0], triples[:, 1], triples[:, 2]
    n_plus = int(np.bincount(src[phi > 0], minlength=len(cls)).max(initial=0))
    n_minus = int(np.bincount(src[phi < 0], minlength=len(cls)).max(initial=0))
    return SignedGraph(len(cls), src, dst, phi, cls, prov, n_plus, n_minus)


def _nonempty(path) -> bool:
    with open(path, encoding="utf-8") as fh:
        return bool(fh.read(1))
