"""Minibatch training of the classifier on cross-entropy plus the signed graph term."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from diagnet import metrics, model, objective
from diagnet.augment import ExpandedDataset
from diagnet.datakit import LabeledDataset
from diagnet.model import MlpSpec, Params
from diagnet.objective import LossBreakdown, LossConfig

# independent RNG streams derived from the training seed
_SHUFFLE, _EDGES, _DROPOUT, _INIT = 0, 1, 2, 3


class TrainingDiverged(RuntimeError):
    def __init__(self, step: int, value: float):
        super().__init__(f"loss became non-finite ({value}) at step {step}")
        self.step = step


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    batch_nodes: int = 64
    batch_edges: int = 64
    full_batch: bool = False
    learning_rate: float = 1e-2
    optimizer: str = "momentum"
    momentum: float = 0.9
    rng_seed: int = 0
    eval_every: int = 10

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1 or self.batch_nodes < 1 or self.batch_edges < 1 or self.eval_every < 1:
            raise ValueError("epochs, batch sizes and eval_every must be >= 1")
        if self.optimizer not in ("sgd", "momentum"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class TrainReport:
    losses: list = field(default_factory=list)
    evals: list = field(default_factory=list)
    wall_clock: float = 0.0

    def final(self) -> dict:
        out = dataclasses.asdict(self.losses[-1]) if self.losses else {}
        if self.evals:
            out.update({k: v for k, v in self.evals[-1].items() if k != "epoch"})
        return out

    def rows(self) -> list[dict]:
        by_epoch = {e["epoch"]: e for e in self.evals}
        rows = []
        for epoch, lb in enumerate(self.losses, start=1):
            ev = by_epoch.get(epoch, {})
            rows.append({"epoch": epoch, "j_l": lb.j_l, "j_g": lb.j_g, "j_total": lb.j_total,
                         "train_accuracy": ev.get("train_accuracy"),
                         "test_accuracy": ev.get("test_accuracy"),
                         "test_auc": ev.get("test_auc")})
        return rows

    def write_csv(self, path):
        cols = ["epoch", "j_l", "j_g", "j_total", "train_accuracy", "test_accuracy", "test_auc"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in self.rows():
                w.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                            for c in cols])


def _rng(seed: int, stream: int, *extra) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream, *extra]))


def evaluate(params: Params, ds: LabeledDataset):
    """``(accuracy, auc)`` in eval mode; ``auc`` is None unless the task is binary with both classes present."""
    if ds.n == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    probs = model.predict_proba(params, ds.X)
    acc = metrics.accuracy(probs.argmax(axis=1), ds.y)
    if probs.shape[1] != 2 or len(np.unique(ds.y)) < 2:
        return acc, None
    return acc, metrics.roc_auc(probs[:, 1], ds.y)


def full_loss(params: Params, expanded: ExpandedDataset, graph, loss_cfg: LossConfig) -> LossBreakdown:
    """Eval-mode loss over every labeled node and every edge."""
    trace = model.forward(params, expanded.X, "eval")
    edges = graph if graph is not None else (np.empty(0, np.int64),) * 3
    lb, _, _ = objective.joint_loss(trace.embedding, trace.probabilities, expanded.classes_of,
                                    edges, loss_cfg, labeled=expanded.labeled_mask)
    if graph is None:
        return LossBreakdown(lb.j_l, 0.0, lb.j_l)
    return lb


def fit(expanded: ExpandedDataset, graph, spec: MlpSpec, loss_cfg: LossConfig = LossConfig(),
        cfg: TrainConfig = TrainConfig(), test: LabeledDataset | None = None,
        instrument=None, init_params: Params | None = None):
    """Train from scratch (or ``init_params``) and return ``(params, report)``.

    Each step forwards a batch of labeled nodes for the cross-entropy and a
    batch of edges for the graph term; a node is forwarded once per step even
    when it serves both. Negative neighbors never enter the cross-entropy.
    Passing ``graph=None`` removes the graph term entirely.

    ``instrument``, if given, is called once per step with a dict holding the
    step index, the labeled batch, the edge batch, and the logit gradient.
    """
    started = time.perf_counter()
    X = expanded.X
    y = expanded.classes_of
    labeled_nodes = np.flatnonzero(expanded.labeled_mask)
    originals = expanded.provenance == "original"
    train_ds = LabeledDataset(X[originals], y[originals], expanded.class_count)
    if graph is not None and graph.node_count != len(X):
        raise ValueError(f"graph has {graph.node_count} nodes, dataset has {len(X)}")
    n_edges = graph.edge_count if graph is not None else 0
    use_graph = graph is not None and n_edges > 0

    params = init_params.copy() if init_params is not None else model.init(spec, cfg.rng_seed)
    velocity = params.zeros_like()
    shuffle_rng = _rng(cfg.rng_seed, _SHUFFLE)
    edge_rng = _rng(cfg.rng_seed, _EDGES)
    report = TrainReport()
    lam = loss_cfg.lam
    step = 0

    for epoch in range(1, cfg.epochs + 1):
        if cfg.full_batch:
            batches = [labeled_nodes]
        else:
            perm = shuffle_rng.permutation(labeled_nodes)
            batches = [perm[k:k + cfg.batch_nodes] for k in range(0, len(perm), cfg.batch_nodes)]
        for batch in batches:
            masks = model.dropout_masks(spec, len(X), _rng(cfg.rng_seed, _DROPOUT, step))
            trace = model.forward(params, X[batch], "train", masks=[m[batch] for m in masks])
            j_l, g_logits = objective.cross_entropy(trace.probabilities, y[batch])
            g_emb = None
            extra_trace = extra_grad = None
            j_g = 0.0
            edge_batch = np.empty(0, np.int64)
            if use_graph:
                if cfg.full_batch or cfg.batch_edges >= n_edges:
                    edge_batch = np.arange(n_edges)
                else:
                    edge_batch = edge_rng.choice(n_edges, size=cfg.batch_edges, replace=False)
                src, dst, phi = graph.src[edge_batch], graph.dst[edge_batch], graph.phi[edge_batch]
                ends = np.unique(np.concatenate([src, dst]))
                extra = np.setdiff1d(ends, batch)
                row_of = np.full(len(X), -1, dtype=np.int64)
                row_of[batch] = np.arange(len(batch))
                row_of[extra] = len(batch) + np.arange(len(extra))
                H = trace.embedding
                if len(extra):
                    extra_trace = model.forward(params, X[extra], "train", masks=[m[extra] for m in masks])
                    H = np.vstack([H, extra_trace.embedding])
                scale = 1.0 / len(edge_batch) if loss_cfg.normalize_graph_term else n_edges / len(edge_batch)
                j_g, g_h = objective.graph_regularizer(H, (row_of[src], row_of[dst], phi), loss_cfg, scale)
                if lam != 0.0:
                    g_emb = lam * g_h[: len(batch)]
                    extra_grad = lam * g_h[len(batch):]
            j_total = j_l + lam * j_g
            if not math.isfinite(j_total):
                raise TrainingDiverged(step, j_total)
            if instrument is not None:
                instrument({"step": step, "labeled_batch": batch, "edge_batch": edge_batch,
                            "grad_logits": g_logits, "j_l": j_l, "j_g": j_g})

            grads = model.backward(params, trace, grad_embedding=g_emb, grad_logits=g_logits,
                                   weight_decay=spec.weight_decay)
            if extra_grad is not None and extra_trace is not None:
                grads.add_(model.backward(params, extra_trace, grad_embedding=extra_grad))
            if cfg.optimizer == "momentum":
                for v, g, p in zip(velocity.arrays(), grads.arrays(), params.arrays()):
                    v *= cfg.momentum
                    v -= cfg.learning_rate * g
                    p += v
            else:
                for g, p in zip(grads.arrays(), params.arrays()):
                    p -= cfg.learning_rate * g
            step += 1

        lb = full_loss(params, expanded, graph, loss_cfg)
        if not math.isfinite(lb.j_total):
            raise TrainingDiverged(step, lb.j_total)
        report.losses.append(lb)
        if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
            row = {"epoch": epoch, "train_accuracy": evaluate(params, train_ds)[0]}
            if test is not None:
                row["test_accuracy"], row["test_auc"] = evaluate(params, test)
            report.evals.append(row)
    report.wall_clock = time.perf_counter() - started
    return params, report
