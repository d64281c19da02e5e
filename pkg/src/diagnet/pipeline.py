"""End-to-end runs: normalize, augment, build the graph, train, evaluate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from diagnet import augment, datakit, signedgraph, trainer
from diagnet.augment import AugmentConfig, ExpandedDataset
from diagnet.datakit import AffineMap, LabeledDataset
from diagnet.dfo import DfoConfig
from diagnet.model import MlpSpec, Params
from diagnet.objective import LossConfig
from diagnet.signedgraph import GraphConfig, SignedGraph
from diagnet.trainer import TrainConfig, TrainReport


@dataclass
class RunResult:
    params: Params
    report: TrainReport
    expanded: ExpandedDataset
    graph: SignedGraph | None
    normalizer: AffineMap | None
    accuracy: float | None = None
    auc: float | None = None


def map_expanded(exp: ExpandedDataset, fn) -> ExpandedDataset:
    """Apply a row-wise feature transform to every node of ``exp``."""
    classes = []
    for ec in exp.classes:
        pos = [fn(p[None, :])[0] for p in ec.positives]
        neg = [fn(q[None, :])[0] for q in ec.negatives]
        classes.append(augment.ExpandedClass(ec.label, fn(ec.originals), pos, neg, radii=ec.radii))
    return ExpandedDataset(classes, exp.class_count, exp.feature_names)


def normalize_expanded(exp: ExpandedDataset, normalize: bool = True):
    """Z-score with statistics of the original samples only."""
    if not normalize:
        return exp, None
    originals = np.vstack([ec.originals for ec in exp.classes])
    amap = datakit.fit_normalizer(originals)
    return map_expanded(exp, amap.apply), amap


def expand(train: LabeledDataset, aug_cfg: AugmentConfig | None, dfo_cfg: DfoConfig = DfoConfig(),
           normalize: bool = True) -> tuple[ExpandedDataset, AffineMap | None]:
    """Augment ``train`` in normalized space; the result is in normalized units."""
    amap = None
    ds = train
    if normalize:
        ds, amap = datakit.normalize_features(train)
    if aug_cfg is None:
        return ExpandedDataset.from_dataset(ds), amap
    return augment.expand_dataset(ds, aug_cfg, dfo_cfg), amap


def train_on(expanded: ExpandedDataset, graph_cfg: GraphConfig | None, loss_cfg: LossConfig,
             spec: MlpSpec, train_cfg: TrainConfig, test: LabeledDataset | None = None):
    graph = signedgraph.build(expanded, graph_cfg) if graph_cfg is not None else None
    params, report = trainer.fit(expanded, graph, spec, loss_cfg, train_cfg, test=test)
    return params, report, graph


def run(train: LabeledDataset, test: LabeledDataset | None, aug_cfg: AugmentConfig | None,
        graph_cfg: GraphConfig | None, loss_cfg: LossConfig, train_cfg: TrainConfig,
        hidden_dims=(64, 32), normalize: bool = True, dfo_cfg: DfoConfig = DfoConfig(),
        **spec_kwargs) -> RunResult:
    """Full pipeline on raw-unit ``train``; ``test`` is mapped with the training normalizer."""
    expanded, amap = expand(train, aug_cfg, dfo_cfg, normalize)
    test_n = test.with_features(amap.apply(test.X)) if (test is not None and amap is not None) else test
    spec = MlpSpec(train.dim, tuple(hidden_dims), train.class_count, **spec_kwargs)
    params, report, graph = train_on(expanded, graph_cfg, loss_cfg, spec, train_cfg, test_n)
    result = RunResult(params, report, expanded, graph, amap)
    if test_n is not None:
        result.accuracy, result.auc = trainer.evaluate(params, test_n)
    return result
