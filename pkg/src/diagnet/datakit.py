"""Datasets: CSV ingestion, synthetic annuli, z-score normalization, stratified split."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    pass


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix ``X`` (n, D) with dense integer labels ``y`` in ``0..C-1``."""

    X: np.ndarray
    y: np.ndarray
    class_count: int
    feature_names: tuple = ()
    class_names: tuple = ()

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True)
        y = np.array(self.y, dtype=np.int64, copy=True)
        if X.ndim != 2 or X.shape[1] < 1:
            raise DataError(f"features must be a 2-D array with D >= 1, got shape {X.shape}")
        if len(X) != len(y) or len(X) < 1:
            raise DataError(f"need n >= 1 samples with matching labels, got {len(X)} and {len(y)}")
        if not np.isfinite(X).all():
            raise DataError("features contain NaN or Inf")
        if y.min() < 0 or y.max() >= self.class_count:
            raise DataError(f"labels must lie in 0..{self.class_count - 1}")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if not self.feature_names:
            object.__setattr__(self, "feature_names", tuple(f"f{i}" for i in range(X.shape[1])))
        if not self.class_names:
            object.__setattr__(self, "class_names", tuple(str(c) for c in range(self.class_count)))

    @property
    def n(self) -> int:
        return len(self.X)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def partition(self) -> "ClassPartition":
        return ClassPartition.of(self)

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.X[idx], self.y[idx], self.class_count,
                              self.feature_names, self.class_names)

    def with_features(self, X) -> "LabeledDataset":
        return LabeledDataset(X, self.y, self.class_count, self.feature_names, self.class_names)


@dataclass(frozen=True)
class ClassPartition:
    indices: tuple
    dataset: LabeledDataset = field(repr=False)

    @classmethod
    def of(cls, ds: LabeledDataset) -> "ClassPartition":
        return cls(tuple(np.flatnonzero(ds.y == c) for c in range(ds.class_count)), ds)

    def X_c(self, c: int) -> np.ndarray:
        return self.dataset.X[self.indices[c]]

    def sizes(self) -> list[int]:
        return [len(i) for i in self.indices]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError("train_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class AffineMap:
    """Per-feature ``(x - mean) / scale``; features with zero scale map to 0."""

    mean: np.ndarray
    scale: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        safe = np.where(self.scale > 0, self.scale, 1.0)
        return np.where(self.scale > 0, (X - self.mean) / safe, 0.0)

    def inverse(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=np.float64) * self.scale + self.mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d) -> "AffineMap":
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["scale"], dtype=np.float64))


def _parse_float(token: str) -> float:
    return float(token.strip())


def load_csv(path, label_column: str = "label") -> LabeledDataset:
    """Read a header-first CSV; every column except ``label_column`` is a feature.

    Labels that are all non-negative integers are used as class indices;
    anything else is mapped to 0..C-1 in order of first appearance.
    """
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise DataError(f"empty file: {path}")
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise DataError(f"label column {label_column!r} not in header {header}")
    li = header.index(label_column)
    feat_cols = [i for i in range(len(header)) if i != li]
    body = [r for r in rows[1:] if r]
    if not body:
        raise DataError(f"no data rows in {path}")

    X = np.empty((len(body), len(feat_cols)))
    raw_labels = []
    for r, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise DataError(f"row {r}: expected {len(header)} fields, got {len(row)}")
        for j, col in enumerate(feat_cols):
            try:
                v = _parse_float(row[col])
            except ValueError:
                raise DataError(f"row {r}, column {header[col]}: non-numeric value {row[col]!r}") from None
            if not math.isfinite(v):
                raise DataError(f"row {r}, column {header[col]}: non-finite value {row[col]!r}")
            X[r - 1, j] = v
        raw_labels.append(row[li].strip())

    if all(s.isdigit() for s in raw_labels):
        y = np.array([int(s) for s in raw_labels])
        C = int(y.max()) + 1
        names = tuple(str(c) for c in range(C))
    else:
        mapping: dict[str, int] = {}
        for s in raw_labels:
            mapping.setdefault(s, len(mapping))
        y = np.array([mapping[s] for s in raw_labels])
        C = len(mapping)
        names = tuple(mapping)
    return LabeledDataset(X, y, C, tuple(header[i] for i in feat_cols), names)


def write_csv(ds: LabeledDataset, path, label_column: str = "label", extra_columns=None):
    """Write ``ds`` with features in shortest round-trip float repr.

    ``extra_columns`` maps a column name to one string per row (e.g. provenance).
    """
    extra_columns = extra_columns or {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.feature_names) + [label_column] + list(extra_columns))
        for i in range(ds.n):
            w.writerow([repr(float(v)) for v in ds.X[i]] + [int(ds.y[i])]
                       + [extra_columns[k][i] for k in extra_columns])


def generate_two_annuli(n_per_class: int, inner_radius: float = 1.0, outer_radius: float = 1.3,
                        thickness: float = 0.2, noise_sd: float = 0.0, seed: int = 0) -> LabeledDataset:
    """Two concentric annuli in the plane, class 0 inside, class 1 outside.

    Points are area-uniform on each annulus, then every coordinate gets
    Gaussian noise with standard deviation ``noise_sd``.
    """
    if not 0 < inner_radius < outer_radius:
        raise DataError("need 0 < inner_radius < outer_radius")
    if thickness <= 0 or noise_sd < 0 or n_per_class < 1:
        raise DataError("need thickness > 0, noise_sd >= 0, n_per_class >= 1")
    rng = np.random.default_rng(seed)
    parts = []
    for r0 in (inner_radius, outer_radius):
        r1 = r0 + thickness
        radius = np.sqrt(rng.uniform(r0 * r0, r1 * r1, n_per_class))
        angle = rng.uniform(0.0, 2.0 * np.pi, n_per_class)
        pts = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
        parts.append(pts + rng.normal(0.0, noise_sd, pts.shape) if noise_sd > 0 else pts)
    X = np.vstack(parts)
    y = np.repeat([0, 1], n_per_class)
    return LabeledDataset(X, y, 2)


def fit_normalizer(X) -> AffineMap:
    X = np.asarray(X, dtype=np.float64)
    if len(X) < 2:
        raise DataError("normalization needs n >= 2")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 0.0)
    return AffineMap(mean, scale)


def normalize_features(ds: LabeledDataset) -> tuple[LabeledDataset, AffineMap]:
    """Z-score every feature over ``ds``; constant features become 0."""
    amap = fit_normalizer(ds.X)
    return ds.with_features(amap.apply(ds.X)), amap


def split_indices(ds: LabeledDataset, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(spec.rng_seed)
    train, test = [], []
    for c, idx in enumerate(ds.partition().indices):
        if len(idx) < 2:
            raise DataError(f"class {c} has {len(idx)} member(s); stratified split needs >= 2")
        n_train = min(max(round_half_up(spec.train_fraction * len(idx)), 1), len(idx) - 1)
        perm = rng.permutation(idx)
        train.append(perm[:n_train])
        test.append(perm[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified train/test split; ``round(train_fraction * n_c)`` train rows per class."""
    tr, te = split_indices(ds, spec)
    return ds.subset(tr), ds.subset(te)
