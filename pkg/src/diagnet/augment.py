"""Adversarial generation of positive and negative neighbors for each class.

A positive neighbor is a point the class discriminator cannot tell apart
from the real class data, kept apart from earlier positives by a spacing
hinge. A negative neighbor is a point the discriminator does separate from
the class, kept apart from earlier negatives yet close to the class.
"""
from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from diagnet import discriminator, geometry
from diagnet.datakit import DataError, LabeledDataset, round_half_up
from diagnet.dfo import DfoConfig, SearchBox, maximize
from diagnet.geometry import DistanceKind

log = logging.getLogger(__name__)

POSITIVE, NEGATIVE = "positive", "negative"
ORIGINAL = "original"
PROVENANCE = {ORIGINAL: "original", POSITIVE: "positive_neighbor", NEGATIVE: "negative_neighbor"}
BOOTSTRAP_COUNT = 5
SEARCH_MARGIN = 0.2


@dataclass(frozen=True)
class AugmentConfig:
    gamma: float = 1e-2
    r1: float | None = None
    r2: float | None = None
    r3: float | None = None
    budget_T: int = 200
    positive_fraction: float = 0.2
    negative_fraction: float = 0.2
    seed_noise_sd: float = 0.05
    rng_seed: int = 0
    distance: DistanceKind = DistanceKind.ANGULAR_COSINE
    svm_regularization: float = discriminator.DEFAULT_REGULARIZATION
    svm_epochs: int = discriminator.DEFAULT_EPOCHS
    search_region: str = "seed"
    search_halfwidth: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "distance", DistanceKind(self.distance))
        if self.gamma < 0 or self.positive_fraction < 0 or self.negative_fraction < 0:
            raise ValueError("gamma and fractions must be >= 0")
        if self.r1 is not None and self.r1 <= 0:
            raise ValueError("r1 must be > 0")
        if self.r2 is not None and self.r3 is not None and not 0 < self.r2 < self.r3:
            raise ValueError("need 0 < r2 < r3")
        if self.budget_T < 1:
            raise ValueError("budget_T must be >= 1")
        if self.search_region not in ("seed", "class"):
            raise ValueError(f"unknown search region {self.search_region!r}")
        if self.search_halfwidth <= 0:
            raise ValueError("search_halfwidth must be > 0")

    def with_radii(self, radii) -> "AugmentConfig":
        """Fill unset radii from ``radii = (r1, r2, r3)``."""
        r1, r2, r3 = radii
        return dataclasses.replace(
            self,
            r1=self.r1 if self.r1 is not None else r1,
            r2=self.r2 if self.r2 is not None else r2,
            r3=self.r3 if self.r3 is not None else r3,
        )


@dataclass
class ExpandedClass:
    """Originals of one class plus the neighbors generated for it so far."""

    label: int
    originals: np.ndarray
    positives: list = field(default_factory=list)
    negatives: list = field(default_factory=list)
    box: SearchBox | None = None
    radii: tuple | None = None

    def __post_init__(self):
        self.originals = np.atleast_2d(np.asarray(self.originals, dtype=np.float64))
        if self.box is None:
            self.box = SearchBox.around(self.originals, SEARCH_MARGIN)

    def positive_array(self) -> np.ndarray:
        return _stack(self.positives, self.originals.shape[1])

    def negative_array(self) -> np.ndarray:
        return _stack(self.negatives, self.originals.shape[1])

    def copy(self) -> "ExpandedClass":
        return ExpandedClass(self.label, self.originals, list(self.positives),
                             list(self.negatives), self.box, self.radii)


def _stack(rows, dim) -> np.ndarray:
    return np.vstack(rows) if rows else np.empty((0, dim))


@dataclass
class ExpandedDataset:
    """Per-class expansions; nodes are ordered class by class as originals, positives, negatives."""

    classes: list
    class_count: int
    feature_names: tuple = ()

    @property
    def dim(self) -> int:
        return self.classes[0].originals.shape[1]

    @property
    def X(self) -> np.ndarray:
        parts = []
        for ec in self.classes:
            parts += [ec.originals, ec.positive_array(), ec.negative_array()]
        return np.vstack(parts)

    @property
    def classes_of(self) -> np.ndarray:
        return np.concatenate([np.full(len(ec.originals) + len(ec.positives) + len(ec.negatives), ec.label)
                               for ec in self.classes]).astype(np.int64)

    @property
    def provenance(self) -> np.ndarray:
        tags = []
        for ec in self.classes:
            tags += [ORIGINAL] * len(ec.originals) + [POSITIVE] * len(ec.positives)
            tags += [NEGATIVE] * len(ec.negatives)
        return np.array(tags)

    @property
    def N(self) -> int:
        return sum(len(ec.originals) + len(ec.positives) + len(ec.negatives) for ec in self.classes)

    @property
    def labeled_mask(self) -> np.ndarray:
        """Nodes that carry a class label in the classification loss (negatives do not)."""
        return self.provenance != NEGATIVE

    def labeled(self) -> LabeledDataset:
        m = self.labeled_mask
        return LabeledDataset(self.X[m], self.classes_of[m], self.class_count, self.feature_names)

    @classmethod
    def from_dataset(cls, ds: LabeledDataset) -> "ExpandedDataset":
        part = ds.partition()
        return cls([ExpandedClass(c, part.X_c(c)) for c in range(ds.class_count)],
                   ds.class_count, ds.feature_names)


@dataclass(frozen=True)
class GenerationRecord:
    """One accepted neighbor and every objective value its search evaluated.

    ``value`` and ``evaluated`` are in the objective's own sense: maximized for
    positives, minimized for negatives.
    """

    label: int
    polarity: str
    point: np.ndarray
    value: float
    evaluated: np.ndarray


def default_radii(Xc, kind=DistanceKind.ANGULAR_COSINE) -> tuple[float, float, float]:
    """``(rho, rho, 3 rho)`` with ``rho`` the smallest pairwise distance in ``Xc``.

    Coincident points are skipped: if the minimum is 0, the smallest nonzero
    pairwise distance is used instead.
    """
    Xc = np.atleast_2d(np.asarray(Xc, dtype=np.float64))
    if len(Xc) < 2:
        raise ValueError("radii need at least 2 samples")
    rho = geometry.dataset_min_pairwise(Xc, kind)
    if rho == 0.0:
        D = geometry.pairwise(Xc, Xc, kind)
        nz = D[np.triu_indices(len(Xc), k=1)]
        nz = nz[nz > 0.0]
        if nz.size == 0:
            raise ValueError("all samples coincide; radii undefined")
        rho = float(nz.min())
        log.info("duplicate samples in class; using smallest nonzero distance %.3g for radii", rho)
    return rho, rho, 3.0 * rho


class PositiveObjective:
    """``P(x) - gamma * max(0, r1 - min_i d(x, positive_i))``, to be maximized."""

    def __init__(self, disc, positives, cfg: AugmentConfig):
        if cfg.r1 is None:
            raise ValueError("r1 unresolved; call AugmentConfig.with_radii first")
        self.disc = disc
        self.positives = np.asarray(positives, dtype=np.float64).reshape(-1, disc.weights.size)
        self.cfg = cfg

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        p = discriminator.probability(self.disc, X)
        spacing = geometry.min_distances_to_set(X, self.positives, self.cfg.distance)
        return p - self.cfg.gamma * np.maximum(0.0, self.cfg.r1 - spacing)

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x)[None, :])[0])


class NegativeObjective:
    """``P(x) + gamma * max(0, r2 - min_j d(x, negative_j)) + gamma * max(0, min_i d(x, X_i) - r3)``.

    This is the quantity to minimize; :meth:`negated` gives the maximization form.
    """

    def __init__(self, disc, originals, negatives, cfg: AugmentConfig):
        if cfg.r2 is None or cfg.r3 is None:
            raise ValueError("r2/r3 unresolved; call AugmentConfig.with_radii first")
        self.disc = disc
        dim = disc.weights.size
        self.originals = np.asarray(originals, dtype=np.float64).reshape(-1, dim)
        self.negatives = np.asarray(negatives, dtype=np.float64).reshape(-1, dim)
        self.cfg = cfg

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        cfg = self.cfg
        p = discriminator.probability(self.disc, X)
        spread = geometry.min_distances_to_set(X, self.negatives, cfg.distance)
        reach = geometry.min_distances_to_set(X, self.originals, cfg.distance)
        return (p + cfg.gamma * np.maximum(0.0, cfg.r2 - spread)
                + cfg.gamma * np.maximum(0.0, reach - cfg.r3))

    def __call__(self, x) -> float:
        return float(self.batch(np.asarray(x)[None, :])[0])

    def negated(self):
        return _Negated(self)


class _Negated:
    def __init__(self, inner):
        self.inner = inner

    def batch(self, X):
        return -self.inner.batch(X)

    def __call__(self, x):
        return -self.inner(x)


def positive_objective(x, disc, Xc_plus, cfg: AugmentConfig) -> float:
    return PositiveObjective(disc, Xc_plus, cfg)(x)


def negative_objective(x, disc, Xc, Xc_minus, cfg: AugmentConfig) -> float:
    return NegativeObjective(disc, Xc, Xc_minus, cfg)(x)


def _seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def bootstrap_points(Xc, cfg: AugmentConfig, seed: int) -> np.ndarray:
    """Noise-corrupted copies of randomly chosen class samples.

    Stand in for an empty opposing set when the discriminator is trained.
    """
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(Xc), size=BOOTSTRAP_COUNT, replace=len(Xc) < BOOTSTRAP_COUNT)
    sd = cfg.seed_noise_sd * Xc.std(axis=0)
    return Xc[idx] + rng.normal(size=(BOOTSTRAP_COUNT, Xc.shape[1])) * sd


def search_box(state: ExpandedClass, cfg: AugmentConfig, seed: int) -> SearchBox:
    """Region searched for one neighbor.

    ``"class"``: the class box (feature ranges of the originals widened by
    20%). ``"seed"``: a box of half-width ``search_halfwidth`` per-feature
    standard deviations around one randomly chosen original, clipped to the
    class box.
    """
    if cfg.search_region == "class":
        return state.box
    Xc = state.originals
    centre = Xc[np.random.default_rng(seed).integers(len(Xc))]
    half = cfg.search_halfwidth * Xc.std(axis=0)
    lo = np.maximum(centre - half, state.box.lower)
    hi = np.minimum(centre + half, state.box.upper)
    return SearchBox(lo, hi)


def generate_neighbor(polarity: str, class_c: int, state: ExpandedClass, cfg: AugmentConfig,
                      dfo_cfg: DfoConfig = DfoConfig(), records: list | None = None) -> np.ndarray:
    """Generate one neighbor for ``state`` and append it to the matching set.

    The discriminator is retrained on the current sets, frozen, and the
    objective is searched with ``cfg.budget_T`` evaluations over
    :func:`search_box`.
    """
    Xc = state.originals
    if len(Xc) < 2:
        raise ValueError(f"class {class_c} needs at least 2 samples")
    if cfg.r1 is None or cfg.r2 is None or cfg.r3 is None:
        cfg = cfg.with_radii(state.radii or default_radii(Xc, cfg.distance))
    pol = 0 if polarity == POSITIVE else 1
    if polarity not in (POSITIVE, NEGATIVE):
        raise ValueError(f"unknown polarity {polarity!r}")
    current = state.positive_array() if polarity == POSITIVE else state.negative_array()
    k = len(current)
    opposing = current if k else bootstrap_points(Xc, cfg, _seed(cfg.rng_seed, class_c, pol, k, 1))
    disc = discriminator.train(Xc, opposing, cfg.svm_regularization, cfg.svm_epochs,
                               seed=_seed(cfg.rng_seed, class_c, pol, k, 2))

    search_cfg = dataclasses.replace(dfo_cfg, budget=cfg.budget_T,
                                     rng_seed=_seed(dfo_cfg.rng_seed, cfg.rng_seed, class_c, pol, k))
    history = [] if records is not None else None
    box = search_box(state, cfg, _seed(cfg.rng_seed, class_c, pol, k, 3))
    if polarity == POSITIVE:
        obj = PositiveObjective(disc, current, cfg)
        best = maximize(obj, box, search_cfg, history)
        value = best.value
        state.positives.append(best.point)
    else:
        obj = NegativeObjective(disc, Xc, current, cfg)
        best = maximize(obj.negated(), box, search_cfg, history)
        value = -best.value
        state.negatives.append(best.point)
    if records is not None:
        sign = 1.0 if polarity == POSITIVE else -1.0
        records.append(GenerationRecord(class_c, polarity, best.point.copy(), value,
                                        sign * np.array([v for _, v in history])))
    return best.point


def expand_dataset(train: LabeledDataset, cfg: AugmentConfig = AugmentConfig(),
                   dfo_cfg: DfoConfig = DfoConfig(), records: list | None = None) -> ExpandedDataset:
    """Add ``round(fraction * |X_c|)`` positive then negative neighbors to every class."""
    part = train.partition()
    classes = []
    for c in range(train.class_count):
        Xc = part.X_c(c)
        if len(Xc) < 2:
            raise DataError(f"class {c} has {len(Xc)} sample(s); augmentation needs >= 2")
        state = ExpandedClass(c, Xc)
        ccfg = cfg if None not in (cfg.r1, cfg.r2, cfg.r3) else cfg.with_radii(default_radii(Xc, cfg.distance))
        state.radii = (ccfg.r1, ccfg.r2, ccfg.r3)
        for _ in range(round_half_up(cfg.positive_fraction * len(Xc))):
            generate_neighbor(POSITIVE, c, state, ccfg, dfo_cfg, records)
        for _ in range(round_half_up(cfg.negative_fraction * len(Xc))):
            generate_neighbor(NEGATIVE, c, state, ccfg, dfo_cfg, records)
        classes.append(state)
    return ExpandedDataset(classes, train.class_count, train.feature_names)


def write_expanded_csv(exp: ExpandedDataset, path, label_column: str = "label"):
    """CSV of all nodes with a trailing ``provenance`` column."""
    X, y, prov = exp.X, exp.classes_of, exp.provenance
    names = exp.feature_names or tuple(f"f{i}" for i in range(X.shape[1]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + [label_column, "provenance"])
        for i in range(len(X)):
            w.writerow([repr(float(v)) for v in X[i]] + [int(y[i]), PROVENANCE[prov[i]]])


def read_expanded_csv(path, label_column: str = "label") -> ExpandedDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DataError(f"no data rows in {path}")
    header = rows[0]
    if "provenance" not in header or label_column not in header:
        raise DataError(f"{path}: expected {label_column!r} and 'provenance' columns")
    li, pi = header.index(label_column), header.index("provenance")
    fcols = [i for i in range(len(header)) if i not in (li, pi)]
    inverse = {v: k for k, v in PROVENANCE.items()}
    per_class: dict[int, dict[str, list]] = {}
    for r, row in enumerate(rows[1:], start=1):
        try:
            x = np.array([float(row[i]) for i in fcols])
            c = int(row[li])
            tag = inverse[row[pi]]
        except (ValueError, KeyError, IndexError):
            raise DataError(f"{path}: malformed row {r}") from None
        per_class.setdefault(c, {ORIGINAL: [], POSITIVE: [], NEGATIVE: []})[tag].append(x)
    C = max(per_class) + 1
    classes = []
    for c in range(C):
        parts = per_class.get(c)
        if not parts or not parts[ORIGINAL]:
            raise DataError(f"{path}: class {c} has no original samples")
        classes.append(ExpandedClass(c, np.vstack(parts[ORIGINAL]), parts[POSITIVE], parts[NEGATIVE]))
    return ExpandedDataset(classes, C, tuple(header[i] for i in fcols))
