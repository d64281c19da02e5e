import math

import numpy as np
import pytest

from diagnet import augment, datakit, discriminator
from diagnet.augment import AugmentConfig, ExpandedClass, ExpandedDataset
from diagnet.dfo import DfoConfig
from diagnet.discriminator import LinearSvm

SVM = LinearSvm(np.array([1.0, 0.0]), 0.0)


def _unit(angle):
    return [math.cos(angle), math.sin(angle)]


def test_default_radii_rule():
    theta = math.acos(0.8)  # 1 - cos = 0.2
    Xc = np.array([_unit(0.0), _unit(theta), _unit(3.0)])
    r = augment.default_radii(Xc)
    assert r == pytest.approx((0.2, 0.2, 0.6), abs=1e-12)
    assert augment.default_radii(Xc[[2, 0, 1]]) == r


def test_default_radii_skip_duplicates():
    Xc = np.array([[1.0, 0.0], [1.0, 0.0], [0.9, math.sqrt(0.19)], [-1.0, 0.0]])
    assert augment.default_radii(Xc) == pytest.approx((0.1, 0.1, 0.3), abs=1e-12)


def test_positive_objective():
    cfg = AugmentConfig(gamma=1e-2, r1=0.2, r2=0.2, r3=0.6)
    x = np.array([0.5, 0.3])
    p = discriminator.probability(SVM, x)
    assert augment.positive_objective(x, SVM, np.empty((0, 2)), cfg) == p
    assert augment.positive_objective(x, SVM, x[None, :], cfg) == pytest.approx(p - 0.002, abs=1e-15)
    far = np.array([[-0.3, 0.5]])
    assert augment.positive_objective(x, SVM, far, cfg) == p


def test_negative_objective():
    cfg = AugmentConfig(gamma=1e-2, r1=0.2, r2=0.2, r3=0.3)
    Xc = np.array([[1.0, 0.0]])
    near = np.array([0.9, 0.1])
    assert augment.negative_objective(near, SVM, Xc, np.empty((0, 2)), cfg) == \
        discriminator.probability(SVM, near)
    x = np.array([0.6, 0.8])  # 1 - cos = 0.4 = r3 + 0.1
    p = discriminator.probability(SVM, x)
    assert augment.negative_objective(x, SVM, Xc, np.empty((0, 2)), cfg) == pytest.approx(p + 0.001, abs=1e-15)
    p_near = discriminator.probability(SVM, near)
    value = augment.negative_objective(near, SVM, Xc, near[None, :], cfg)
    assert value == pytest.approx(p_near + 0.002, abs=1e-15)


def test_objective_batch_matches_scalar():
    cfg = AugmentConfig(r1=0.2, r2=0.2, r3=0.6)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(9, 2))
    pos, neg = augment.PositiveObjective(SVM, X[:3], cfg), augment.NegativeObjective(SVM, X[:2], X[2:4], cfg)
    for obj in (pos, neg, neg.negated()):
        np.testing.assert_array_equal(obj.batch(X[4:]), [obj(x) for x in X[4:]])


def _toy_state():
    rng = np.random.default_rng(5)
    Xc = rng.normal(size=(10, 2)) * 0.2 + [2.0, 0.5]
    return ExpandedClass(0, Xc)


@pytest.mark.parametrize("region", ["seed", "class"])
def test_first_positive_is_extremum(region):
    state, records = _toy_state(), []
    cfg = AugmentConfig(search_region=region)
    point = augment.generate_neighbor("positive", 0, state, cfg, DfoConfig(), records)
    rec = records[0]
    assert len(rec.evaluated) == cfg.budget_T
    assert rec.value == rec.evaluated.max()
    assert state.box.contains(point)


def test_negative_record_is_minimum():
    state, records = _toy_state(), []
    augment.generate_neighbor("negative", 0, state, AugmentConfig(), DfoConfig(), records)
    assert records[0].value == records[0].evaluated.min()


def test_generate_deterministic_and_appends():
    a, b = _toy_state(), _toy_state()
    for k in range(1, 4):
        pa = augment.generate_neighbor("positive", 0, a, AugmentConfig(rng_seed=3))
        pb = augment.generate_neighbor("positive", 0, b, AugmentConfig(rng_seed=3))
        assert pa.tobytes() == pb.tobytes()
        assert len(a.positives) == k and not a.negatives


def test_bootstrap_points():
    Xc = _toy_state().originals
    pts = augment.bootstrap_points(Xc, AugmentConfig(), seed=1)
    assert pts.shape == (augment.BOOTSTRAP_COUNT, 2)
    assert np.array_equal(pts, augment.bootstrap_points(Xc, AugmentConfig(), seed=1))


@pytest.fixture(scope="module")
def forty():
    return datakit.generate_two_annuli(40, noise_sd=0.05, seed=2)


@pytest.fixture(scope="module")
def expanded_forty(forty):
    return augment.expand_dataset(forty, AugmentConfig(rng_seed=1))


def test_expand_counts(expanded_forty):
    assert expanded_forty.N == 112
    for ec in expanded_forty.classes:
        assert (len(ec.originals), len(ec.positives), len(ec.negatives)) == (40, 8, 8)
        assert all(ec.box.contains(p) for p in ec.positives + ec.negatives)
    counts = np.bincount(expanded_forty.classes_of)
    assert counts[0] == counts[1]


def test_expand_zero_fractions(forty):
    exp = augment.expand_dataset(forty, AugmentConfig(positive_fraction=0, negative_fraction=0))
    assert exp.N == forty.n
    lab = exp.labeled()
    order = np.argsort(forty.y, kind="stable")
    assert np.array_equal(lab.X, forty.X[order]) and np.array_equal(lab.y, forty.y[order])


def test_labeled_mask_drops_negatives(expanded_forty):
    mask = expanded_forty.labeled_mask
    assert mask.sum() == 2 * (40 + 8)
    assert set(expanded_forty.provenance[~mask]) == {"negative"}


def test_expanded_csv_roundtrip(tmp_path, expanded_forty):
    path = tmp_path / "exp.csv"
    augment.write_expanded_csv(expanded_forty, path)
    back = augment.read_expanded_csv(path)
    assert back.X.tobytes() == expanded_forty.X.tobytes()
    assert list(back.provenance) == list(expanded_forty.provenance)
    header = path.read_text().splitlines()[0]
    assert header.endswith("label,provenance")


def test_expand_deterministic(forty):
    cfg = AugmentConfig(rng_seed=4, negative_fraction=0.1, positive_fraction=0.1)
    a = augment.expand_dataset(forty, cfg)
    b = augment.expand_dataset(forty, cfg)
    assert a.X.tobytes() == b.X.tobytes()


def test_config_validation():
    with pytest.raises(ValueError):
        AugmentConfig(r2=0.5, r3=0.2)
    with pytest.raises(ValueError):
        AugmentConfig(search_region="everywhere")
    with pytest.raises(Exception):
        augment.expand_dataset(datakit.LabeledDataset(np.eye(3), np.array([0, 1, 1]), 2), AugmentConfig())


def test_from_dataset_keeps_all_rows(forty):
    exp = ExpandedDataset.from_dataset(forty)
    assert exp.N == forty.n and exp.labeled_mask.all()
