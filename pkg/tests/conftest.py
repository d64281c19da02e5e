import numpy as np
import pytest

from diagnet.augment import ExpandedClass, ExpandedDataset


def make_expanded(rng, per_class=(4, 4), n_pos=1, n_neg=1, dim=2, class_count=None):
    """Random expanded dataset with ``n_pos``/``n_neg`` neighbors per class."""
    classes = []
    for c, n in enumerate(per_class):
        centre = rng.normal(size=dim) * 2.0
        orig = centre + rng.normal(size=(n, dim))
        pos = list(centre + rng.normal(size=(n_pos, dim)))
        neg = list(centre + 2.0 * rng.normal(size=(n_neg, dim)))
        classes.append(ExpandedClass(c, orig, pos, neg))
    return ExpandedDataset(classes, class_count or len(per_class))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_expanded(rng):
    return make_expanded(rng)



ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
