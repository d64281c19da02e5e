"""Classification-based derivative-free maximization over a box.

Each round keeps the best ``population`` solutions seen so far, labels the
top ``positive_count`` of them positive and the rest negative, and samples
new points either from a learned axis-aligned region (which covers every
positive and carves out negatives one random axis at a time) or from the
whole box.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SearchBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64).ravel()
        hi = np.asarray(self.upper, dtype=np.float64).ravel()
        if lo.shape != hi.shape:
            raise ValueError("box bounds differ in dimension")
        if (lo > hi).any():
            raise ValueError("box has lower > upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(((x >= self.lower) & (x <= self.upper)).all())

    @classmethod
    def around(cls, X, margin: float = 0.2) -> "SearchBox":
        """Per-feature ``[min, max]`` of ``X`` widened by ``margin * range`` on each side."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        lo, hi = X.min(axis=0), X.max(axis=0)
        pad = margin * (hi - lo)
        return cls(lo - pad, hi + pad)


@dataclass(frozen=True)
class DfoConfig:
    budget: int = 200
    population: int = 20
    positive_count: int = 2
    exploit_probability: float = 0.95
    rng_seed: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not 0 < self.positive_count < self.population <= self.budget:
            raise ValueError("need 0 < positive_count < population <= budget")
        if not 0.0 <= self.exploit_probability <= 1.0:
            raise ValueError("exploit_probability must lie in [0, 1]")


@dataclass(frozen=True)
class Candidate:
    point: np.ndarray
    value: float


def evaluate_batch(objective, points) -> list[float]:
    """Apply ``objective`` to each point, in order.

    Objectives exposing a vectorized ``batch(points)`` method are called once
    with the whole stack.
    """
    points = list(points)
    if not points:
        return []
    batch = getattr(objective, "batch", None)
    if batch is not None:
        return [float(v) for v in batch(np.vstack(points))]
    return [float(objective(p)) for p in points]


def learn_region(positives, negatives, box: SearchBox, rng) -> tuple[np.ndarray, np.ndarray]:
    """Shrink ``box`` until it holds every positive and as few negatives as possible.

    A negative is removed by choosing, at random, one axis on which it lies
    outside the positives' span and moving that bound to a random point
    strictly between the negative and the span. Negatives inside the span on
    every axis cannot be removed and are left in.
    """
    lo, hi = box.lower.copy(), box.upper.copy()
    pmin, pmax = positives.min(axis=0), positives.max(axis=0)
    pending = list(range(len(negatives)))
    while pending:
        pick = pending.pop(int(rng.integers(len(pending))))
        x = negatives[pick]
        if not ((x >= lo) & (x <= hi)).all():
            continue
        axes = np.flatnonzero((x < pmin) | (x > pmax))
        if axes.size == 0:
            continue
        d = int(axes[rng.integers(axes.size)])
        u = 1.0 - rng.random()  # (0, 1]
        if x[d] < pmin[d]:
            lo[d] = x[d] + u * (pmin[d] - x[d])
        else:
            hi[d] = x[d] - u * (x[d] - pmax[d])
    return lo, hi


def maximize(objective, box: SearchBox, cfg: DfoConfig = DfoConfig(), history: list | None = None) -> Candidate:
    """Maximize ``objective`` over ``box`` using exactly ``cfg.budget`` evaluations.

    Returns the first point attaining the largest value seen. If ``history``
    is given, every evaluated ``(point, value)`` is appended to it in order.
    """
    if box.dim == 0:
        raise ValueError("empty search box")
    rng = np.random.default_rng(cfg.rng_seed)
    best: Candidate | None = None
    pop_x = np.empty((0, box.dim))
    pop_v = np.empty(0)
    spent = 0

    def consume(xs):
        nonlocal best, spent
        vals = np.asarray(evaluate_batch(objective, xs), dtype=np.float64)
        for x, v in zip(xs, vals):
            if history is not None:
                history.append((x.copy(), float(v)))
            if best is None or v > best.value:
                best = Candidate(x.copy(), float(v))
        spent += len(xs)
        return vals

    first = rng.uniform(box.lower, box.upper, size=(cfg.population, box.dim))
    pop_x, pop_v = first, consume(first)
    while spent < cfg.budget:
        order = np.argsort(-pop_v, kind="stable")
        pop_x, pop_v = pop_x[order][: cfg.population], pop_v[order][: cfg.population]
        positives = pop_x[: cfg.positive_count]
        negatives = pop_x[cfg.positive_count:]
        m = min(cfg.population, cfg.budget - spent)
        fresh = np.empty((m, box.dim))
        for i in range(m):
            if rng.random() < cfg.exploit_probability:
                lo, hi = learn_region(positives, negatives, box, rng)
            else:
                lo, hi = box.lower, box.upper
            fresh[i] = rng.uniform(lo, hi)
        vals = consume(fresh)
        pop_x = np.vstack([pop_x, fresh])
        pop_v = np.concatenate([pop_v, vals])
    return best


def random_search(objective, box: SearchBox, budget: int, rng_seed: int = 0,
                  history: list | None = None) -> Candidate:
    """Uniform sampling baseline with the same contract as :func:`maximize`."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(rng_seed)
    xs = rng.uniform(box.lower, box.upper, size=(budget, box.dim))
    vals = evaluate_batch(objective, xs)
    if history is not None:
        history.extend((x.copy(), v) for x, v in zip(xs, vals))
    i = int(np.argmax(vals))
    return Candidate(xs[i].copy(), float(vals[i]))
