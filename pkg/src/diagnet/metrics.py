"""Accuracy and ROC-AUC."""
import numpy as np


def accuracy(predicted, actual) -> float:
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError(f"length mismatch: {predicted.shape} vs {actual.shape}")
    if predicted.size == 0:
        raise ValueError("accuracy of an empty set")
    return float((predicted == actual).mean())


def _check_binary(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    pos = labels == 1
    if not pos.any() or pos.all():
        raise ValueError("AUC needs both classes present")
    return scores, pos


def midranks(values) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their ranks."""
    values = np.asarray(values)
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    # start index of every run of equal values
    starts = np.flatnonzero(np.r_[True, sorted_vals[1:] != sorted_vals[:-1]])
    ends = np.r_[starts[1:], len(values)]
    avg = (starts + ends + 1) / 2.0
    ranks = np.empty(len(values))
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) with ties counted as 1/2.

    Computed from midranks in O(n log n).
    """
    scores, pos = _check_binary(scores, labels)
    n1 = int(pos.sum())
    n0 = len(scores) - n1
    u = midranks(scores)[pos].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def roc_auc_pairwise(scores, labels) -> float:
    """Exhaustive O(n1 * n0) comparison of every (positive, negative) pair."""
    scores, pos = _check_binary(scores, labels)
    sp, sn = scores[pos], scores[~pos]
    wins = (sp[:, None] > sn[None, :]).sum()
    ties = (sp[:, None] == sn[None, :]).sum()
    return float((wins + 0.5 * ties) / (len(sp) * len(sn)))
