"""Evaluation metrics for regression (MSE, concordance index, Pearson) and
classification (AUROC, average precision, F1 at 0.5)."""

from __future__ import annotations

import numpy as np


class LengthMismatch(ValueError):
    pass


class ConstantVector(ValueError):
    pass


class SingleClass(ValueError):
    pass


def _check(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise LengthMismatch(f"labels {y.shape} vs predictions {yhat.shape}")
    return y, yhat


def mse(y, yhat) -> float:
    y, yhat = _check(y, yhat)
    return float(np.mean((y - yhat) ** 2))


def concordance_index(y, yhat) -> float:
    """Fraction of comparable pairs (y_i != y_j) ordered the same way by the
    predictions; prediction ties count half."""
    y, yhat = _check(y, yhat)
    dy = y[:, None] - y[None, :]
    dp = yhat[:, None] - yhat[None, :]
    comparable = dy > 0  # each unordered pair counted once, from the larger side
    concordant = float(np.sum(comparable & (dp > 0)))
    tied = float(np.sum(comparable & (dp == 0)))
    total = float(np.sum(comparable))
    if total == 0:
        raise ConstantVector("concordance index needs at least one pair with y_i != y_j")
    return (concordant + 0.5 * tied) / total


def pearson(y, yhat) -> float:
    y, yhat = _check(y, yhat)
    sy, sp = y.std(), yhat.std()
    if sy == 0 or sp == 0:
        raise ConstantVector("pearson undefined on a zero-variance input")
    return float(((y - y.mean()) * (yhat - yhat.mean())).mean() / (sy * sp))


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks in ascending order; tied values share the average rank."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auroc(y, scores) -> float:
    """Probability that a random positive outranks a random negative, ties 0.5
    (rank-sum formulation)."""
    y, scores = _check(y, scores)
    pos = y == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUROC needs both classes present")
    ranks = _average_ranks(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def average_precision(y, scores) -> float:
    """Area under precision-recall via precision at each positive's rank.

    Score ties are broken by input position (stable descending sort), so the
    value is deterministic.
    """
    y, scores = _check(y, scores)
    if int((y == 1).sum()) == 0:
        raise SingleClass("average precision needs at least one positive")
    order = np.argsort(-scores, kind="mergesort")
    labels = y[order]
    hits = np.cumsum(labels)
    ks = np.arange(1, len(labels) + 1)
    precision_at = hits / ks
    return float(precision_at[labels == 1].mean())


def f1_score(y, probs, threshold: float = 0.5) -> float:
    y, probs = _check(y, probs)
    pred = probs >= threshold
    tp = float(np.sum(pred & (y == 1)))
    fp = float(np.sum(pred & (y != 1)))
    fn = float(np.sum(~pred & (y == 1)))
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def regression_metrics(y, yhat) -> dict[str, float]:
    out = {"mse": mse(y, yhat)}
    try:
        out["concordance_index"] = concordance_index(y, yhat)
    except ConstantVector:
        out["concordance_index"] = float("nan")
    try:
        out["pearson"] = pearson(y, yhat)
    except ConstantVector:
        out["pearson"] = float("nan")
    return out


def classification_metrics(y, probs) -> dict[str, float]:
    out = {}
    try:
        out["auroc"] = auroc(y, probs)
        out["auprc"] = average_precision(y, probs)
    except SingleClass:
        out["auroc"] = float("nan")
        out["auprc"] = float("nan")
    out["f1"] = f1_score(y, probs)
    return out
