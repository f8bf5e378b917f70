"""Evaluation metrics for the three experiment families."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

__all__ = ["match_sources", "sysid_score", "matcomp_rmse"]


def match_sources(est, truth, radius: float):
    """Precision, recall, F1 of estimated point sources against ground truth.

    Estimates and truths are sequences of (x, y, weight) triples (the third
    column is ignored for matching). Matching is one-to-one between pairs
    at distance <= radius, chosen by optimal assignment to maximize the
    number of matches and, among those, minimize the total matched
    distance. Precision is matches/len(est) (0 by convention when there
    are no estimates), recall matches/len(truth), and F1 their harmonic
    mean (0 when either is 0).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    est = np.asarray(est, dtype=float).reshape(-1, 3) if len(est) else np.zeros((0, 3))
    truth = np.asarray(truth, dtype=float).reshape(-1, 3) if len(truth) else np.zeros((0, 3))
    n, m = est.shape[0], truth.shape[0]
    if n == 0 or m == 0:
        return 0.0, 0.0, 0.0
    dist = cdist(est[:, :2], truth[:, :2])
    allowed = dist <= radius
    if not allowed.any():
        return 0.0, 0.0, 0.0
    # A forbidden-pair cost above any total allowed cost makes the minimum
    # assignment use as many allowed pairs as possible.
    big = min(n, m) * radius + 1.0
    cost = np.where(allowed, dist, big)
    ri, ci = linear_sum_assignment(cost)
    matches = int(np.count_nonzero(allowed[ri, ci]))
    precision = matches / n
    recall = matches / m
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def sysid_score(y_pred, y_test) -> float:
    """100 * (1 - ||y_pred - y_test|| / ||mean(y_test) - y_test||).

    100 means a perfect prediction; predicting the test mean scores 0. A
    constant test sequence has no scale to normalize by and is rejected.
    """
    y_pred = np.asarray(y_pred, dtype=float).reshape(-1)
    y_test = np.asarray(y_test, dtype=float).reshape(-1)
    if y_pred.size != y_test.size or y_test.size < 1:
        raise ValueError("prediction and test sequences must have equal nonzero length")
    denom = float(np.linalg.norm(np.mean(y_test) - y_test))
    if denom == 0.0:
        raise ValueError("test sequence is constant; score undefined")
    return 100.0 * (1.0 - float(np.linalg.norm(y_pred - y_test)) / denom)


def matcomp_rmse(measure, test_triples, train_mean: float,
                 n_rows: int, lo: float = 1.0, hi: float = 5.0) -> float:
    """RMSE of clamped rating predictions on test triples.

    The prediction for entry (i, j) is train_mean plus the measure's
    rank-one expansion evaluated at (i, j), clamped to [lo, hi]. The
    measure's atoms are concatenated unit-vector pairs; ``n_rows`` says
    where to split them.
    """
    triples = np.asarray(test_triples, dtype=float).reshape(-1, 3)
    if triples.shape[0] == 0:
        raise ValueError("empty test set")
    rows = triples[:, 0].astype(int)
    cols = triples[:, 1].astype(int)
    ratings = triples[:, 2]
    pred = np.full(triples.shape[0], float(train_mean))
    for w, theta in zip(measure.weights, measure.points):
        pred += w * theta[:n_rows][rows] * theta[n_rows:][cols]
    np.clip(pred, lo, hi, out=pred)
    return float(np.sqrt(np.mean((pred - ratings) ** 2)))
