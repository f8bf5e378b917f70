import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adcg.bench.metrics import match_sources, matcomp_rmse, sysid_score
from adcg.measure import AtomicMeasure


def test_match_identical_positions():
    pts = [(0.0, 0.0, 1.0), (100.0, 50.0, 2.0)]
    assert match_sources(pts, pts, 1.0) == (1.0, 1.0, 1.0)
    assert match_sources(pts, pts, 500.0) == (1.0, 1.0, 1.0)


def test_match_empty_estimates():
    truth = [(0.0, 0.0, 1.0)]
    assert match_sources([], truth, 10.0) == (0.0, 0.0, 0.0)
    assert match_sources(truth, [], 10.0) == (0.0, 0.0, 0.0)


def test_match_partial_recall():
    truth = [(0.0, 0.0, 1.0), (100.0, 0.0, 1.0)]
    est = [(10.0, 0.0, 1.0)]
    p, r, f1 = match_sources(est, truth, 20.0)
    assert (p, r) == (1.0, 0.5)
    assert f1 == pytest.approx(2.0 / 3.0)


def test_match_prefers_max_cardinality():
    # one estimate sits between two truths; a second estimate only reaches
    # the first truth. Max-cardinality matching pairs est0-truth1 and
    # est1-truth0 even though est0-truth0 alone would be shorter.
    truth = [(0.0, 0.0, 1.0), (10.0, 0.0, 1.0)]
    est = [(4.0, 0.0, 1.0), (-3.0, 0.0, 1.0)]
    p, r, f1 = match_sources(est, truth, 7.0)
    assert (p, r, f1) == (1.0, 1.0, 1.0)


def test_match_swap_swaps_precision_recall():
    rng = np.random.default_rng(0)
    est = [(x, y, 1.0) for x, y in rng.uniform(0, 100, (5, 2))]
    truth = [(x, y, 1.0) for x, y in rng.uniform(0, 100, (8, 2))]
    p1, r1, f1a = match_sources(est, truth, 25.0)
    p2, r2, f1b = match_sources(truth, est, 25.0)
    assert p1 == pytest.approx(r2)
    assert r1 == pytest.approx(p2)
    assert f1a == pytest.approx(f1b)


def test_match_f1_nondecreasing_in_radius():
    rng = np.random.default_rng(1)
    est = [(x, y, 1.0) for x, y in rng.uniform(0, 100, (6, 2))]
    truth = [(x, y, 1.0) for x, y in rng.uniform(0, 100, (6, 2))]
    f1s = [match_sources(est, truth, r)[2] for r in (5.0, 20.0, 50.0, 200.0)]
    assert all(b >= a - 1e-12 for a, b in zip(f1s, f1s[1:]))
    assert all(0.0 <= f <= 1.0 for f in f1s)


def test_match_rejects_bad_radius():
    with pytest.raises(ValueError):
        match_sources([(0, 0, 1)], [(0, 0, 1)], 0.0)


def test_sysid_score_perfect_and_mean():
    rng = np.random.default_rng(2)
    y = rng.normal(size=40)
    assert sysid_score(y, y) == pytest.approx(100.0)
    assert sysid_score(np.full(40, y.mean()), y) == pytest.approx(0.0)


def test_sysid_score_constant_offset_formula():
    rng = np.random.default_rng(3)
    y = rng.normal(size=50)
    delta = 1e-3
    got = sysid_score(y + delta, y)
    expected = 100.0 * (1.0 - delta * np.sqrt(50) / np.linalg.norm(y.mean() - y))
    assert got == pytest.approx(expected, rel=1e-9)
    assert got <= 100.0


def test_sysid_score_constant_test_rejected():
    with pytest.raises(ValueError):
        sysid_score(np.ones(5), np.ones(5))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=30))
def test_sysid_score_at_most_100(y):
    y = np.asarray(y)
    if np.linalg.norm(y.mean() - y) == 0:
        return
    rng = np.random.default_rng(0)
    pred = y + rng.normal(size=y.size)
    assert sysid_score(pred, y) <= 100.0
    assert sysid_score(y, y) == pytest.approx(100.0)


def test_rmse_empty_measure_predicts_train_mean():
    mu = AtomicMeasure.empty(5)
    test = [(0, 0, 4.0), (1, 1, 2.0)]
    got = matcomp_rmse(mu, test, 3.0, n_rows=3)
    assert got == pytest.approx(np.sqrt(((4 - 3) ** 2 + (2 - 3) ** 2) / 2))


def test_rmse_exact_measure_is_zero():
    # single atom reproducing the centered ratings exactly
    u = np.array([1.0, 0.0])
    v = np.array([0.0, 1.0])
    mu = AtomicMeasure([0.5], [np.concatenate([u, v])])
    test = [(0, 1, 3.5), (1, 0, 3.0)]
    assert matcomp_rmse(mu, test, 3.0, n_rows=2) == pytest.approx(0.0)


def test_rmse_clamps_predictions():
    u = np.array([1.0])
    v = np.array([1.0])
    mu = AtomicMeasure([3.2], [np.concatenate([u, v])])  # raw prediction 6.2
    test = [(0, 0, 5.0)]
    assert matcomp_rmse(mu, test, 3.0, n_rows=1) == pytest.approx(0.0)
    test2 = [(0, 0, 4.0)]
    assert matcomp_rmse(mu, test2, 3.0, n_rows=1) == pytest.approx(1.0)
