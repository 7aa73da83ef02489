import itertools
import math

import numpy as np
import pytest
from scipy import stats

from fscns import (ComponentParams, MixtureParams, RareEventParams, adjusted_rand_index, auc,
                   enrichment_ratio, make_rng, posterior_positive, score_classification)
from fscns.metrics import (ConfusionCounts, bias_rmse, classify, confusion_metrics, log_loss,
                           summarize_estimates)
from fscns.sampling import draw_ns_max


def brute_ari(a, b):
    n = len(a)
    pairs = list(itertools.combinations(range(n), 2))
    same_a = np.array([a[i] == a[j] for i, j in pairs])
    same_b = np.array([b[i] == b[j] for i, j in pairs])
    index = np.sum(same_a & same_b)
    expected = same_a.sum() * same_b.sum() / len(pairs)
    top = 0.5 * (same_a.sum() + same_b.sum())
    return (index - expected) / (top - expected)


def brute_auc(scores, truth, positive=2):
    pos = [s for s, t in zip(scores, truth) if t == positive]
    neg = [s for s, t in zip(scores, truth) if t != positive]
    return sum((p > q) + 0.5 * (p == q) for p in pos for q in neg) / (len(pos) * len(neg))


# ---------------------------------------------------------------- confusion

def test_confusion_perfect():
    r = confusion_metrics(ConfusionCounts(10, 0, 90, 0))
    assert (r.sensitivity, r.specificity, r.precision, r.f1, r.balanced_accuracy) == (1, 1, 1, 1, 1)
    assert r.error_rate == 0 and not r.undefined


def test_confusion_no_predicted_positives():
    r = confusion_metrics(ConfusionCounts(0, 0, 100, 10))
    assert r.sensitivity == 0 and r.precision == 0 and r.f1 == 0
    assert "precision" in r.undefined


def test_confusion_hand_arithmetic():
    r = confusion_metrics(ConfusionCounts(8, 2, 85, 5))
    sens = 8 / 13
    assert r.sensitivity == pytest.approx(sens)
    assert r.precision == pytest.approx(0.8)
    assert r.f1 == pytest.approx(2 * 0.8 * sens / (0.8 + sens))
    assert r.specificity == pytest.approx(85 / 87)
    assert r.error_rate == pytest.approx(7 / 100)
    assert r.balanced_accuracy == (r.sensitivity + r.specificity) / 2


def test_confusion_from_labels_total():
    truth = np.array([1, 2, 2, 1, 2])
    pred = np.array([1, 2, 1, 2, 2])
    c = ConfusionCounts.from_labels(truth, pred)
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 1, 1, 1) and c.total == 5
    flipped = ConfusionCounts.from_labels(truth, pred, positive=1)
    assert (flipped.tp, flipped.fp, flipped.tn, flipped.fn) == (1, 1, 2, 1)


def test_confusion_empty_rejected():
    with pytest.raises(ValueError):
        confusion_metrics(ConfusionCounts(0, 0, 0, 0))


# ---------------------------------------------------------------- ARI

def test_ari_identical_and_relabelled():
    a = [1, 1, 2, 2, 2, 1]
    assert adjusted_rand_index(a, a) == 1.0
    assert adjusted_rand_index(a, [3 - x for x in a]) == pytest.approx(1.0)


def test_ari_single_cluster_both():
    assert adjusted_rand_index([1, 1, 1], [2, 2, 2]) == 1.0


def test_ari_brute_force_small():
    assert adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(brute_ari([1, 1, 2, 2], [1, 2, 1, 2]))


def test_ari_brute_force_random():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(5, 25))
        a = rng.integers(1, 3, n)
        b = rng.integers(1, 4, n)
        if len(set(a)) == 1 and len(set(b)) == 1:
            continue
        assert adjusted_rand_index(a, b) == pytest.approx(brute_ari(list(a), list(b)), abs=1e-12)


def test_ari_chance_level():
    rng = np.random.default_rng(1)
    truth = rng.integers(1, 3, 10_000)
    vals = [adjusted_rand_index(truth, rng.integers(1, 3, 10_000)) for _ in range(100)]
    assert abs(np.mean(vals)) < 0.02


def test_ari_invalid():
    with pytest.raises(ValueError):
        adjusted_rand_index([1], [1])
    with pytest.raises(ValueError):
        adjusted_rand_index([1, 2], [1, 2, 1])


# ---------------------------------------------------------------- AUC, log-loss

def test_auc_trivial_cases():
    assert auc([0.1, 0.2, 0.8, 0.9], [1, 1, 2, 2]) == 1.0
    assert auc([0.5] * 4, [1, 2, 1, 2]) == 0.5
    assert math.isnan(auc([0.1, 0.2], [1, 1]))


def test_auc_brute_force_with_ties():
    scores = [0.3, 0.7, 0.7, 0.2, 0.9]
    truth = [1, 2, 1, 2, 2]
    assert auc(scores, truth) == pytest.approx(brute_auc(scores, truth))
    rng = np.random.default_rng(2)
    for _ in range(20):
        s = rng.integers(0, 5, 15) / 4
        t = rng.integers(1, 3, 15)
        if len(set(t)) == 2:
            assert auc(s, t) == pytest.approx(brute_auc(s, t))


def test_auc_monotone_invariance(rare0):
    rng = np.random.default_rng(3)
    y = rng.normal(1, 2, 200)
    truth = rng.integers(1, 3, 200)
    p = np.clip(posterior_positive(y, rare0), 1e-300, 1 - 1e-16)
    base = auc(p, truth)
    assert auc(p ** 3, truth) == base
    assert auc(np.log(p), truth) == base


def test_log_loss_values():
    assert log_loss([0.9, 0.2], [2, 1]) == pytest.approx(-(math.log(0.9) + math.log(0.8)) / 2)
    assert np.isfinite(log_loss([0.0, 1.0], [2, 1]))
    assert log_loss([0.0], [2]) == pytest.approx(-math.log(1e-12))


# ---------------------------------------------------------------- posterior and classify

def test_posterior_positive_values(rare0):
    assert posterior_positive(0.3, RareEventParams(1.0, 4, 1.5)) == 1.0
    assert posterior_positive(60.0, rare0) == pytest.approx(1.0)
    num = 0.05 * stats.norm.pdf(4, 4, 1.5)
    expect = num / (0.95 * stats.norm.pdf(4) + num)
    assert posterior_positive(4.0, rare0) == pytest.approx(expect, rel=1e-12)


def test_posterior_positive_component1(psi0):
    y = 1.0
    a, b = 0.4 * stats.norm.pdf(y), 0.6 * stats.norm.pdf(y, 3.5, 1.2)
    assert posterior_positive(y, psi0, positive=1) == pytest.approx(a / (a + b), rel=1e-12)


def test_classify():
    np.testing.assert_array_equal(classify([0.4, 0.6], 0.5), [False, True])
    assert classify(np.linspace(0, 1, 101), 0.999).sum() == 1
    with pytest.raises(ValueError):
        classify([0.5], 1.0)


def test_classify_matches_density_ratio_rule(psi0):
    rng = np.random.default_rng(4)
    y = rng.uniform(-3, 7, 100)
    calls = classify(posterior_positive(y, psi0), 0.5)
    f1 = stats.norm.pdf(y)
    f2 = stats.norm.pdf(y, 3.5, 1.2)
    # positive (component 2) iff f1/f2 < (1-pi)/pi
    np.testing.assert_array_equal(calls, f1 / f2 < 0.6 / 0.4)


def test_score_classification_flags_absent_class():
    r = score_classification([1, 1, 1], [0.2, 0.7, 0.1])
    assert "auc" in r.undefined and r.auc == 0.0
    assert "sensitivity" in r.undefined


def test_score_classification_positive_flip():
    truth = np.array([1, 1, 2, 2])
    scores = np.array([0.9, 0.8, 0.1, 0.3])
    r = score_classification(truth, scores, positive=1)
    assert r.sensitivity == 1.0 and r.auc == 1.0 and r.ari == 1.0


# ---------------------------------------------------------------- bias / rmse

def test_bias_rmse_examples():
    assert bias_rmse([0.3, 0.3], 0.3) == (0.0, 0.0)
    assert bias_rmse([2.0, 0.0], 1.0) == (0.0, 1.0)
    b, r = bias_rmse([0.06, 0.04, 0.05], 0.05)
    assert b == pytest.approx(0.0, abs=1e-15)
    assert r == pytest.approx(math.sqrt(2 * 0.0001 / 3))
    with pytest.raises(ValueError):
        bias_rmse([], 1.0)


def test_summary_rmse_dominates_bias():
    s = summarize_estimates({"epsilon": [0.1, 0.2, 0.05], "delta": [4.2, 3.9, 4.4]},
                            {"epsilon": 0.05, "delta": 4.0})
    assert s.B == 3
    for name in s.bias:
        assert s.rmse[name] >= abs(s.bias[name])


# ---------------------------------------------------------------- enrichment

def test_enrichment_k1():
    assert enrichment_ratio(RareEventParams(0.05, 4, 1.5), 1) == 1.0


def test_enrichment_nondecreasing_in_k(rare0):
    vals = [enrichment_ratio(rare0, k) for k in range(1, 11)]
    assert np.all(np.diff(vals) >= 0)


def test_enrichment_upper_bound(rare0):
    # P(at least one rare unit in the set) / epsilon bounds ER from above
    for k in (2, 3, 5, 8):
        assert enrichment_ratio(rare0, k) <= (1 - 0.95 ** k) / 0.05 + 1e-12


@pytest.mark.parametrize("k", [2, 3, 5, 8])
def test_enrichment_monte_carlo(rare0, k):
    n = 1_000_000
    _, comp = draw_ns_max(rare0, k, make_rng(99, k), size=n)
    p = np.mean(comp == 2)
    er = enrichment_ratio(rare0, k)
    assert abs(p / 0.05 - er) < 3 * math.sqrt(p * (1 - p) / n) / 0.05


def test_enrichment_closed_form_equal_components():
    # identical components: every unit is equally likely to be the maximum
    params = RareEventParams(0.2, 0.0, 1.0)
    for k in (2, 4):
        assert enrichment_ratio(params, k) == pytest.approx(1.0, rel=1e-9)
