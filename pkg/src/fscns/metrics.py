"""Classification scores, rare-class metrics, estimator summaries and NS enrichment."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import comb
from scipy.stats import rankdata

from .errors import FscError
from .mixture import (
    ComponentParams,
    MixtureParams,
    RareEventParams,
    _check_k,
    mixture_cdf,
    mixture_logpdf,
    normal_logpdf,
    normal_pdf,
)

LOG_LOSS_CLIP = 1e-12


class QuadratureError(FscError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_labels(cls, truth, pred, positive=2):
        truth = np.asarray(truth) == positive
        pred = np.asarray(pred) == positive
        return cls(int(np.sum(truth & pred)), int(np.sum(~truth & pred)),
                   int(np.sum(~truth & ~pred)), int(np.sum(truth & ~pred)))


@dataclass
class MetricsReport:
    """Per-replicate scores.  Undefined rates are stored as 0 and named in ``undefined``."""

    ari: float = 0.0
    error_rate: float = 0.0
    sensitivity: float = 0.0
    specificity: float = 0.0
    precision: float = 0.0
    f1: float = 0.0
    balanced_accuracy: float = 0.0
    auc: float = 0.0
    log_loss: float = 0.0
    undefined: frozenset = field(default_factory=frozenset)

    FIELDS = ("ari", "error_rate", "sensitivity", "specificity", "precision",
              "f1", "balanced_accuracy", "auc", "log_loss")

    def as_dict(self):
        return {name: getattr(self, name) for name in self.FIELDS}


@dataclass(frozen=True)
class EstimatorSummary:
    bias: dict
    rmse: dict
    B: int


def _ratio(num, den):
    return (num / den, False) if den > 0 else (0.0, True)


def confusion_metrics(c: ConfusionCounts) -> MetricsReport:
    """Rate metrics for the positive class; ARI/AUC/log-loss are left at 0."""
    if c.total <= 0:
        raise ValueError("confusion table is empty")
    undefined = set()
    sens, u = _ratio(c.tp, c.tp + c.fn)
    if u:
        undefined.add("sensitivity")
    spec, u = _ratio(c.tn, c.tn + c.fp)
    if u:
        undefined.add("specificity")
    prec, u = _ratio(c.tp, c.tp + c.fp)
    if u:
        undefined.add("precision")
    if prec + sens > 0:
        f1 = 2.0 * prec * sens / (prec + sens)
    else:
        f1 = 0.0
        undefined.add("f1")
    return MetricsReport(
        error_rate=(c.fp + c.fn) / c.total,
        sensitivity=sens,
        specificity=spec,
        precision=prec,
        f1=f1,
        balanced_accuracy=(sens + spec) / 2.0,
        undefined=frozenset(undefined),
    )


def adjusted_rand_index(truth, pred):
    """Hubert-Arabie adjusted Rand index from the contingency table."""
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    if truth.shape != pred.shape or truth.size < 2:
        raise ValueError("need two labelings of equal length >= 2")
    _, ti = np.unique(truth, return_inverse=True)
    _, pj = np.unique(pred, return_inverse=True)
    table = np.zeros((ti.max() + 1, pj.max() + 1), dtype=np.int64)
    np.add.at(table, (ti, pj), 1)
    index = comb(table, 2).sum()
    rows = comb(table.sum(axis=1), 2).sum()
    cols = comb(table.sum(axis=0), 2).sum()
    expected = rows * cols / comb(truth.size, 2)
    max_index = 0.5 * (rows + cols)
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def auc(scores, truth, positive=2):
    """Mann-Whitney AUC, P(score_pos > score_neg) + P(tie)/2.

    Returns ``nan`` when one class is absent.
    """
    scores = np.asarray(scores, dtype=float)
    is_pos = np.asarray(truth) == positive
    n_pos, n_neg = int(is_pos.sum()), int((~is_pos).sum())
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(scores)
    u = ranks[is_pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def log_loss(scores, truth, positive=2):
    p = np.clip(np.asarray(scores, dtype=float), LOG_LOSS_CLIP, 1.0 - LOG_LOSS_CLIP)
    y = np.asarray(truth) == positive
    return float(-np.mean(np.where(y, np.log(p), np.log1p(-p))))


def posterior_positive(y, params, positive=2):
    """Posterior probability that ``y`` came from the positive component."""
    psi = params.as_mixture() if isinstance(params, RareEventParams) else params
    with np.errstate(divide="ignore"):
        if positive == 2:
            num = np.log1p(-psi.pi) + normal_logpdf(y, psi.comp2)
        else:
            num = np.log(psi.pi) + normal_logpdf(y, psi.comp1)
    out = np.exp(num - mixture_logpdf(y, psi))
    return np.clip(out, 0.0, 1.0)


def classify(scores, threshold=0.5):
    """Boolean positive calls: ``score > threshold``."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    return np.asarray(scores, dtype=float) > threshold


def score_classification(truth, scores, threshold=0.5, positive=2) -> MetricsReport:
    """All metrics for one replicate; labels are in {1, 2}."""
    truth = np.asarray(truth)
    calls = classify(scores, threshold)
    negative = 1 if positive == 2 else 2
    pred = np.where(calls, positive, negative)
    report = confusion_metrics(ConfusionCounts.from_labels(truth, pred, positive))
    report.ari = adjusted_rand_index(truth, pred)
    report.auc = auc(scores, truth, positive)
    if np.isnan(report.auc):
        report.auc = 0.0
        report.undefined = report.undefined | {"auc"}
    report.log_loss = log_loss(scores, truth, positive)
    return report


def bias_rmse(estimates, truth):
    est = np.asarray(estimates, dtype=float)
    if est.size < 1:
        raise ValueError("need at least one estimate")
    err = est - truth
    return float(err.mean()), float(np.sqrt(np.mean(err * err)))


def summarize_estimates(estimates: dict, truth: dict) -> EstimatorSummary:
    bias, rmse = {}, {}
    B = 0
    for name, values in estimates.items():
        bias[name], rmse[name] = bias_rmse(values, truth[name])
        B = len(values)
    return EstimatorSummary(bias, rmse, B)


def enrichment_ratio(params: RareEventParams, k) -> float:
    """P(the maximum of a set of ``k`` is rare) / epsilon.

    Equals ``int k phi(y; delta, tau) F(y)^(k-1) dy`` with ``F`` the mixture cdf.
    """
    k = _check_k(k)
    if k == 1:
        return 1.0
    rare = ComponentParams(params.delta, params.tau)
    lo = min(-10.0, params.delta - 10.0 * params.tau)
    hi = max(10.0, params.delta + 10.0 * params.tau)

    def integrand(y):
        return k * normal_pdf(y, rare) * mixture_cdf(y, params) ** (k - 1)

    val, err = integrate.quad(integrand, lo, hi, points=[0.0, params.delta],
                              epsabs=1e-12, epsrel=1e-10, limit=200)
    if not np.isfinite(val) or err > 1e-6:
        raise QuadratureError(f"enrichment quadrature failed (estimate {val}, error {err})")
    return float(val)
