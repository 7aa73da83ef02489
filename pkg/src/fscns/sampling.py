"""Generation of nominated (set-maximum) samples.

Every replicate owns a generator derived from ``(seed, stream_id)`` through
:class:`numpy.random.SeedSequence`, so replicate ``i`` is reproducible on its
own and independent of the order in which replicates are produced.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .mixture import ComponentParams, MixtureParams, RareEventParams, _check_k


def make_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Generator for replicate ``stream_id`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class RankingModel:
    """Dell-Clutter judgment ranking; ``rho=1`` is perfect ranking.

    ``standardization`` selects where the mean and sd used to standardize the
    study variable come from: the generating distribution (``"population"``)
    or the candidate units of the current batch (``"sample"``).
    """

    rho: float = 1.0
    standardization: str = "population"

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho!r}")
        if self.standardization not in ("population", "sample"):
            raise ValueError(f"unknown standardization {self.standardization!r}")


PERFECT_RANKING = RankingModel(1.0)


@dataclass
class FscDataset:
    """Labeled component-1, labeled component-2 and unlabeled NS samples.

    ``truth`` holds the component (1 or 2) of each unlabeled nominated unit
    when the data were simulated.
    """

    labeled1: np.ndarray
    labeled2: np.ndarray
    unlabeled: np.ndarray
    k: int
    truth: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        self.labeled1 = np.asarray(self.labeled1, dtype=float).ravel()
        self.labeled2 = np.asarray(self.labeled2, dtype=float).ravel()
        self.unlabeled = np.asarray(self.unlabeled, dtype=float).ravel()
        self.k = _check_k(self.k)
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=int).ravel()
            if self.truth.shape != self.unlabeled.shape:
                raise ValueError("truth must have one entry per unlabeled observation")
        for name in ("labeled1", "labeled2", "unlabeled"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")

    @property
    def n1(self):
        return self.labeled1.size

    @property
    def n2(self):
        return self.labeled2.size

    @property
    def n3(self):
        return self.unlabeled.size

    def pooled(self):
        return np.concatenate([self.labeled1, self.labeled2, self.unlabeled])


def _as_source(source):
    if isinstance(source, RareEventParams):
        return source.as_mixture()
    return source


def _draw_units(source, shape, rng):
    """Candidate units and their component labels."""
    if isinstance(source, ComponentParams):
        return rng.normal(source.mu, source.sigma, size=shape), None
    labels = np.where(rng.random(shape) < source.pi, 1, 2)
    mu = np.where(labels == 1, source.comp1.mu, source.comp2.mu)
    sd = np.where(labels == 1, source.comp1.sigma, source.comp2.sigma)
    return mu + sd * rng.standard_normal(shape), labels


def population_moments(source):
    """Mean and standard deviation of one draw from ``source``."""
    source = _as_source(source)
    if isinstance(source, ComponentParams):
        return source.mu, source.sigma
    p, c1, c2 = source.pi, source.comp1, source.comp2
    mean = p * c1.mu + (1 - p) * c2.mu
    second = p * (c1.sigma ** 2 + c1.mu ** 2) + (1 - p) * (c2.sigma ** 2 + c2.mu ** 2)
    return mean, float(np.sqrt(second - mean ** 2))


def _select(values, labels, idx, fixed_label):
    rows = np.arange(values.shape[0])
    chosen = values[rows, idx]
    if labels is None:
        return chosen, np.full(chosen.shape, fixed_label, dtype=int)
    return chosen, labels[rows, idx]


def draw_ns_max(source, k, rng, size=1, label=1):
    """Draw ``size`` nominated maxima of ``k`` units each.

    Returns ``(values, components)``.  For a pure-component source every
    component entry equals ``label``.
    """
    k = _check_k(k)
    source = _as_source(source)
    values, labels = _draw_units(source, (size, k), rng)
    return _select(values, labels, np.argmax(values, axis=1), label)


def draw_ns_max_dell_clutter(source, k, ranking: RankingModel, rng, size=1, label=1):
    """Nominate by the noisy score ``Q = rho*Ytilde + sqrt(1-rho^2)*E``.

    All ``k`` units are drawn, each paired with independent N(0,1) noise,
    and the unit with the largest ``Q`` (first on ties) is retained.
    """
    k = _check_k(k)
    source = _as_source(source)
    values, labels = _draw_units(source, (size, k), rng)
    noise = rng.standard_normal((size, k))
    if ranking.standardization == "population":
        mean, sd = population_moments(source)
    else:
        mean, sd = values.mean(), values.std()
    score = ranking.rho * (values - mean) / sd + np.sqrt(1.0 - ranking.rho ** 2) * noise
    return _select(values, labels, np.argmax(score, axis=1), label)


def generate_dataset(psi, k, n1, n2, n3, ranking: RankingModel = PERFECT_RANKING,
                     rng=None) -> FscDataset:
    """Simulate one FSC sample.

    Labeled groups are maxima of ``k`` draws from a single component under
    perfect ranking; the unlabeled group is drawn from the mixture under
    ``ranking``.
    """
    if min(n1, n2, n3) < 0 or n1 + n2 + n3 == 0:
        raise ValueError("group sizes must be nonnegative and not all zero")
    if rng is None:
        rng = make_rng(0)
    psi = _as_source(psi)
    y1, _ = draw_ns_max(psi.comp1, k, rng, size=n1, label=1)
    y2, _ = draw_ns_max(psi.comp2, k, rng, size=n2, label=2)
    if ranking.rho == 1.0:
        y3, truth = draw_ns_max(psi, k, rng, size=n3)
    else:
        y3, truth = draw_ns_max_dell_clutter(psi, k, ranking, rng, size=n3)
    return FscDataset(y1, y2, y3, k, truth)
