"""Two-component normal mixtures and the densities of their nominated maxima.

A nominated (NS) observation is the maximum of ``k`` i.i.d. draws from the
mixture ``f = pi*f1 + (1-pi)*f2`` and has density ``k f(x) F(x)**(k-1)``.
Everything here works on the log scale so that the ``(k-1) log F`` factor
stays finite far into the left tail.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb, log_ndtr

from .errors import DegenerateParameterError

SIGMA_FLOOR = 1e-6
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class ComponentParams:
    """Normal component N(mu, sigma**2); ``sigma`` is a standard deviation."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise DegenerateParameterError(f"non-finite mean {self.mu!r}")
        if not self.sigma >= SIGMA_FLOOR:
            raise DegenerateParameterError(
                f"sigma={self.sigma!r} is below the floor {SIGMA_FLOOR}"
            )


@dataclass(frozen=True)
class MixtureParams:
    """``pi`` is the weight of ``comp1``."""

    pi: float
    comp1: ComponentParams
    comp2: ComponentParams

    def __post_init__(self):
        if not 0.0 <= self.pi <= 1.0:
            raise DegenerateParameterError(f"mixing proportion {self.pi!r} outside [0, 1]")

    def as_tuple(self):
        return (self.pi, self.comp1.mu, self.comp1.sigma, self.comp2.mu, self.comp2.sigma)


STANDARD_NORMAL = ComponentParams(0.0, 1.0)


@dataclass(frozen=True)
class RareEventParams:
    """Contamination model (1-epsilon) N(0,1) + epsilon N(delta, tau**2).

    The background is fixed; component 2 is the rare class.
    """

    epsilon: float
    delta: float
    tau: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise DegenerateParameterError(f"epsilon={self.epsilon!r} outside [0, 1]")
        if not self.tau >= SIGMA_FLOOR:
            raise DegenerateParameterError(f"tau={self.tau!r} is below the floor {SIGMA_FLOOR}")

    def as_mixture(self) -> MixtureParams:
        return MixtureParams(1.0 - self.epsilon, STANDARD_NORMAL,
                             ComponentParams(self.delta, self.tau))

    @classmethod
    def from_mixture(cls, psi: MixtureParams) -> "RareEventParams":
        return cls(1.0 - psi.pi, psi.comp2.mu, psi.comp2.sigma)

    def as_tuple(self):
        return (self.epsilon, self.delta, self.tau)


def _check_k(k):
    if int(k) != k or k < 1:
        raise ValueError(f"set size must be a positive integer, got {k!r}")
    return int(k)


def _as_mixture(psi):
    return psi.as_mixture() if isinstance(psi, RareEventParams) else psi


def _log(a):
    with np.errstate(divide="ignore"):
        return np.log(a)


def normal_logpdf(x, p: ComponentParams):
    u = (np.asarray(x, dtype=float) - p.mu) / p.sigma
    return -0.5 * u * u - np.log(p.sigma) - _LOG_SQRT_2PI


def normal_logcdf(x, p: ComponentParams):
    # log_ndtr switches to an asymptotic series deep in the left tail
    return log_ndtr((np.asarray(x, dtype=float) - p.mu) / p.sigma)


def normal_pdf(x, p: ComponentParams):
    return np.exp(normal_logpdf(x, p))


def normal_cdf(x, p: ComponentParams):
    return np.exp(normal_logcdf(x, p))


def mixture_logpdf(x, psi):
    psi = _as_mixture(psi)
    return np.logaddexp(_log(psi.pi) + normal_logpdf(x, psi.comp1),
                        _log(1.0 - psi.pi) + normal_logpdf(x, psi.comp2))


def mixture_logcdf(x, psi):
    psi = _as_mixture(psi)
    return np.logaddexp(_log(psi.pi) + normal_logcdf(x, psi.comp1),
                        _log(1.0 - psi.pi) + normal_logcdf(x, psi.comp2))


def mixture_pdf(x, psi):
    return np.exp(mixture_logpdf(x, psi))


def mixture_cdf(x, psi):
    return np.exp(mixture_logcdf(x, psi))


def log_ns_density(x, psi, k):
    k = _check_k(k)
    out = np.log(k) + mixture_logpdf(x, psi)
    if k > 1:
        out = out + (k - 1) * mixture_logcdf(x, psi)
    return out


def ns_density(x, psi, k):
    """Density ``k f F**(k-1)`` of the maximum of ``k`` mixture draws."""
    return np.exp(log_ns_density(x, psi, k))


def _sum_or_neg_inf(terms):
    terms = np.asarray(terms, dtype=float)
    if terms.size == 0:
        raise ValueError("data must be nonempty")
    if np.any(np.isneginf(terms)):
        return -np.inf
    return float(np.sum(terms))


def log_ns_likelihood(data, psi, k):
    """Correct NS log-likelihood; ``-inf`` if any observation has zero density."""
    return _sum_or_neg_inf(log_ns_density(data, psi, k))


def log_single_indicator_density(x, psi, k):
    """Log of ``k [pi^k f1 F1^(k-1) + (1-pi)^k f2 F2^(k-1)]``.

    This is the marginal obtained when the whole set is forced to share the
    component of its maximum; it keeps only the pure terms of the binomial
    expansion of ``k f F**(k-1)`` and is therefore not a density for k >= 2.
    """
    k = _check_k(k)
    psi = _as_mixture(psi)
    t1 = k * _log(psi.pi) + normal_logpdf(x, psi.comp1)
    t2 = k * _log(1.0 - psi.pi) + normal_logpdf(x, psi.comp2)
    if k > 1:
        t1 = t1 + (k - 1) * normal_logcdf(x, psi.comp1)
        t2 = t2 + (k - 1) * normal_logcdf(x, psi.comp2)
    return np.log(k) + np.logaddexp(t1, t2)


def log_improper_likelihood(data, psi, k):
    """Misspecified single-indicator objective (includes the ``n log k`` constant)."""
    return _sum_or_neg_inf(log_single_indicator_density(data, psi, k))


def latent_pair_factor(x, psi, k, z, v):
    """Complete-data factor of one NS observation for the latent pair (z, v).

    ``z`` is 1 if the measured maximum came from component 1, ``v`` counts
    component-1 members among the other ``k-1`` units.  Summed over
    ``z in {0, 1}`` and ``v in 0..k-1`` this recovers ``ns_density``.
    The leading ``k`` is the number of positions the maximum can occupy.
    """
    k = _check_k(k)
    if z not in (0, 1) or not 0 <= v <= k - 1:
        raise ValueError(f"latent pair ({z}, {v}) outside its support for k={k}")
    psi = _as_mixture(psi)
    f = normal_pdf(x, psi.comp1) if z else normal_pdf(x, psi.comp2)
    F1 = normal_cdf(x, psi.comp1)
    F2 = normal_cdf(x, psi.comp2)
    return (k * comb(k - 1, v, exact=True) * psi.pi ** (z + v)
            * (1.0 - psi.pi) ** (k - z - v) * f * F1 ** v * F2 ** (k - 1 - v))
