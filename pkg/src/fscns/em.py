"""Weighted-likelihood EM for fractionally supervised classification.

Two fitters share one loop:

* ``fit_fsc_ns`` maximizes the NS weighted log-likelihood.  Each unlabeled
  maximum carries the latent pair (Z, V): the component of the measured unit
  and the number of component-1 units among the other ``k-1`` set members.
  The M-step for a normal component has no closed form because of the
  ``log Phi`` terms and is finished by a safeguarded Newton search on
  ``(mu, log sigma)``.
* ``fit_fsc_srs`` is the ordinary FSC EM that treats every nominated value
  as a plain mixture draw.

Internally posteriors are always expressed for component 1 (``z`` is
P(Z=1 | y) and ``v`` the expected number of component-1 units among the
unmeasured ones).  In the rare-event model component 1 is the known N(0,1)
background and the public API reports posteriors of the rare class instead.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import log_ndtr

from .errors import DegenerateFitError, DegenerateParameterError, EmptyComponentError
from .mixture import (
    SIGMA_FLOOR,
    STANDARD_NORMAL,
    ComponentParams,
    MixtureParams,
    RareEventParams,
    _check_k,
    mixture_logcdf,
    mixture_logpdf,
    normal_logcdf,
    normal_logpdf,
)
from .sampling import FscDataset

log = logging.getLogger(__name__)

GENERAL = "general-gaussian"
RARE = "rare-event"
MODELS = (GENERAL, RARE)
PI_BOUNDS = (1e-6, 1.0 - 1e-6)
EMPTY_WEIGHT = 1e-8
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class Weights:
    """Influence of labeled group 1, labeled group 2 and the unlabeled group."""

    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0

    def __post_init__(self):
        ws = (self.w1, self.w2, self.w3)
        if min(ws) < 0 or not all(np.isfinite(ws)):
            raise ValueError(f"weights must be finite and nonnegative, got {ws}")
        if max(ws) == 0:
            raise ValueError("at least one weight must be positive")


@dataclass
class EmConfig:
    """EM stopping rule, inner-optimizer settings and initialization.

    ``init`` is ``"kmeans"``, ``"labeled-moments"`` or explicit parameters.
    """

    tol: float = 1e-5
    max_iter: int = 500
    inner_max_iter: int = 50
    inner_gtol: float = 1e-8
    init: Union[str, MixtureParams, RareEventParams] = "kmeans"
    threshold: float = 0.5

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1 or self.inner_max_iter < 0:
            raise ValueError("iteration limits must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")


@dataclass
class LatentPosteriors:
    z_tilde: np.ndarray
    v_tilde: np.ndarray


@dataclass
class FitResult:
    psi_hat: Union[MixtureParams, RareEventParams]
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    posteriors: LatentPosteriors
    classifications: np.ndarray
    scores: np.ndarray = field(repr=False)
    method: str = "FSC-NS"
    model: str = GENERAL

    @property
    def loglik(self):
        return float(self.loglik_trace[-1])


# ---------------------------------------------------------------------------
# E-step and mixing proportion


def _comp1_posteriors(y, psi: MixtureParams, k):
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        log_pi = np.log(psi.pi)
    logf = mixture_logpdf(y, psi)
    logF = mixture_logcdf(y, psi)
    if np.any(~np.isfinite(logf)) or (k > 1 and np.any(~np.isfinite(logF))):
        raise DegenerateParameterError("mixture density or cdf vanished at an observation")
    z = np.exp(log_pi + normal_logpdf(y, psi.comp1) - logf)
    if k == 1:
        v = np.zeros_like(z)
    else:
        v = (k - 1) * np.exp(log_pi + normal_logcdf(y, psi.comp1) - logF)
    # guard against 1 + ulp from exp/log round trips
    return np.clip(z, 0.0, 1.0), np.clip(v, 0.0, k - 1)


def e_step_ns(y3, psi, k) -> LatentPosteriors:
    """Posterior means of the latent pair for every unlabeled maximum.

    For :class:`MixtureParams` the pair refers to component 1; for
    :class:`RareEventParams` it refers to the rare component, so ``z_tilde``
    is the rare-class posterior and ``v_tilde`` the expected number of rare
    units among the unmeasured set members.
    """
    k = _check_k(k)
    if isinstance(psi, RareEventParams):
        mirrored = MixtureParams(psi.epsilon, ComponentParams(psi.delta, psi.tau), STANDARD_NORMAL)
        return LatentPosteriors(*_comp1_posteriors(y3, mirrored, k))
    return LatentPosteriors(*_comp1_posteriors(y3, psi, k))


def update_pi(post: LatentPosteriors, n3, k):
    """Mixing-proportion update ``sum(z + v) / (n3 k)``, clamped away from 0 and 1."""
    if len(post.z_tilde) != n3 or len(post.v_tilde) != n3:
        raise ValueError("posterior lengths must equal n3")
    if n3 == 0:
        raise ValueError("no unlabeled observations to update the mixing proportion")
    pi = (np.sum(post.z_tilde) + np.sum(post.v_tilde)) / (n3 * k)
    return float(np.clip(pi, *PI_BOUNDS))


# ---------------------------------------------------------------------------
# Component objective and M-step


def _component_terms(which, data: FscDataset, z, v, w: Weights, ns=True):
    """Stack one component's data with density weights ``a`` and cdf weights ``b``."""
    k = data.k
    if which == 1:
        ylab, wl, e, c = data.labeled1, w.w1, z, v
    elif which == 2:
        ylab, wl, e, c = data.labeled2, w.w2, 1.0 - z, (k - 1) - v
    else:
        raise ValueError(f"component must be 1 or 2, got {which!r}")
    y = np.concatenate([ylab, data.unlabeled])
    a = np.concatenate([np.full(ylab.size, float(wl)), w.w3 * np.asarray(e, dtype=float)])
    if ns and k > 1:
        b = np.concatenate([np.full(ylab.size, wl * (k - 1.0)), w.w3 * np.asarray(c, dtype=float)])
    else:
        b = np.zeros_like(a)
    keep = (a > 0) | (b > 0)
    return y[keep], a[keep], b[keep]


def _objective(mu, s, y, a, b):
    sigma = np.exp(s)
    u = (y - mu) / sigma
    val = np.dot(a, -0.5 * u * u - s - _LOG_SQRT_2PI)
    if b.any():
        val += np.dot(b, log_ndtr(u))
    return float(val)


def _objective_derivs(mu, s, y, a, b):
    """Value, gradient and Hessian in ``(mu, log sigma)``."""
    sigma = np.exp(s)
    u = (y - mu) / sigma
    au = a * u
    val = np.dot(a, -0.5 * u * u - s - _LOG_SQRT_2PI)
    g_mu = au.sum() / sigma
    g_s = np.dot(au, u) - a.sum()
    h_mm = -a.sum() / sigma ** 2
    h_ms = -2.0 * g_mu
    h_ss = -2.0 * np.dot(au, u)
    if b.any():
        lc = log_ndtr(u)
        lam = np.exp(-0.5 * u * u - _LOG_SQRT_2PI - lc)  # phi(u) / Phi(u)
        h2 = -lam * (u + lam)
        val += np.dot(b, lc)
        g_mu -= np.dot(b, lam) / sigma
        g_s -= np.dot(b, lam * u)
        h_mm += np.dot(b, h2) / sigma ** 2
        h_ms += (np.dot(b, h2 * u) + np.dot(b, lam)) / sigma
        h_ss += np.dot(b, h2 * u * u + lam * u)
    return float(val), np.array([g_mu, g_s]), np.array([[h_mm, h_ms], [h_ms, h_ss]])


def _golden_max(f, lo, hi, iters=60):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


def _coordinate_golden(x, fx, value):
    """One sweep of golden-section line maximization along each coordinate."""
    x = x.copy()
    for j, radius in ((0, 2.0 * np.exp(x[1])), (1, 1.0)):
        def along(t, j=j):
            trial = x.copy()
            trial[j] = t
            return value(trial)
        t, ft = _golden_max(along, x[j] - radius, x[j] + radius)
        if ft > fx:
            x[j], fx = t, ft
    return x, fx


def _refine(start, y, a, b, max_iter, gtol):
    """Safeguarded Newton ascent on (mu, log sigma); never ends below ``start``."""
    s_min = np.log(SIGMA_FLOOR)

    def value(p):
        return _objective(p[0], p[1], y, a, b) if p[1] >= s_min else -np.inf

    x = np.asarray(start, dtype=float)
    fx, g, H = _objective_derivs(x[0], x[1], y, a, b)
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= gtol:
            break
        if H[0, 0] < 0 and np.linalg.det(H) > 0:
            step = -np.linalg.solve(H, g)
            if np.max(np.abs(step)) < 1e-12 * (1.0 + np.max(np.abs(x))):
                break
            t = 1.0
            while t > 1e-10:
                trial = x + t * step
                ft = value(trial)
                if ft >= fx:
                    break
                t *= 0.5
            else:
                # concave model but no ascent: already at the numerical optimum
                break
            x, fx = trial, ft
        else:
            x_new, f_new = _coordinate_golden(x, fx, value)
            if not f_new > fx:
                break
            x, fx = x_new, f_new
        fx, g, H = _objective_derivs(x[0], x[1], y, a, b)
    return x, fx


def _closed_form(y, a):
    n_eff = a.sum()
    if n_eff < EMPTY_WEIGHT:
        raise EmptyComponentError(f"effective component weight {n_eff:.3g} is numerically zero")
    mu = np.dot(a, y) / n_eff
    var = np.dot(a, (y - mu) ** 2) / n_eff
    return float(mu), float(max(np.sqrt(var), SIGMA_FLOOR))


def _m_step(y, a, b, current: Optional[ComponentParams], config: EmConfig):
    mu, sigma = _closed_form(y, a)
    if not b.any():
        return ComponentParams(mu, sigma)
    start = np.array([mu, np.log(sigma)])
    if current is not None:
        cur = np.array([current.mu, np.log(current.sigma)])
        if _objective(cur[0], cur[1], y, a, b) > _objective(start[0], start[1], y, a, b):
            start = cur
    x, _ = _refine(start, y, a, b, config.inner_max_iter, config.inner_gtol)
    return ComponentParams(float(x[0]), float(max(np.exp(x[1]), SIGMA_FLOOR)))


def component_objective(theta: ComponentParams, which, data: FscDataset,
                        post: LatentPosteriors, w: Weights):
    """Component-``which`` part of the NS Q-function (posteriors for component 1)."""
    y, a, b = _component_terms(which, data, post.z_tilde, post.v_tilde, w)
    return _objective(theta.mu, np.log(theta.sigma), y, a, b)


def m_step_component(which, data: FscDataset, post: LatentPosteriors, w: Weights,
                     config: EmConfig = None, current: ComponentParams = None) -> ComponentParams:
    """Maximize ``component_objective`` for one component.

    Starts from the weighted-Gaussian closed form (or from ``current`` when
    that is already better) and refines numerically when cdf terms are present.
    """
    config = config or EmConfig()
    y, a, b = _component_terms(which, data, post.z_tilde, post.v_tilde, w)
    return _m_step(y, a, b, current, config)


def m_step_rare(data: FscDataset, post: LatentPosteriors, w: Weights,
                config: EmConfig = None, current: RareEventParams = None):
    """(delta, tau) update of the rare-event model.

    ``post`` holds rare-class posteriors, as returned by ``e_step_ns`` for a
    :class:`RareEventParams`.
    """
    k = data.k
    general = LatentPosteriors(1.0 - np.asarray(post.z_tilde), (k - 1) - np.asarray(post.v_tilde))
    theta = m_step_component(2, data, general, w, config,
                             None if current is None else ComponentParams(current.delta, current.tau))
    return theta.mu, theta.sigma


# ---------------------------------------------------------------------------
# Objectives


def _weighted_sum(weight, terms):
    if weight == 0 or terms.size == 0:
        return 0.0
    return weight * float(np.sum(terms))


def weighted_loglik(data: FscDataset, psi, w: Weights, k=None, mode="NS"):
    """Weighted log-likelihood of the three groups.

    ``mode="NS"`` uses the set-maximum densities (labeled cdf terms and
    ``log k f F**(k-1)`` for the unlabeled group); ``mode="SRS"`` treats all
    values as ordinary draws.  The two agree when ``k == 1``.
    """
    k = data.k if k is None else _check_k(k)
    mode = mode.upper()
    if isinstance(psi, RareEventParams):
        psi = psi.as_mixture()
    y1, y2, y3 = data.labeled1, data.labeled2, data.unlabeled
    if mode == "NS":
        t1 = normal_logpdf(y1, psi.comp1)
        t2 = normal_logpdf(y2, psi.comp2)
        t3 = np.log(k) + mixture_logpdf(y3, psi)
        if k > 1:
            t1 = t1 + (k - 1) * normal_logcdf(y1, psi.comp1)
            t2 = t2 + (k - 1) * normal_logcdf(y2, psi.comp2)
            t3 = t3 + (k - 1) * mixture_logcdf(y3, psi)
    elif mode == "SRS":
        t1 = normal_logpdf(y1, psi.comp1)
        t2 = normal_logpdf(y2, psi.comp2)
        t3 = mixture_logpdf(y3, psi)
    else:
        raise ValueError(f"mode must be 'NS' or 'SRS', got {mode!r}")
    return _weighted_sum(w.w1, t1) + _weighted_sum(w.w2, t2) + _weighted_sum(w.w3, t3)


def q_function(data: FscDataset, psi, post: LatentPosteriors, w: Weights, k=None):
    """Expected weighted complete-data log-likelihood (component-1 posteriors)."""
    k = data.k if k is None else _check_k(k)
    if isinstance(psi, RareEventParams):
        psi = psi.as_mixture()
    y1, y2, y3 = data.labeled1, data.labeled2, data.unlabeled
    z, v = np.asarray(post.z_tilde), np.asarray(post.v_tilde)
    lab = (_weighted_sum(w.w1, normal_logpdf(y1, psi.comp1) + (k - 1) * normal_logcdf(y1, psi.comp1))
           + _weighted_sum(w.w2, normal_logpdf(y2, psi.comp2) + (k - 1) * normal_logcdf(y2, psi.comp2)))
    if w.w3 == 0 or y3.size == 0:
        return lab
    with np.errstate(divide="ignore", invalid="ignore"):
        mixing = np.sum(z + v) * np.log(psi.pi) + np.sum(k - z - v) * np.log1p(-psi.pi)
    dens = np.dot(z, normal_logpdf(y3, psi.comp1)) + np.dot(1 - z, normal_logpdf(y3, psi.comp2))
    cdf = 0.0
    if k > 1:
        cdf = (np.dot(v, normal_logcdf(y3, psi.comp1))
               + np.dot(k - 1 - v, normal_logcdf(y3, psi.comp2)))
    return lab + w.w3 * float(mixing + dens + cdf)


# ---------------------------------------------------------------------------
# Initialization


def _two_means_1d(x):
    """Globally optimal two-cluster split of 1-D data (sorted scan)."""
    xs = np.sort(x)
    n = xs.size
    if xs[0] == xs[-1]:
        return xs[: n // 2], xs[n // 2:]
    csum = np.cumsum(xs)
    csq = np.cumsum(xs * xs)
    i = np.arange(1, n)
    left_ss = csq[:-1] - csum[:-1] ** 2 / i
    right_ss = (csq[-1] - csq[:-1]) - (csum[-1] - csum[:-1]) ** 2 / (n - i)
    cut = int(np.argmin(left_ss + right_ss)) + 1
    return xs[:cut], xs[cut:]


def kmeans_init(data: FscDataset) -> MixtureParams:
    """Two-cluster k-means on the pooled nominated values.

    The cluster whose mean is closest to the labeled-1 mean becomes
    component 1; without labeled-1 data clusters are taken in ascending order.
    """
    pooled = data.pooled()
    if pooled.size < 2:
        raise ValueError("k-means initialization needs at least two pooled values")
    lo, hi = _two_means_1d(pooled)
    c1, c2 = lo, hi
    if data.n1 > 0:
        m1 = data.labeled1.mean()
        if abs(hi.mean() - m1) < abs(lo.mean() - m1):
            c1, c2 = hi, lo

    def comp(c):
        return ComponentParams(float(c.mean()), float(max(c.std(), SIGMA_FLOOR)))

    pi0 = float(np.clip(c1.size / pooled.size, *PI_BOUNDS))
    return MixtureParams(pi0, comp(c1), comp(c2))


def _labeled_moments_init(data: FscDataset) -> MixtureParams:
    if data.n1 < 1 or data.n2 < 1:
        raise ValueError("labeled-moments initialization needs both labeled groups")

    def comp(y):
        return ComponentParams(float(y.mean()), float(max(y.std(), SIGMA_FLOOR)))

    pi0 = data.n1 / (data.n1 + data.n2)
    return MixtureParams(pi0, comp(data.labeled1), comp(data.labeled2))


def initial_params(data: FscDataset, config: EmConfig, model=GENERAL) -> MixtureParams:
    init = config.init
    if isinstance(init, RareEventParams):
        psi = init.as_mixture()
    elif isinstance(init, MixtureParams):
        psi = init
    elif init == "kmeans":
        psi = kmeans_init(data)
    elif init == "labeled-moments":
        psi = _labeled_moments_init(data)
    else:
        raise ValueError(f"unknown initialization {init!r}")
    if model == RARE:
        psi = MixtureParams(psi.pi, STANDARD_NORMAL, psi.comp2)
    return psi


# ---------------------------------------------------------------------------
# Fitters


def _em(data: FscDataset, w: Weights, config: EmConfig, model, ns: bool) -> FitResult:
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    k = data.k
    eff_k = k if ns else 1
    mode = "NS" if ns else "SRS"
    method = "FSC-NS" if ns else "FSC-SRS"
    psi = initial_params(data, config, model)
    learn_pi = data.n3 > 0 and w.w3 > 0
    if not learn_pi and data.n1 + data.n2 > 0:
        # pi is absent from the objective; unlabeled posteriors must not set it either
        pi_fixed = float(np.clip(data.n1 / (data.n1 + data.n2), *PI_BOUNDS))
        psi = MixtureParams(pi_fixed, psi.comp1, psi.comp2)

    try:
        ll = weighted_loglik(data, psi, w, k, mode)
        trace = [ll]
        converged = False
        it = 0
        while it < config.max_iter:
            it += 1
            z, v = _comp1_posteriors(data.unlabeled, psi, eff_k)
            pi = psi.pi
            if learn_pi:
                pi = update_pi(LatentPosteriors(z, v), data.n3, eff_k)
            if model == RARE:
                comp1 = STANDARD_NORMAL
            else:
                comp1 = _m_step(*_component_terms(1, data, z, v, w, ns), psi.comp1, config)
            comp2 = _m_step(*_component_terms(2, data, z, v, w, ns), psi.comp2, config)
            psi = MixtureParams(pi, comp1, comp2)
            ll_new = weighted_loglik(data, psi, w, k, mode)
            if not np.isfinite(ll_new):
                raise DegenerateFitError(f"weighted log-likelihood became {ll_new} at iteration {it}")
            trace.append(ll_new)
            if ll_new < ll - 1e-8:
                log.debug("%s: log-likelihood decreased by %.3g at iteration %d", method, ll - ll_new, it)
            done = abs(ll_new - ll) <= config.tol
            ll = ll_new
            if done:
                converged = True
                break
        z, v = _comp1_posteriors(data.unlabeled, psi, eff_k)
    except (DegenerateParameterError, EmptyComponentError) as exc:
        raise DegenerateFitError(f"{method} aborted: {exc}") from exc

    scores = 1.0 - z
    classes = np.where(scores > config.threshold, 2, 1)
    if model == RARE:
        psi_hat = RareEventParams.from_mixture(psi)
        post = LatentPosteriors(scores, (eff_k - 1) - v)
    else:
        psi_hat = psi
        post = LatentPosteriors(z, v)
    return FitResult(psi_hat, np.asarray(trace), it, converged, post, classes, scores, method, model)


def fit_fsc_ns(data: FscDataset, w: Weights = Weights(), config: EmConfig = None,
               model=GENERAL) -> FitResult:
    """FSC under the nomination-sampling likelihood.

    ``scores`` in the result are posterior probabilities of component 2
    (the rare class in the rare-event model); ``classifications`` apply the
    Bayes rule at ``config.threshold``.
    """
    return _em(data, w, config or EmConfig(), model, ns=True)


def fit_fsc_srs(data: FscDataset, w: Weights = Weights(), config: EmConfig = None,
                model=GENERAL) -> FitResult:
    """Ordinary FSC that ignores the set size and treats maxima as plain draws."""
    return _em(data, w, config or EmConfig(), model, ns=False)
