import math

import numpy as np
import pytest
from scipy import integrate

from fscns import (ComponentParams, DegenerateParameterError, MixtureParams, RareEventParams,
                   log_improper_likelihood, log_ns_likelihood, mixture_cdf, mixture_pdf,
                   normal_cdf, normal_pdf, ns_density)
from fscns.mixture import (latent_pair_factor, log_ns_density, log_single_indicator_density,
                           normal_logcdf)


def phi_ref(x, mu=0.0, s=1.0):
    return math.exp(-0.5 * ((x - mu) / s) ** 2) / (s * math.sqrt(2 * math.pi))


def Phi_ref(x, mu=0.0, s=1.0):
    return 0.5 * (1.0 + math.erf((x - mu) / (s * math.sqrt(2.0))))


def erf_series_cdf(z, terms=80):
    # Maclaurin series of erf, fine for |z| <= 3
    t = z / math.sqrt(2.0)
    total = 0.0
    for n in range(terms):
        total += (-1) ** n * t ** (2 * n + 1) / (math.factorial(n) * (2 * n + 1))
    return 0.5 + total / math.sqrt(math.pi)


def test_standard_normal_values():
    n01 = ComponentParams(0.0, 1.0)
    assert normal_pdf(0.0, n01) == pytest.approx(0.3989422804014327, rel=1e-14)
    assert normal_cdf(0.0, n01) == 0.5
    assert normal_cdf(1.96, n01) == pytest.approx(0.9750021048517795, rel=1e-13)


@pytest.mark.parametrize("z", [-3.0, -1.3, -0.2, 0.0, 0.7, 2.5])
def test_cdf_matches_erf_series(z):
    assert normal_cdf(z, ComponentParams(0.0, 1.0)) == pytest.approx(erf_series_cdf(z), abs=1e-13)


def test_log_cdf_deep_tail_is_finite():
    n01 = ComponentParams(0.0, 1.0)
    val = normal_logcdf(-40.0, n01)
    # Mills-ratio asymptote
    approx = -800.0 - math.log(40.0) - 0.5 * math.log(2 * math.pi)
    assert np.isfinite(val) and val == pytest.approx(approx, rel=1e-3)


def test_mixture_pdf_cdf_hand_values(psi0):
    assert mixture_pdf(0.0, psi0) == pytest.approx(
        0.4 * 0.3989423 + 0.6 * phi_ref(0.0, 3.5, 1.2), rel=1e-6)
    assert mixture_cdf(0.0, psi0) == pytest.approx(0.4 * 0.5 + 0.6 * Phi_ref(0.0, 3.5, 1.2), rel=1e-12)


def test_ns_density_k1_is_mixture(psi0):
    x = np.linspace(-4, 8, 41)
    np.testing.assert_allclose(ns_density(x, psi0, 1), mixture_pdf(x, psi0), rtol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3, 6])
def test_ns_density_integrates_to_one(psi0, k):
    val, _ = integrate.quad(lambda x: float(ns_density(x, psi0, k)), -np.inf, np.inf,
                            epsabs=1e-12, epsrel=1e-12, limit=200)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_ns_density_hand_value(psi0):
    x = 2.0
    f = 0.4 * phi_ref(x) + 0.6 * phi_ref(x, 3.5, 1.2)
    F = 0.4 * Phi_ref(x) + 0.6 * Phi_ref(x, 3.5, 1.2)
    assert ns_density(x, psi0, 3) == pytest.approx(3 * f * F ** 2, rel=1e-12)


def test_rare_params_map_to_mixture(rare0):
    psi = rare0.as_mixture()
    assert psi.pi == pytest.approx(0.95)
    assert (psi.comp1.mu, psi.comp1.sigma) == (0.0, 1.0)
    back = RareEventParams.from_mixture(psi)
    assert back.as_tuple() == pytest.approx(rare0.as_tuple(), abs=1e-15)
    x = np.array([-1.0, 0.5, 4.0])
    np.testing.assert_allclose(log_ns_density(x, rare0, 3), log_ns_density(x, psi, 3))


@pytest.mark.parametrize("bad", [
    lambda: ComponentParams(0.0, 0.0),
    lambda: ComponentParams(float("nan"), 1.0),
    lambda: MixtureParams(1.2, ComponentParams(0, 1), ComponentParams(1, 1)),
    lambda: RareEventParams(0.1, 1.0, -1.0),
])
def test_invalid_parameters_raise(bad):
    with pytest.raises(DegenerateParameterError):
        bad()


def test_invalid_k_rejected(psi0):
    for k in (0, -1, 2.5):
        with pytest.raises(ValueError):
            ns_density(0.0, psi0, k)


def test_likelihood_empty_raises(psi0):
    with pytest.raises(ValueError):
        log_ns_likelihood(np.array([]), psi0, 2)


def test_likelihood_stays_finite_far_in_tails():
    narrow = MixtureParams(1.0, ComponentParams(0.0, 1e-3), ComponentParams(0.0, 1.0))
    val = log_ns_likelihood(np.array([-30.0, 0.0, 30.0]), narrow, 4)
    assert np.isfinite(val)


def test_propriety_sum_over_latent_pair(psi0):
    for k in range(1, 7):
        for x in (-2.0, 0.3, 3.5, 6.0):
            total = sum(latent_pair_factor(x, psi0, k, z, v) for z in (0, 1) for v in range(k))
            assert total == pytest.approx(float(ns_density(x, psi0, k)), rel=1e-12)


def test_latent_pair_support_checked(psi0):
    with pytest.raises(ValueError):
        latent_pair_factor(0.0, psi0, 3, 1, 3)


def test_single_indicator_not_proper():
    psi = MixtureParams(0.5, ComponentParams(0.0, 1.0), ComponentParams(2.0, 1.0))
    x = np.linspace(-3, 5, 17)
    wrong = np.exp(log_single_indicator_density(x, psi, 2))
    right = ns_density(x, psi, 2)
    assert np.all(np.abs(wrong - right) / right > 1e-6)
    total, _ = integrate.quad(lambda t: float(np.exp(log_single_indicator_density(t, psi, 2))),
                              -np.inf, np.inf)
    assert total < 0.99


def test_single_indicator_equals_correct_at_k1(psi0):
    x = np.array([-1.0, 0.0, 2.0, 5.0])
    assert log_improper_likelihood(x, psi0, 1) == pytest.approx(log_ns_likelihood(x, psi0, 1), rel=1e-14)


def test_single_indicator_hand_value():
    psi = MixtureParams(0.3, ComponentParams(0.0, 1.0), ComponentParams(2.0, 0.5))
    x = 1.0
    expect = 3 * (0.3 ** 3 * phi_ref(x) * Phi_ref(x) ** 2
                  + 0.7 ** 3 * phi_ref(x, 2, 0.5) * Phi_ref(x, 2, 0.5) ** 2)
    assert math.exp(log_single_indicator_density(x, psi, 3)) == pytest.approx(expect, rel=1e-12)
