import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.laws import LaplaceTransformSpec, MaxSemiStableDF, PhiMaxSemiStableDF
from services.corefn import DomainError
from services.distributions import (
    InvalidCofactor,
    cdf,
    cofactor_identity_check,
    compose_phi_max,
    df_monotone_check,
    exp_max_semi_stable,
    geometric_max_identity_check,
    log_cdf,
    lt_eval,
    lt_semi_sd_cofactor,
    max_semi_stability_check,
    phi_composition_check,
    quantile,
    quantile_agreement_check,
    quantile_roundtrip_check,
    sample,
    sample_power,
    scale_exponent,
    semi_sd_cofactor_df,
)
from utils.grids import log_grid
from utils.stats import ks_one_sample
from tests.factories import KS_STRICT, ONE_HARMONIC, make_psi

SEED = 20240611


def test_cdf_frechet_examples(frechet_law):
    assert cdf(frechet_law, 1.0) == pytest.approx(math.exp(-1.0))
    assert cdf(frechet_law, 2.0) == pytest.approx(math.exp(-0.5))
    assert cdf(frechet_law, 0.0) == 0.0
    assert cdf(frechet_law, -3.0) == 0.0


def test_cdf_weibull_examples(weibull_law):
    assert cdf(weibull_law, -1.0) == pytest.approx(math.exp(-1.0))
    assert cdf(weibull_law, 0.0) == 1.0
    assert cdf(weibull_law, 5.0) == 1.0


def test_cdf_vectorized_matches_log_cdf(harmonic_law):
    x = log_grid(harmonic_law.psi, 64)
    assert_allclose(np.log(cdf(harmonic_law, x)), log_cdf(harmonic_law, x), rtol=1e-14)


def test_quantile_closed_form(frechet_law):
    assert quantile(frechet_law, 0.5) == pytest.approx(1.0 / math.log(2.0), rel=1e-14)
    assert quantile(frechet_law, math.exp(-1.0)) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_quantile_rejects_levels_outside_unit_interval(frechet_law, u):
    with pytest.raises(DomainError):
        quantile(frechet_law, u)


def test_quantile_roundtrip_on_shipped_laws(shipped_psi):
    law = MaxSemiStableDF(psi=shipped_psi)
    x = log_grid(shipped_psi, 257)
    assert quantile_roundtrip_check(law, x).passed
    u = np.linspace(0.01, 0.99, 99)
    assert_allclose(cdf(law, quantile(law, u)), u, rtol=1e-10)


@pytest.mark.parametrize("branch", ["frechet", "weibull"])
def test_quantile_closed_form_agrees_with_root_finder(branch):
    law = MaxSemiStableDF(psi=make_psi(branch))
    report = quantile_agreement_check(law, np.linspace(0.001, 0.999, 999))
    assert report.passed
    assert report.max_err <= 1e-10


def test_max_semi_stability_on_shipped_laws(shipped_psi):
    report = max_semi_stability_check(MaxSemiStableDF(psi=shipped_psi))
    assert report.passed
    assert report.anchor == "max-semi-stability"


def test_df_monotone_on_shipped_laws(shipped_psi):
    assert df_monotone_check(MaxSemiStableDF(psi=shipped_psi)).passed


def test_sample_is_deterministic(frechet_law):
    first = sample(frechet_law, 100, SEED)
    assert np.array_equal(first, sample(frechet_law, 100, SEED))
    assert not np.array_equal(first, sample(frechet_law, 100, SEED + 1))


def test_sample_rejects_empty(frechet_law):
    with pytest.raises(DomainError):
        sample(frechet_law, 0, SEED)


def test_sample_matches_law(shipped_psi):
    law = MaxSemiStableDF(psi=shipped_psi)
    draws = sample(law, 10_000, SEED)
    assert ks_one_sample(draws, lambda x: cdf(law, x), KS_STRICT).passed


def test_sample_power_unit_exponent_reproduces_sample(frechet_law):
    assert np.array_equal(sample_power(frechet_law, 1.0, 500, SEED), sample(frechet_law, 500, SEED))


def test_sample_power_square_is_doubled_level(frechet_law):
    doubled = MaxSemiStableDF(psi=make_psi("frechet", base=2.0))
    draws = sample_power(frechet_law, 2.0, 10_000, SEED)
    assert ks_one_sample(draws, lambda x: cdf(doubled, x), KS_STRICT).passed


def test_sample_power_small_exponent(frechet_law):
    draws = sample_power(frechet_law, 0.01, 1000, SEED)
    assert np.all(np.isfinite(draws))
    grid = np.geomspace(1e-3, 1e3, 25)
    empirical = np.searchsorted(np.sort(draws), grid, side="right") / draws.size
    assert np.max(np.abs(empirical - cdf(frechet_law, grid) ** 0.01)) < 0.06


def test_sample_power_rejects_nonpositive_exponent(frechet_law):
    with pytest.raises(DomainError):
        sample_power(frechet_law, 0.0, 10, SEED)


def test_cofactor_closed_form(frechet_law):
    H, report = semi_sd_cofactor_df(frechet_law, 2.0)
    assert report.passed
    assert H.a_c == pytest.approx(2.0)
    x = np.array([0.25, 0.5, 1.0, 3.0])
    assert_allclose(cdf(H, x), np.exp(-1.0 / (2.0 * x)), rtol=1e-14)


def test_cofactor_wrong_direction_is_rejected(frechet_law):
    with pytest.raises(InvalidCofactor) as info:
        semi_sd_cofactor_df(frechet_law, 0.5)
    assert info.value.report is not None
    assert not info.value.report.passed


def test_cofactor_periodic_law(harmonic_law):
    H, report = semi_sd_cofactor_df(harmonic_law, 2.0)
    assert report.passed
    check = cofactor_identity_check(harmonic_law, H)
    assert check.passed


@pytest.mark.parametrize("c", [1.3, 2.0, 5.0])
def test_max_sd_scales_for_constant_h(frechet_law, c):
    H, report = semi_sd_cofactor_df(frechet_law, c)
    assert report.passed
    assert H.a_c == pytest.approx(c, rel=1e-12)
    assert cofactor_identity_check(frechet_law, H).passed


def test_weibull_cofactor_uses_scales_below_one(weibull_law):
    H, report = semi_sd_cofactor_df(weibull_law, 0.5)
    assert report.passed
    assert cofactor_identity_check(weibull_law, H).passed
    with pytest.raises(InvalidCofactor):
        semi_sd_cofactor_df(weibull_law, 2.0)


def test_scale_exponent(harmonic_law, frechet_law):
    assert scale_exponent(harmonic_law.psi, 4.0) == pytest.approx(4.0)
    assert scale_exponent(frechet_law.psi, 3.0) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        scale_exponent(harmonic_law.psi, 3.0)
    with pytest.raises(DomainError):
        scale_exponent(frechet_law.psi, 1.0)


def test_phi_law_cofactor_carries_atom(gamma2_law):
    H, report = semi_sd_cofactor_df(gamma2_law, 2.0)
    assert report.passed
    assert H.atom == pytest.approx(0.25)
    assert cofactor_identity_check(gamma2_law, H).passed


def test_lt_eval_examples():
    exponential = LaplaceTransformSpec(kind="exponential")
    assert lt_eval(exponential, 0.0) == 1.0
    assert lt_eval(exponential, 1.0) == pytest.approx(0.5)
    assert lt_eval(LaplaceTransformSpec(kind="gamma", beta=2.0), 1.0) == pytest.approx(0.25)
    assert lt_eval(LaplaceTransformSpec(kind="degenerate"), 1.0) == pytest.approx(math.exp(-1.0))
    with pytest.raises(DomainError):
        lt_eval(exponential, -1.0)


def test_exponential_transform_has_unit_beta():
    with pytest.raises(ValueError):
        LaplaceTransformSpec(kind="exponential", beta=2.0)


def test_lt_cofactor_examples():
    phi0, _ = lt_semi_sd_cofactor(LaplaceTransformSpec(kind="gamma", beta=1.0), 0.5)
    assert phi0(1.0) == pytest.approx(0.75)
    assert phi0(0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_lt_cofactor_passes_cm_proxy(beta):
    _, report = lt_semi_sd_cofactor(LaplaceTransformSpec(kind="gamma", beta=beta), 0.5)
    assert report.passed
    assert len(report.orders) == 9
    assert report.first_failure() is None


def test_lt_cofactor_rejects_scale_outside_unit_interval():
    with pytest.raises(DomainError):
        lt_semi_sd_cofactor(LaplaceTransformSpec(kind="exponential"), 1.5)


def test_compose_exponential_gives_log_logistic(frechet_psi):
    G = compose_phi_max(LaplaceTransformSpec(kind="exponential"), frechet_psi)
    x = np.array([0.5, 1.0, 3.0])
    assert_allclose(cdf(G, x), x / (1.0 + x), rtol=1e-14)
    assert cdf(exp_max_semi_stable(frechet_psi), 1.0) == pytest.approx(0.5)


def test_compose_gamma_closed_form(frechet_psi):
    G = compose_phi_max(LaplaceTransformSpec(kind="gamma", beta=2.0), frechet_psi)
    x = np.array([0.5, 1.0, 3.0])
    assert_allclose(cdf(G, x), (1.0 + 1.0 / x) ** -2.0, rtol=1e-13)


@pytest.mark.parametrize("beta", [1.0, 2.0])
@pytest.mark.parametrize("branch", ["frechet", "weibull"])
def test_phi_composition_identity(beta, branch):
    G = PhiMaxSemiStableDF(phi=LaplaceTransformSpec(kind="gamma", beta=beta), psi=make_psi(branch))
    assert phi_composition_check(G).passed


def test_phi_composition_identity_periodic():
    G = PhiMaxSemiStableDF(phi=LaplaceTransformSpec(kind="gamma", beta=2.0),
                           psi=make_psi("frechet", ONE_HARMONIC))
    assert phi_composition_check(G).passed


def test_geometric_max_identity(exponential_law):
    report = geometric_max_identity_check(exponential_law, 0.5, 2.0)
    assert report.passed
    assert report.max_err <= 1e-12


def test_geometric_max_identity_periodic():
    F = exp_max_semi_stable(make_psi("frechet", ONE_HARMONIC))
    assert geometric_max_identity_check(F, 0.5, 2.0).passed


def test_geometric_max_identity_mismatched_p(exponential_law):
    report = geometric_max_identity_check(exponential_law, 0.4, 2.0)
    assert not report.passed
    assert report.max_err > 1e-3


def test_geometric_max_identity_needs_exponential(gamma2_law):
    with pytest.raises(DomainError):
        geometric_max_identity_check(gamma2_law, 0.5, 2.0)
