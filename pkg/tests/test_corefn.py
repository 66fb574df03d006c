import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from models.psi import PeriodicLevel, PsiFunction
from services.corefn import (
    DomainError,
    alpha_from_ab,
    check_scaling_identity,
    constancy_diagnostic,
    eval_h,
    eval_psi,
    psi_decrease_violations,
    psi_inverse,
    psi_levels,
)
from tests.factories import ONE_HARMONIC, make_psi

LN2 = math.log(2.0)


def test_eval_h_constant_and_harmonic():
    flat = PeriodicLevel(base=1.0, period=LN2)
    assert eval_h(flat, 0.3) == 1.0

    wavy = PeriodicLevel(base=1.0, harmonics=ONE_HARMONIC, period=LN2)
    assert eval_h(wavy, LN2 / 4) == pytest.approx(1.1, abs=1e-15)
    assert eval_h(wavy, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert eval_h(wavy, 0.17) == pytest.approx(eval_h(wavy, 0.17 + LN2), abs=1e-14)


def test_eval_psi_examples():
    assert eval_psi(make_psi("frechet"), 2.0) == pytest.approx(0.5)
    assert eval_psi(make_psi("weibull"), -2.0) == pytest.approx(2.0)
    assert eval_psi(make_psi("frechet", base=3.0), 1.0) == pytest.approx(3.0)


@pytest.mark.parametrize("branch, x", [("frechet", 0.0), ("frechet", -1.0), ("weibull", 0.5)])
def test_eval_psi_outside_support(branch, x):
    with pytest.raises(DomainError):
        eval_psi(make_psi(branch), x)


def test_psi_levels_off_support_conventions():
    assert psi_levels(make_psi("frechet"), -1.0) == math.inf
    assert psi_levels(make_psi("weibull"), 1.0) == 0.0


def test_alpha_from_ab():
    assert alpha_from_ab(2.0, 2.0, "frechet") == pytest.approx(1.0)
    assert alpha_from_ab(4.0, 2.0, "frechet") == pytest.approx(2.0)
    assert alpha_from_ab(2.0, 0.5, "weibull") == pytest.approx(1.0)


@pytest.mark.parametrize("a, b, branch", [
    (1.0, 2.0, "frechet"),
    (2.0, 0.5, "frechet"),
    (2.0, 2.0, "weibull"),
    (2.0, 2.0, "gumbel"),
])
def test_alpha_from_ab_rejects(a, b, branch):
    with pytest.raises(DomainError):
        alpha_from_ab(a, b, branch)


def test_psi_rejects_broken_scaling_relation():
    h = PeriodicLevel(base=1.0, period=LN2)
    with pytest.raises(ValidationError, match="must equal 1"):
        PsiFunction(branch="frechet", alpha=1.5, a=2.0, b=2.0, h=h)


def test_psi_rejects_wrong_side_b():
    h = PeriodicLevel(base=1.0, period=LN2)
    with pytest.raises(ValidationError):
        PsiFunction(branch="weibull", alpha=1.0, a=2.0, b=2.0, h=h)


def test_psi_rejects_non_monotone_df():
    with pytest.raises(ValidationError, match="not monotone"):
        make_psi("frechet", [{"amplitude": 0.5, "phase": 0.0}])


def test_h_must_stay_positive():
    with pytest.raises(ValidationError, match="positive"):
        PeriodicLevel(base=1.0, harmonics=[{"amplitude": 1.5, "phase": 0.0}], period=LN2)


def test_single_harmonic_bound_is_sufficient():
    psi = make_psi("frechet", ONE_HARMONIC)
    assert psi.single_harmonic_bound() > 0.0
    assert make_psi("frechet").single_harmonic_bound() is None


def test_scaling_identity_on_shipped_psi(shipped_psi):
    report = check_scaling_identity(shipped_psi)
    assert report.passed
    assert report.max_rel_err <= 1e-12


def test_scaling_identity_flags_detuned_period():
    detuned = PeriodicLevel(base=1.0, harmonics=ONE_HARMONIC, period=1.01 * LN2)
    broken = PsiFunction.model_construct(branch="frechet", alpha=1.0, a=2.0, b=2.0, h=detuned)
    report = check_scaling_identity(broken)
    assert not report.passed
    # one harmonic of amplitude 0.1 shifted by 0.01/1.01 of a turn
    assert 5e-3 < report.max_rel_err < 1e-2


def test_psi_strictly_decreasing(shipped_psi):
    assert psi_decrease_violations(shipped_psi) == 0


@pytest.mark.parametrize("branch", ["frechet", "weibull"])
def test_psi_inverse_closed_form_matches_bisection(branch):
    psi = make_psi(branch)
    levels = np.geomspace(1e-4, 1e4, 101)
    closed = psi_inverse(psi, levels)
    root = psi_inverse(psi, levels, method="bisect")
    assert_allclose(root, closed, rtol=1e-12)
    assert_allclose(psi_levels(psi, closed), levels, rtol=1e-12)


def test_psi_inverse_periodic_roundtrip(shipped_psi):
    levels = np.geomspace(1e-6, 1e6, 257)
    x = psi_inverse(shipped_psi, levels)
    assert np.all(shipped_psi.in_support(x))
    assert_allclose(psi_levels(shipped_psi, x), levels, rtol=1e-12)


def test_psi_inverse_edges():
    frechet = make_psi("frechet")
    assert_allclose(psi_inverse(frechet, [0.0, math.inf]), [math.inf, 0.0])
    weibull = make_psi("weibull")
    assert_allclose(psi_inverse(weibull, [0.0, math.inf]), [0.0, -math.inf])
    with pytest.raises(DomainError):
        psi_inverse(frechet, [-1.0])


def test_constancy_diagnostic_irrational_ratio_forces_constant():
    flat = PeriodicLevel(base=1.0, period=LN2)
    report = constancy_diagnostic(flat, LN2, 1.0)
    assert report.applies
    assert report.is_constant
    assert not report.ratio_rational


def test_constancy_diagnostic_rational_ratio():
    wavy = PeriodicLevel(base=1.0, harmonics=ONE_HARMONIC, period=LN2)
    report = constancy_diagnostic(wavy, LN2, 2.0 * LN2)
    assert report.ratio_rational
    assert not report.applies
    assert not report.is_constant
    assert report.spread == pytest.approx(0.2, abs=1e-6)


def test_constancy_diagnostic_irrational_second_period():
    wavy = PeriodicLevel(base=1.0, harmonics=ONE_HARMONIC, period=LN2)
    report = constancy_diagnostic(wavy, LN2, LN2 * math.sqrt(2.0))
    assert report.t1_violation <= 1e-12
    expected = 0.2 * math.sin(math.pi * (math.sqrt(2.0) - 1.0))
    assert report.t2_violation == pytest.approx(expected, abs=1e-4)
    assert not report.ratio_rational
    assert not report.applies


@pytest.mark.parametrize("T2", [100.0, 1e6])
def test_constancy_diagnostic_long_second_period(T2):
    flat = PeriodicLevel(base=1.0, period=LN2)
    report = constancy_diagnostic(flat, LN2, T2)
    assert report.t2_violation == 0.0
    assert report.is_constant
    assert report.applies


def test_constancy_diagnostic_rejects_nonpositive_period():
    with pytest.raises(DomainError):
        constancy_diagnostic(PeriodicLevel(base=1.0, period=LN2), 0.0, 1.0)
