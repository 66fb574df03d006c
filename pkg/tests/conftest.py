import pytest

from models.laws import LaplaceTransformSpec, MaxSemiStableDF, PhiMaxSemiStableDF
from models.psi import PsiFunction
from tests.factories import ONE_HARMONIC, SHIPPED_PSI, make_psi


@pytest.fixture(params=sorted(SHIPPED_PSI))
def shipped_psi(request) -> PsiFunction:
    branch, harmonics = SHIPPED_PSI[request.param]
    return make_psi(branch, harmonics)


@pytest.fixture
def frechet_psi() -> PsiFunction:
    return make_psi("frechet")


@pytest.fixture
def frechet_law(frechet_psi) -> MaxSemiStableDF:
    """F(x) = exp(-1/x)"""
    return MaxSemiStableDF(psi=frechet_psi)


@pytest.fixture
def harmonic_law() -> MaxSemiStableDF:
    return MaxSemiStableDF(psi=make_psi("frechet", ONE_HARMONIC))


@pytest.fixture
def weibull_law() -> MaxSemiStableDF:
    """F(x) = exp(x) on x < 0"""
    return MaxSemiStableDF(psi=make_psi("weibull"))


@pytest.fixture
def exponential_law(frechet_psi) -> PhiMaxSemiStableDF:
    """F(x) = x / (1 + x)"""
    return PhiMaxSemiStableDF(phi=LaplaceTransformSpec(kind="exponential"), psi=frechet_psi)


@pytest.fixture
def gamma2_law(frechet_psi) -> PhiMaxSemiStableDF:
    return PhiMaxSemiStableDF(phi=LaplaceTransformSpec(kind="gamma", beta=2.0), psi=frechet_psi)
