import math
import logging
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from models.laws import (
    CofactorDF,
    LaplaceTransformSpec,
    LevelLaw,
    MaxSemiStableDF,
    PhiMaxSemiStableDF,
)
from models.psi import PsiFunction
from models.report import CheckReport, CMReport, MonotoneReport
from services.corefn import DomainError, psi_inverse, psi_levels
from utils.grids import geometric_grid, log_grid
from utils.rng import Stream, open_uniform, substream
from utils.stats import cm_proxy, monotone_df_check

logger = logging.getLogger(__name__)

Law = Union[MaxSemiStableDF, PhiMaxSemiStableDF, CofactorDF]

SUPPORT_LEVEL_HIGH = 1e12
SUPPORT_LEVEL_LOW = 1e-6
POWER_MATCH_TOL = 1e-9


class InvalidCofactor(ValueError):
    """Custom exception for a cofactor that is not a non-degenerate d.f."""

    def __init__(self, message: str, report: Optional[MonotoneReport] = None):
        super().__init__(message)
        self.report = report


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def cdf(F: LevelLaw, x):
    """
    D.f. value L(psi(x)) with the branch conventions off the support

    Frechet laws vanish for x < 0; weibull laws equal 1 for x >= 0.
    """
    x = np.asarray(x, dtype=float)
    values = F.link(psi_levels(F.psi, x))
    if F.psi.branch == "frechet":
        values = np.where(x < 0.0, 0.0, values)
    return _scalar_or_array(values)


def log_cdf(F: LevelLaw, x) -> np.ndarray:
    return F.log_link(psi_levels(F.psi, x))


def quantile_power(F: LevelLaw, u, tau=1.0) -> np.ndarray:
    """
    Quantile of the d.f. F^tau at u, i.e. the x with F(x) = u^(1/tau)

    tau may be an array (one power per draw); tau = 0 returns the lower
    support edge, which contributes nothing to a running maximum.
    """
    log_u = np.log(np.asarray(u, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(np.asarray(tau) > 0.0, log_u / np.asarray(tau, dtype=float), -math.inf)
    levels = F.level_from_log(scaled)
    return psi_inverse(F.psi, levels)


def quantile(F: LevelLaw, u):
    """
    Inverse d.f.

    Raises:
        DomainError: If any u is outside (0, 1)
    """
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError(f"quantile level must lie in (0, 1), got {u}")
    return _scalar_or_array(quantile_power(F, arr, 1.0))


def sample(F: LevelLaw, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws by inverse transform from the seeded sample stream"""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    u = open_uniform(substream(seed, Stream.SAMPLE), n)
    return quantile_power(F, u, 1.0)


def sample_power(F: LevelLaw, tau: float, n: int, seed: int) -> np.ndarray:
    """
    n i.i.d. draws from F^tau, the law of a max-increment over duration tau

    Uses the same stream as `sample`, so tau = 1 reproduces it exactly.
    """
    if not tau > 0.0:
        raise DomainError(f"tau must be positive, got {tau}")
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    u = open_uniform(substream(seed, Stream.SAMPLE), n)
    return quantile_power(F, u, tau)


def support_grid(psi: PsiFunction, size: int = 10_000) -> np.ndarray:
    """Sorted x grid on which psi runs from 1e12 down to 1e-6"""
    levels = np.geomspace(SUPPORT_LEVEL_HIGH, SUPPORT_LEVEL_LOW, size)
    return psi_inverse(psi, levels)


def _power_of_b(psi: PsiFunction, c: float) -> Optional[int]:
    k = math.log(c) / math.log(psi.b)
    nearest = round(k)
    if nearest != 0 and abs(k - nearest) <= POWER_MATCH_TOL:
        return int(nearest)
    return None


def scale_exponent(psi: PsiFunction, c: float) -> float:
    """
    a(c) with psi(c x) = psi(x) / a(c)

    Defined for c = b^k (a(c) = a^k) and, for constant h, every c > 0
    (a(c) = c^alpha frechet, c^-alpha weibull).

    Raises:
        DomainError: For c <= 0, c = 1, or c not a power of b with periodic h
    """
    if not c > 0.0 or c == 1.0:
        raise DomainError(f"scale c must be positive and different from 1, got {c}")
    k = _power_of_b(psi, c)
    if k is not None:
        return psi.a ** k
    if psi.h.is_constant:
        return c ** (-psi.sign * psi.alpha)
    raise DomainError(
        f"c={c} is not an integer power of b={psi.b}; a periodic h admits "
        f"no scaling exponent for it"
    )


def semi_sd_cofactor_df(
    F: Union[MaxSemiStableDF, PhiMaxSemiStableDF],
    c: float,
    grid_size: int = 10_000
) -> Tuple[CofactorDF, MonotoneReport]:
    """
    Cofactor H(x) = F(x) / F(c x) of the max-semi-SD(c) factorization

    For a max-semi-stable F and c = b this is H(x) = F(bx)^(a-1).

    Args:
        F: Max-semi-stable or phi-max-semi-stable law
        c: Scale, b (or an integer power of b; any c > 0 for constant h)
        grid_size: Points of the support grid for the validity check

    Returns:
        (CofactorDF, validity report)

    Raises:
        DomainError: If no scaling exponent exists for c
        InvalidCofactor: If H is not a non-degenerate d.f. (wrong side of 1)
    """
    a_c = scale_exponent(F.psi, c)
    H = CofactorDF(psi=F.psi, phi=F.phi, c=c, a_c=a_c)

    grid = support_grid(F.psi, grid_size)

    def ratio(x):
        return np.exp(log_cdf(F, x) - log_cdf(F, c * x))

    report = monotone_df_check(ratio, grid, atom_ok=not F.phi.is_degenerate)
    if not report.passed:
        logger.warning(f"Cofactor for c={c} is not a d.f.: {report.to_json_dict()}")
        raise InvalidCofactor(
            f"F(x)/F({c}x) is not a non-degenerate d.f.: {report.violations} decreases, "
            f"limits [{report.lower:.3g}, {report.upper:.3g}]",
            report
        )
    logger.debug(f"Cofactor for c={c}: a(c)={a_c:.6g}, atom={H.atom:.3g}")
    return H, report


def lt_eval(phi: LaplaceTransformSpec, s: float) -> float:
    """
    Laplace transform value

    Raises:
        DomainError: If s < 0
    """
    if s < 0.0:
        raise DomainError(f"Laplace transform argument must be >= 0, got {s}")
    return float(phi.evaluate(s))


def lt_semi_sd_cofactor(
    phi: LaplaceTransformSpec,
    c: float,
    s_grid: Optional[np.ndarray] = None,
    max_order: int = 8
) -> Tuple[Callable, CMReport]:
    """
    Cofactor phi0(s) = phi(s) / phi(c s) and its complete-monotonicity proxy

    Args:
        phi: Laplace transform
        c: Scale in (0, 1)
        s_grid: Geometric grid (default 128 points on [1e-3, 1e3])
        max_order: Highest finite-difference order

    Returns:
        (phi0, CMReport)
    """
    if not 0.0 < c < 1.0:
        raise DomainError(f"semi-SD scale must lie in (0, 1), got {c}")
    if s_grid is None:
        s_grid = geometric_grid(1e-3, 1e3, 128)

    def phi0(s):
        return np.exp(phi.log_cofactor(s, 1.0 / c))

    report = cm_proxy(phi0, s_grid, max_order=max_order)
    if not report.passed:
        logger.warning(f"phi0 for c={c} fails the CM proxy at order {report.first_failure()}")
    return phi0, report


def compose_phi_max(phi: LaplaceTransformSpec, psi: PsiFunction) -> PhiMaxSemiStableDF:
    """G(x) = phi(psi(x))"""
    return PhiMaxSemiStableDF(phi=phi, psi=psi)


def exp_max_semi_stable(psi: PsiFunction) -> PhiMaxSemiStableDF:
    """F(x) = 1 / (1 + psi(x))"""
    return compose_phi_max(LaplaceTransformSpec(kind="exponential"), psi)


def identity_report(name: str, anchor: str, gap: np.ndarray, tol: float, **detail) -> CheckReport:
    max_err = float(np.max(gap)) if np.size(gap) else 0.0
    if not np.isfinite(max_err):
        max_err = math.inf
    passed = max_err <= tol
    if not passed:
        logger.warning(f"Check '{name}' fails: max error {max_err:.3g} > {tol:g}")
    return CheckReport(check=name, anchor=anchor, max_err=max_err, tol=tol,
                       passed=passed, detail=detail)


def max_semi_stability_check(F: MaxSemiStableDF, grid_size: int = 1024,
                             tol: float = 1e-12) -> CheckReport:
    """|F(x) - F(bx)^a| over the three-period log grid"""
    psi = F.psi
    x = log_grid(psi, grid_size)
    gap = np.abs(cdf(F, x) - cdf(F, psi.b * x) ** psi.a)
    return identity_report("max-semi-stability", "max-semi-stability", gap, tol)


def cofactor_identity_check(F: Union[MaxSemiStableDF, PhiMaxSemiStableDF], H: CofactorDF,
                            grid_size: int = 1024, tol: float = 1e-12) -> CheckReport:
    """
    |F(x) - F(c x) H(x)| on the log grid; for max-semi-stable F also
    |H(x) - F(c x)^(a(c)-1)|
    """
    x = log_grid(F.psi, grid_size)
    fcx = cdf(F, H.c * x)
    gap = np.abs(cdf(F, x) - fcx * cdf(H, x))
    if isinstance(F, MaxSemiStableDF):
        gap = np.maximum(gap, np.abs(cdf(H, x) - fcx ** (H.a_c - 1.0)))
    return identity_report("cofactor", "cofactor", gap, tol, c=H.c, a_c=H.a_c, atom=H.atom)


def phi_composition_check(G: PhiMaxSemiStableDF, grid_size: int = 1024,
                          tol: float = 1e-12) -> CheckReport:
    """
    |phi(psi(x)) - phi(psi(bx)) * phi0(psi(x))| with phi0 the semi-SD(1/a)
    cofactor of phi; 1/a is b^-alpha (frechet) or b^alpha (weibull)
    """
    psi = G.psi
    x = log_grid(psi, grid_size)
    phi0, _ = lt_semi_sd_cofactor(G.phi, 1.0 / psi.a)
    gap = np.abs(cdf(G, x) - cdf(G, psi.b * x) * phi0(psi_levels(psi, x)))
    return identity_report("phi-composition", "phi-composition", gap, tol)


def geometric_max_identity_check(F: PhiMaxSemiStableDF, p: float, c: float,
                                 grid: Optional[Sequence[float]] = None,
                                 tol: float = 1e-12) -> CheckReport:
    """
    |F(x) - p F(cx) / (1 - (1-p) F(cx))| over the grid

    Args:
        F: Exponential max-semi-stable law
        p: Geometric parameter in (0, 1)
        c: Scale
        grid: Evaluation points (default: three-period log grid)
        tol: Pass threshold

    Returns:
        CheckReport
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if F.phi.kind != "exponential":
        raise DomainError("geometric-max identity needs an exponential max-semi-stable law")
    x = log_grid(F.psi, 1024) if grid is None else np.asarray(grid, dtype=float)
    fcx = cdf(F, c * x)
    gap = np.abs(cdf(F, x) - p * fcx / (1.0 - (1.0 - p) * fcx))
    return identity_report("geometric-max", "geometric-max", gap, tol, p=p, c=c)


def quantile_roundtrip_check(F: LevelLaw, points: Sequence[float],
                             tol: float = 1e-10) -> CheckReport:
    """max |quantile(cdf(x)) - x| / |x| over interior points"""
    x = np.asarray(points, dtype=float)
    back = quantile(F, cdf(F, x))
    gap = np.abs(back - x) / np.abs(x)
    return identity_report("quantile-roundtrip", "quantile", gap, tol)


def quantile_agreement_check(F: LevelLaw, levels: Sequence[float],
                             tol: float = 1e-10) -> CheckReport:
    """Closed form against forced bisection for a constant-h law"""
    u = np.asarray(levels, dtype=float)
    target = F.level_from_log(np.log(u))
    closed = psi_inverse(F.psi, target, method="auto")
    root = psi_inverse(F.psi, target, method="bisect")
    gap = np.abs(closed - root) / np.abs(closed)
    return identity_report("quantile-closed-form", "quantile", gap, tol)


def df_monotone_check(F: LevelLaw, grid_size: int = 10_000) -> CheckReport:
    """Monotonicity and limits of the d.f. on the support grid"""
    report = monotone_df_check(lambda x: cdf(F, x), support_grid(F.psi, grid_size),
                               atom_ok=F.atom > 0.0)
    gap = np.array([0.0 if report.passed else 1.0])
    return identity_report("df-monotone", "df", gap, 0.0, violations=report.violations,
                  lower=report.lower, upper=report.upper)
