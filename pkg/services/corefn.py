import math
import logging
from fractions import Fraction

import numpy as np

from models.psi import PeriodicLevel, PsiFunction, alpha_for
from models.report import ConstancyReport, ScalingReport
from utils.grids import log_grid

logger = logging.getLogger(__name__)

BISECTION_ITERATIONS = 200
RATIONAL_MAX_DENOMINATOR = 64
RATIONAL_TOL = 1e-9
CONSTANCY_PERIODS = 3.0


class DomainError(ValueError):
    """Custom exception for arguments outside a branch support or parameter range"""
    pass


def eval_h(h: PeriodicLevel, u):
    """h(u) = base * (1 + sum_k amp_k * sin(2*pi*k*u/T + phase_k))"""
    value = h.values(u)
    return float(value) if np.ndim(value) == 0 else value


def psi_levels(psi: PsiFunction, x) -> np.ndarray:
    """
    Vectorized psi with the d.f. conventions off the support

    Frechet: psi = inf for x <= 0 (F = 0); Weibull: psi = 0 for x >= 0 (F = 1).
    """
    x = np.asarray(x, dtype=float)
    inside = psi.in_support(x)
    magnitude = np.abs(np.where(inside, x, 1.0))
    levels = np.power(magnitude, psi.sign * psi.alpha)
    if not psi.h.is_constant:
        levels = levels * psi.h.values(np.log(magnitude))
    else:
        levels = levels * psi.h.base
    outside = math.inf if psi.branch == "frechet" else 0.0
    return np.where(inside, levels, outside)


def eval_psi(psi: PsiFunction, x: float) -> float:
    """
    Evaluate the exponent function at a point of the branch support

    Raises:
        DomainError: If x is outside the support (x <= 0 frechet, x >= 0 weibull)
    """
    if not bool(psi.in_support(x)):
        support = "x > 0" if psi.branch == "frechet" else "x < 0"
        raise DomainError(f"{psi.branch} psi is defined for {support}, got x={x}")
    return float(psi_levels(psi, x))


def alpha_from_ab(a: float, b: float, branch: str) -> float:
    """
    Index alpha from the scaling pair (a, b)

    Raises:
        DomainError: On a <= 1, or b outside (1, inf) for frechet / (0, 1) for weibull
    """
    if branch not in ("frechet", "weibull"):
        raise DomainError(f"unknown branch: {branch}")
    if not a > 1.0:
        raise DomainError(f"a must exceed 1, got {a}")
    if branch == "frechet" and not b > 1.0:
        raise DomainError(f"frechet branch needs b > 1, got {b}")
    if branch == "weibull" and not 0.0 < b < 1.0:
        raise DomainError(f"weibull branch needs 0 < b < 1, got {b}")
    return alpha_for(a, b, branch)


def _log_psi_gap(psi: PsiFunction, w: np.ndarray, log_level: np.ndarray) -> np.ndarray:
    # log psi at ln|x| = sign * w is alpha * w + ln h(sign * w), increasing in w
    return psi.alpha * w + np.log(psi.h.values(psi.sign * w)) - log_level


def psi_inverse(psi: PsiFunction, level, method: str = "auto",
                iterations: int = BISECTION_ITERATIONS) -> np.ndarray:
    """
    Solve psi(x) = level inside the branch support

    Works in w = -ln x (frechet) or w = ln|x| (weibull), where log psi is
    increasing. Constant h is solved in closed form; otherwise the root is
    bracketed with the scaling relation g(w + T) = g(w) + alpha*T and refined
    by vectorized bisection. Level inf maps to the lower support edge and
    level 0 to the upper one.

    Args:
        psi: Exponent function
        level: Nonnegative target level(s)
        method: 'auto' (closed form when h is constant) or 'bisect'
        iterations: Bisection cap

    Returns:
        x with psi(x) = level, same shape as level
    """
    level = np.asarray(level, dtype=float)
    if np.any(level < 0.0) or np.any(np.isnan(level)):
        raise DomainError("psi levels must be nonnegative")

    interior = np.isfinite(level) & (level > 0.0)
    log_level = np.log(np.where(interior, level, 1.0))
    log_base = math.log(psi.h.base)
    w = (log_level - log_base) / psi.alpha

    if method == "bisect" or (method == "auto" and not psi.h.is_constant):
        period = psi.h.period
        g0 = _log_psi_gap(psi, w, log_level)
        k = np.ceil(np.abs(g0) / (psi.alpha * period))
        lo = np.where(g0 > 0.0, w - k * period, w)
        hi = np.where(g0 > 0.0, w, w + k * period)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            below = _log_psi_gap(psi, mid, log_level) < 0.0
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4.0 * np.spacing(np.maximum(np.abs(lo), np.abs(hi)))):
                break
        w = 0.5 * (lo + hi)
    elif method != "auto":
        raise ValueError(f"unknown method: {method}")

    magnitude = np.exp(psi.sign * w)
    x = magnitude if psi.branch == "frechet" else -magnitude
    x = np.where(level == 0.0, psi.upper_edge, x)
    x = np.where(np.isinf(level), psi.lower_edge, x)
    return x


def check_scaling_identity(psi: PsiFunction, grid_size: int = 1024,
                           tol: float = 1e-12) -> ScalingReport:
    """
    Max relative error of psi(x) - a*psi(b x) over a three-period log grid

    Args:
        psi: Exponent function (may be an unvalidated copy)
        grid_size: Number of grid points, >= 2
        tol: Pass threshold

    Returns:
        ScalingReport
    """
    x = log_grid(psi, grid_size)
    lhs = psi_levels(psi, x)
    rhs = psi.a * psi_levels(psi, psi.b * x)
    max_rel_err = float(np.max(np.abs(lhs - rhs) / lhs))
    passed = max_rel_err <= tol
    if not passed:
        logger.warning(f"Scaling identity fails: max relative error {max_rel_err:.3g} > {tol:g}")
    return ScalingReport(max_rel_err=max_rel_err, tol=tol, passed=passed)


def psi_decrease_violations(psi: PsiFunction, grid_size: int = 4096) -> int:
    """Grid points where psi fails to strictly decrease in x"""
    x = log_grid(psi, grid_size)
    return int(np.count_nonzero(np.diff(psi_levels(psi, x)) >= 0.0))


def constancy_diagnostic(h: PeriodicLevel, T1: float, T2: float,
                         tol: float = 1e-9) -> ConstancyReport:
    """
    Periodicity of h under two periods and, when their ratio is irrational,
    whether h is then constant

    The ratio counts as rational when some p/q with q <= 64 matches it to 1e-9.

    Args:
        h: Periodic level under test
        T1: First period, > 0
        T2: Second period, > 0
        tol: Periodicity / spread tolerance

    Returns:
        ConstancyReport
    """
    if T1 <= 0.0 or T2 <= 0.0:
        raise DomainError(f"periods must be positive, got T1={T1}, T2={T2}")

    # T1 and T2 enter only as shifts of this grid
    u = h.period_grid(periods=CONSTANCY_PERIODS)
    values = h.values(u)
    t1_violation = float(np.max(np.abs(h.values(u + T1) - values)))
    t2_violation = float(np.max(np.abs(h.values(u + T2) - values)))

    ratio = T1 / T2
    approx = Fraction(ratio).limit_denominator(RATIONAL_MAX_DENOMINATOR)
    ratio_rational = abs(float(approx) - ratio) <= RATIONAL_TOL

    spread = float(values.max() - values.min())
    applies = t1_violation <= tol and t2_violation <= tol and not ratio_rational
    logger.debug(
        f"constancy: T1 violation {t1_violation:.3g}, T2 violation {t2_violation:.3g}, "
        f"rational={ratio_rational}, spread {spread:.3g}"
    )
    return ConstancyReport(
        is_constant=spread <= tol,
        spread=spread,
        t1_violation=t1_violation,
        t2_violation=t2_violation,
        ratio_rational=ratio_rational,
        applies=applies
    )
