import logging
from typing import Callable

import numpy as np
from scipy import stats

from models.report import CMReport, KSReport, MonotoneReport, OrderResult

logger = logging.getLogger(__name__)

# Asymptotic Kolmogorov critical coefficients c(level): reject when D > c / sqrt(n_eff)
KS_COEFFICIENTS = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63, 0.001: 1.95}
DEFAULT_KS_COEFFICIENT = KS_COEFFICIENTS[0.05]

CM_MIN_GRID = 64
CM_MAX_ORDER = 8


class EmptyInput(ValueError):
    """Custom exception for statistics on empty samples"""
    pass


def _as_samples(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInput("samples must be nonempty")
    return arr


def ecdf(samples, x):
    """Fraction of samples <= x (vectorized over x)"""
    arr = np.sort(_as_samples(samples))
    result = np.searchsorted(arr, x, side="right") / arr.size
    return float(result) if np.ndim(result) == 0 else result


def ks_one_sample(samples, cdf: Callable, coefficient: float = DEFAULT_KS_COEFFICIENT) -> KSReport:
    """
    One-sample KS distance sup|ECDF - cdf| with threshold coefficient/sqrt(n)

    Args:
        samples: Draws to test
        cdf: Vectorized reference d.f.
        coefficient: Critical coefficient (1.36 is the 5% level)

    Returns:
        KSReport
    """
    arr = _as_samples(samples)
    statistic = float(stats.kstest(arr, cdf).statistic)
    threshold = coefficient / np.sqrt(arr.size)
    return KSReport(
        statistic=statistic,
        n=arr.size,
        threshold=float(threshold),
        passed=statistic < threshold
    )


def ks_two_sample(first, second, coefficient: float = DEFAULT_KS_COEFFICIENT) -> KSReport:
    """Two-sample KS distance with threshold coefficient*sqrt((n+m)/(n*m))"""
    x = _as_samples(first)
    y = _as_samples(second)
    statistic = float(stats.ks_2samp(x, y).statistic)
    threshold = coefficient * np.sqrt((x.size + y.size) / (x.size * y.size))
    return KSReport(
        statistic=statistic,
        n=x.size,
        m=y.size,
        threshold=float(threshold),
        passed=statistic < threshold
    )


def monotone_df_check(
    G: Callable,
    grid,
    atom_ok: bool = False,
    tol: float = 1e-12
) -> MonotoneReport:
    """
    Check that G behaves as a d.f. on a sorted, support-spanning grid

    Counts adjacent decreases beyond tol and checks G(grid_min) <= 0.01,
    G(grid_max) >= 0.99 and 0 <= G <= 1. With atom_ok the lower limit may
    be any value below 1 (mass at the lower support edge).

    Args:
        G: Vectorized function under test
        grid: Sorted evaluation points
        atom_ok: Allow an atom at the lower edge
        tol: Slack for rounding

    Returns:
        MonotoneReport
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0.0):
        raise ValueError("grid must be sorted")

    with np.errstate(over="ignore", invalid="ignore"):
        values = np.asarray(G(grid), dtype=float)

    finite = np.all(np.isfinite(values))
    violations = int(np.count_nonzero(np.diff(values) < -tol)) if finite else int(values.size)
    lower = float(values[0])
    upper = float(values[-1])

    in_unit = finite and values.min() >= -tol and values.max() <= 1.0 + tol
    lower_ok = lower < 1.0 if atom_ok else lower <= 0.01
    limits_ok = bool(in_unit and lower_ok and upper >= 0.99)
    non_degenerate = bool(finite and np.ptp(values) > tol)

    if violations or not limits_ok or not non_degenerate:
        logger.debug(
            f"d.f. check failed: {violations} decreases, limits [{lower:.3g}, {upper:.3g}], "
            f"non-degenerate={non_degenerate}"
        )

    return MonotoneReport(
        violations=violations,
        limits_ok=limits_ok,
        non_degenerate=non_degenerate,
        lower=lower,
        upper=upper
    )


def cm_proxy(
    phi0: Callable,
    s_grid,
    max_order: int = CM_MAX_ORDER,
    tol: float = 1e-10
) -> CMReport:
    """
    Complete-monotonicity proxy: (-1)^k * Delta_h^k phi0(s) >= -tol

    At each geometric grid point s_i the step is the local gap
    h_i = s_{i+1} - s_i, so every difference uses a uniform step.

    Args:
        phi0: Vectorized function on s >= 0
        s_grid: Geometric grid with at least 64 points
        max_order: Highest difference order, at most 8
        tol: Rounding slack

    Returns:
        CMReport with one entry per order 0..max_order
    """
    s = np.asarray(s_grid, dtype=float)
    if s.size < CM_MIN_GRID:
        raise ValueError(f"s_grid needs at least {CM_MIN_GRID} points, got {s.size}")
    if not 0 <= max_order <= CM_MAX_ORDER:
        raise ValueError(f"max_order must be in [0, {CM_MAX_ORDER}], got {max_order}")

    steps = np.diff(s)
    nodes = s[:-1, None] + steps[:, None] * np.arange(max_order + 1)
    values = np.asarray(phi0(nodes), dtype=float)

    orders = []
    for k in range(max_order + 1):
        delta = np.diff(values, n=k, axis=1)[:, 0] if k else values[:, 0]
        signed = (-1.0) ** k * delta
        min_value = float(signed.min())
        orders.append(OrderResult(order=k, min_value=min_value, passed=min_value >= -tol))

    return CMReport(orders=orders)
