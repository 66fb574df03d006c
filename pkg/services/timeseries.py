import logging
from typing import List, Optional, Sequence, Union

import numpy as np

from models.laws import CofactorDF, MaxSemiStableDF, PhiMaxSemiStableDF
from models.report import CheckpointResult, CheckReport, KSReport, StationarityReport
from models.scenario import MaxAR1Config
from services.corefn import DomainError
from services.distributions import (
    cdf,
    identity_report,
    quantile_power,
    semi_sd_cofactor_df,
)
from utils.grids import log_grid
from utils.rng import Stream, open_uniform, run_replicates, substream, uniform_rows
from utils.stats import DEFAULT_KS_COEFFICIENT, ks_one_sample, ks_two_sample
from utils.validators import validate_probability

logger = logging.getLogger(__name__)

Marginal = Union[MaxSemiStableDF, PhiMaxSemiStableDF]

MIN_STATIONARITY_REPLICATES = 100
PARAMETER_MATCH_TOL = 1e-9


def innovation_law(marginal: Marginal, rho: float) -> CofactorDF:
    """
    Innovation d.f. F(x) / F(x/rho) of a max-AR(1) with the given marginal

    Raises:
        DomainError: If 1/rho has no scaling exponent for the marginal
        InvalidCofactor: If the marginal is not max-semi-SD(1/rho)
    """
    H, _ = semi_sd_cofactor_df(marginal, 1.0 / rho)
    return H


def _initial_values(cfg: MaxAR1Config, marginal: Marginal, u0: np.ndarray) -> np.ndarray:
    if cfg.init == "fixed":
        return np.full(u0.shape, float(cfg.x0))
    return quantile_power(marginal, u0)


def simulate_max_ar1(
    cfg: MaxAR1Config,
    marginal: Marginal,
    replicates: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = 2500,
    progress: bool = False
) -> np.ndarray:
    """
    Max-AR(1) series X_n = rho X_{n-1} v eps_n

    The innovation law is the cofactor of the marginal at scale 1/rho, so the
    marginal is preserved from an initial draw of the marginal itself. Rho > 1
    (explosive) pairs with weibull marginals whose b = 1/rho.

    Args:
        cfg: Recursion settings (rho, length, init)
        marginal: Max-semi-stable or phi-max-semi-stable law
        replicates: Number of independent series
        seed: Base seed; replicate r uses substream (seed, AR, r)
        workers: Thread pool size
        chunk_size: Replicates per pool task
        progress: Show a progress bar

    Returns:
        (replicates, length + 1) array, column n holding X_n

    Raises:
        DomainError, InvalidCofactor: If no innovation law exists for rho
    """
    H = innovation_law(marginal, cfg.rho)
    width = cfg.length + 1

    def chunk(start: int, stop: int) -> np.ndarray:
        u = uniform_rows(seed, Stream.AR, start, stop, width)
        eps = quantile_power(H, u[:, 1:])
        series = np.empty((stop - start, width))
        series[:, 0] = _initial_values(cfg, marginal, u[:, 0])
        for n in range(1, width):
            series[:, n] = np.maximum(cfg.rho * series[:, n - 1], eps[:, n - 1])
        return series

    logger.info(
        f"Simulating {replicates} max-AR(1) series: rho={cfg.rho:g}, length={cfg.length}, "
        f"init={cfg.init}"
    )
    return run_replicates(chunk, replicates, chunk_size, workers, progress, desc="max-ar1")


def _require_modified_marginal(marginal: Marginal, rho: float, p: Optional[float]) -> float:
    if p is None or not validate_probability(p):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if not isinstance(marginal, PhiMaxSemiStableDF) or marginal.phi.kind != "exponential":
        raise DomainError("modified max-AR(1) needs an exponential max-semi-stable marginal")
    psi = marginal.psi
    if abs(psi.a * p - 1.0) > PARAMETER_MATCH_TOL:
        raise DomainError(f"marginal a={psi.a:g} must equal 1/p={1.0 / p:g}")
    if abs(psi.b * rho - 1.0) > PARAMETER_MATCH_TOL:
        raise DomainError(f"marginal b={psi.b:g} must equal 1/rho={1.0 / rho:g}")
    return p


def simulate_modified_max_ar1(
    cfg: MaxAR1Config,
    marginal: PhiMaxSemiStableDF,
    replicates: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = 2500,
    progress: bool = False
) -> np.ndarray:
    """
    Modified max-AR(1): X_n = rho X_{n-1} with probability p, else
    rho X_{n-1} v eps_n with eps_n distributed as the marginal

    Each step consumes two uniforms from the replicate's substream, the
    selection draw first, then the innovation.

    Raises:
        DomainError: If p is outside (0, 1) or the marginal is not
            exponential max-semi-stable with a = 1/p and b = 1/rho
    """
    p = _require_modified_marginal(marginal, cfg.rho, cfg.p)
    width = cfg.length + 1

    def chunk(start: int, stop: int) -> np.ndarray:
        u = uniform_rows(seed, Stream.AR, start, stop, 1 + 2 * cfg.length)
        keep = u[:, 1::2] < p
        eps = quantile_power(marginal, u[:, 2::2])
        series = np.empty((stop - start, width))
        series[:, 0] = _initial_values(cfg, marginal, u[:, 0])
        for n in range(1, width):
            carried = cfg.rho * series[:, n - 1]
            series[:, n] = np.where(keep[:, n - 1], carried, np.maximum(carried, eps[:, n - 1]))
        return series

    logger.info(
        f"Simulating {replicates} modified max-AR(1) series: rho={cfg.rho:g}, p={p:g}, "
        f"length={cfg.length}"
    )
    return run_replicates(chunk, replicates, chunk_size, workers, progress, desc="max-ar1-mod")


def geometric_max_sampler(F: PhiMaxSemiStableDF, p: float, c: float, n: int,
                          seed: int) -> np.ndarray:
    """
    Draws of max(X_1, ..., X_N) / c with N geometric on {1, 2, ...}

    For an exponential max-semi-stable law with a = 1/p and b = c the output
    is again distributed as F. The maximum of N draws is sampled directly
    from F^N.

    Raises:
        DomainError: If p is outside (0, 1], c <= 0 or n < 1
    """
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    if not c > 0.0:
        raise DomainError(f"c must be positive, got {c}")
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    rng = substream(seed, Stream.GEOMETRIC)
    counts = rng.geometric(p, size=n)
    u = open_uniform(rng, n)
    return quantile_power(F, u, counts.astype(float)) / c


def stationarity_report(
    series: np.ndarray,
    marginal: Marginal,
    checkpoints: Sequence[int],
    coefficient: float = DEFAULT_KS_COEFFICIENT
) -> StationarityReport:
    """
    One-sample KS of the cross-replicate slice X_n against the marginal at
    each checkpoint n

    Raises:
        DomainError: With fewer than 100 replicates or a checkpoint outside the series
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 2 or series.shape[0] < MIN_STATIONARITY_REPLICATES:
        raise DomainError(
            f"stationarity needs at least {MIN_STATIONARITY_REPLICATES} replicates, "
            f"got shape {series.shape}"
        )

    def G(x):
        return cdf(marginal, x)

    results: List[CheckpointResult] = []
    for index in checkpoints:
        if not 0 <= index < series.shape[1]:
            raise DomainError(f"checkpoint {index} outside [0, {series.shape[1] - 1}]")
        ks = ks_one_sample(series[:, index], G, coefficient)
        logger.debug(f"checkpoint {index}: KS {ks.statistic:.4f} (threshold {ks.threshold:.4f})")
        results.append(CheckpointResult(index=index, ks=ks))

    report = StationarityReport(checkpoints=results)
    if not report.passed:
        failed = [cp.index for cp in results if not cp.ks.passed]
        logger.warning(f"Marginal stationarity fails at checkpoints {failed}")
    return report


def ar_identity_check(marginal: Marginal, rho: float, grid_size: int = 1024,
                      tol: float = 1e-12) -> CheckReport:
    """|F(x) - F(x/rho) F_eps(x)| on the three-period log grid"""
    H = innovation_law(marginal, rho)
    x = log_grid(marginal.psi, grid_size)
    gap = np.abs(cdf(marginal, x) - cdf(marginal, x / rho) * cdf(H, x))
    return identity_report("ar1-identity", "max-ar1", gap, tol, rho=rho, atom=H.atom)


def one_step_closure(
    marginal: Marginal,
    rho: float,
    n: int,
    seed: int,
    p: Optional[float] = None,
    coefficient: float = DEFAULT_KS_COEFFICIENT
) -> KSReport:
    """
    Two-sample KS between one recursion step applied to marginal draws and
    fresh marginal draws

    Without p the step is rho X v eps with eps from the cofactor innovation;
    with p it is the modified step with marginal innovations.
    """
    rng = substream(seed, Stream.CLOSURE)
    X = quantile_power(marginal, open_uniform(rng, n))
    if p is None:
        eps = quantile_power(innovation_law(marginal, rho), open_uniform(rng, n))
        stepped = np.maximum(rho * X, eps)
    else:
        _require_modified_marginal(marginal, rho, p)
        keep = open_uniform(rng, n) < p
        eps = quantile_power(marginal, open_uniform(rng, n))
        stepped = np.where(keep, rho * X, np.maximum(rho * X, eps))
    fresh = quantile_power(marginal, open_uniform(rng, n))
    report = ks_two_sample(stepped, fresh, coefficient)
    scheme = "modified" if p is not None else "standard"
    logger.info(f"One-step closure ({scheme}, rho={rho:g}): KS {report.statistic:.4f}")
    return report
