import logging
from typing import List, Sequence

import numpy as np

from models.laws import LaplaceTransformSpec, LevelLaw
from models.paths import ExtremalPath, SubordinatorPath
from models.report import CheckReport, KSReport
from services.corefn import DomainError, psi_levels
from services.distributions import identity_report, log_cdf, quantile_power
from utils.grids import log_grid
from utils.rng import Stream, open_uniform, run_replicates, substream
from utils.stats import DEFAULT_KS_COEFFICIENT, ks_one_sample, ks_two_sample
from utils.validators import validate_time_grid

logger = logging.getLogger(__name__)


def _durations(times: Sequence[float]) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    return np.diff(t, prepend=0.0)


def _require_times(times: Sequence[float], allow_zero: bool) -> None:
    if not validate_time_grid(times, allow_zero=allow_zero):
        first = "t0 >= 0" if allow_zero else "t0 > 0"
        raise DomainError(f"times must be strictly increasing with {first}, got {list(times)}")


def _gamma_increments(rng: np.random.Generator, beta: float, durations: np.ndarray) -> np.ndarray:
    return rng.standard_gamma(beta * durations)


def _subordinator_row(phi: LaplaceTransformSpec, times: np.ndarray,
                      rng: np.random.Generator) -> np.ndarray:
    if phi.is_degenerate:
        return np.asarray(times, dtype=float).copy()
    return np.cumsum(_gamma_increments(rng, phi.beta, _durations(times)))


def _ep_chunk(F: LevelLaw, durations: np.ndarray, seed: int, stream: int,
              start: int, stop: int) -> np.ndarray:
    u = np.empty((stop - start, durations.size))
    for i, r in enumerate(range(start, stop)):
        u[i] = open_uniform(substream(seed, stream, r), durations.size)
    return np.maximum.accumulate(quantile_power(F, u, durations[None, :]), axis=1)


def simulate_ep_paths(
    F: LevelLaw,
    times: Sequence[float],
    replicates: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = 2500,
    stream: int = Stream.EP,
    progress: bool = False
) -> np.ndarray:
    """
    Extremal process with homogeneous max-increments observed on a time grid

    Y(t0) ~ F^t0 and Y(t_k) = Y(t_{k-1}) v Z_k with Z_k ~ F^(t_k - t_{k-1}).

    Args:
        F: Law of Y(1)
        times: Strictly increasing, t0 > 0
        replicates: Number of independent paths
        seed: Base seed; replicate r uses substream (seed, stream, r)
        workers: Thread pool size
        chunk_size: Replicates per pool task
        stream: Substream family
        progress: Show a progress bar

    Returns:
        (replicates, len(times)) array of nondecreasing rows

    Raises:
        DomainError: On a non-increasing grid or t0 <= 0
    """
    _require_times(times, allow_zero=False)
    durations = _durations(times)

    def chunk(start: int, stop: int) -> np.ndarray:
        return _ep_chunk(F, durations, seed, stream, start, stop)

    logger.info(f"Simulating {replicates} extremal paths on {durations.size} time points")
    return run_replicates(chunk, replicates, chunk_size, workers, progress, desc="ep paths")


def simulate_ep_path(F: LevelLaw, times: Sequence[float], seed: int,
                     replicate: int = 0) -> ExtremalPath:
    """Single extremal path; identical to row `replicate` of simulate_ep_paths"""
    _require_times(times, allow_zero=False)
    values = _ep_chunk(F, _durations(times), seed, Stream.EP, replicate, replicate + 1)[0]
    return ExtremalPath(times=list(times), values=values.tolist(), lower_edge=F.psi.lower_edge)


def simulate_subordinator_paths(
    phi: LaplaceTransformSpec,
    times: Sequence[float],
    replicates: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = 2500
) -> np.ndarray:
    """
    Subordinator with Laplace transform phi^t on a time grid

    Gamma (and exponential) increments over (s, t] are Gamma(beta*(t-s), 1);
    the degenerate transform gives T(t) = t.
    """
    _require_times(times, allow_zero=True)
    t = np.asarray(times, dtype=float)

    def chunk(start: int, stop: int) -> np.ndarray:
        return np.vstack([
            _subordinator_row(phi, t, substream(seed, Stream.SUBORDINATOR, r))
            for r in range(start, stop)
        ])

    return run_replicates(chunk, replicates, chunk_size, workers, desc="subordinator")


def simulate_gamma_subordinator(beta: float, times: Sequence[float], seed: int,
                                replicate: int = 0) -> SubordinatorPath:
    """
    Gamma subordinator path, E[T(t)] = beta * t

    Raises:
        DomainError: On an invalid grid or beta <= 0
    """
    if not beta > 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    _require_times(times, allow_zero=True)
    phi = LaplaceTransformSpec(kind="gamma", beta=beta)
    values = _subordinator_row(phi, np.asarray(times, dtype=float),
                               substream(seed, Stream.SUBORDINATOR, replicate))
    return SubordinatorPath(times=list(times), values=values.tolist())


def _compound_chunk(F: LevelLaw, phi: LaplaceTransformSpec, times: np.ndarray,
                    seed: int, start: int, stop: int) -> np.ndarray:
    elapsed = np.empty((stop - start, times.size))
    u = np.empty_like(elapsed)
    for i, r in enumerate(range(start, stop)):
        clock = _subordinator_row(phi, times, substream(seed, Stream.SUBORDINATOR, r))
        elapsed[i] = np.diff(clock, prepend=0.0)
        u[i] = open_uniform(substream(seed, Stream.COMPOUND, r), times.size)
    return np.maximum.accumulate(quantile_power(F, u, elapsed), axis=1)


def simulate_compound_ep_paths(
    F: LevelLaw,
    phi: LaplaceTransformSpec,
    times: Sequence[float],
    replicates: int,
    seed: int,
    workers: int = 1,
    chunk_size: int = 2500,
    progress: bool = False
) -> np.ndarray:
    """
    Compound extremal process X(t) = Y(T(t))

    Draws the subordinator path, then a max-increment of law F^(T(t_k) - T(t_{k-1}))
    over each interval. A zero subordinator increment leaves X unchanged.

    Returns:
        (replicates, len(times)) array
    """
    _require_times(times, allow_zero=True)
    t = np.asarray(times, dtype=float)

    def chunk(start: int, stop: int) -> np.ndarray:
        return _compound_chunk(F, phi, t, seed, start, stop)

    logger.info(f"Simulating {replicates} compound paths ({phi.kind}) on {t.size} time points")
    return run_replicates(chunk, replicates, chunk_size, workers, progress, desc="compound paths")


def simulate_compound_ep(F: LevelLaw, phi: LaplaceTransformSpec, times: Sequence[float],
                         seed: int, replicate: int = 0) -> ExtremalPath:
    """Single compound path; identical to row `replicate` of simulate_compound_ep_paths"""
    _require_times(times, allow_zero=True)
    t = np.asarray(times, dtype=float)
    values = _compound_chunk(F, phi, t, seed, replicate, replicate + 1)[0]
    return ExtremalPath(times=list(times), values=values.tolist(), lower_edge=F.psi.lower_edge)


def compound_cdf_analytic(phi: LaplaceTransformSpec, F: LevelLaw, t: float, x):
    """
    P{X(t) <= x} = phi(-ln F(x))^t

    Raises:
        DomainError: If t <= 0
    """
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    with np.errstate(divide="ignore"):
        exponent = -log_cdf(F, x)
    values = np.exp(t * phi.log_evaluate(exponent))
    return float(values) if np.ndim(values) == 0 else values


def compound_semi_sd_check(phi: LaplaceTransformSpec, F: LevelLaw, t: float,
                           grid_size: int = 1024, tol: float = 1e-12) -> CheckReport:
    """
    The compound marginal factorizes over the law's own b:
    phi(psi(x))^t = phi(psi(bx))^t * phi0(psi(x))^t with phi0(s) = phi(s)/phi(s/a)
    """
    psi = F.psi
    x = log_grid(psi, grid_size)
    levels = psi_levels(psi, x)
    cofactor = np.exp(t * phi.log_cofactor(levels, psi.a))
    gap = np.abs(
        compound_cdf_analytic(phi, F, t, x) - compound_cdf_analytic(phi, F, t, psi.b * x) * cofactor
    )
    return identity_report("compound-semi-sd", "compound-law", gap, tol, t=t)


def power_cdf(F: LevelLaw, t: float):
    """Vectorized d.f. F^t"""
    def G(x):
        return np.exp(t * log_cdf(F, x))
    return G


def marginal_reports(paths: np.ndarray, times: Sequence[float], cdf_at,
                     coefficient: float = DEFAULT_KS_COEFFICIENT) -> List[KSReport]:
    """One-sample KS of each time column against cdf_at(t)"""
    return [
        ks_one_sample(paths[:, k], cdf_at(t), coefficient)
        for k, t in enumerate(times)
    ]


def self_similarity_check(
    F: LevelLaw,
    b: float,
    t: float,
    n: int,
    seed: int,
    coefficient: float = DEFAULT_KS_COEFFICIENT
) -> KSReport:
    """
    Two-sample test of Y(bt) against b^H Y(t), H = 1/alpha (frechet) or
    -1/alpha (weibull)

    Holds for every b > 0 when h is constant and for b = a^k otherwise.

    Args:
        F: Law of Y(1)
        b: Time scale factor, > 0
        t: Base time, > 0
        n: Draws per side
        seed: Base seed (the two sides use independent substreams)
        coefficient: KS critical coefficient

    Returns:
        KSReport with threshold coefficient*sqrt(2/n)
    """
    if not b > 0.0 or not t > 0.0:
        raise DomainError(f"b and t must be positive, got b={b}, t={t}")
    H = -F.psi.sign / F.psi.alpha
    scaled_time = simulate_ep_paths(F, [b * t], n, seed, stream=Stream.SELF_SIM_SCALED)[:, 0]
    base = simulate_ep_paths(F, [t], n, seed, stream=Stream.SELF_SIM_BASE)[:, 0]
    report = ks_two_sample(scaled_time, b ** H * base, coefficient)
    logger.info(f"Self-similarity b={b:.6g}: KS {report.statistic:.4f} (threshold {report.threshold:.4f})")
    return report
