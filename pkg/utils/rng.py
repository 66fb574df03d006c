import logging
from concurrent.futures import ThreadPoolExecutor
from enum import IntEnum
from typing import Callable, List, Tuple

import numpy as np
from tqdm import tqdm

logger = logging.getLogger(__name__)

_UNIT = 2.0 ** -53


class Stream(IntEnum):
    """Independent substream families; a draw is keyed by (seed, stream, replicate)"""
    SAMPLE = 0
    EP = 1
    SUBORDINATOR = 2
    COMPOUND = 3
    AR = 4
    SELF_SIM_BASE = 5
    SELF_SIM_SCALED = 6
    GEOMETRIC = 7
    CLOSURE = 8


def substream(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Counter-based Philox generator for one (seed, stream, index) triple"""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.Philox(seq))


def open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms strictly inside (0, 1)"""
    return (rng.integers(0, 2 ** 53, size=size, dtype=np.int64) + 0.5) * _UNIT


def uniform_rows(seed: int, stream: int, start: int, stop: int, width: int) -> np.ndarray:
    """Row r holds `width` open uniforms from replicate start + r's substream"""
    rows = np.empty((stop - start, width))
    for r, index in enumerate(range(start, stop)):
        rows[r] = open_uniform(substream(seed, stream, index), width)
    return rows


def chunk_bounds(replicates: int, chunk_size: int) -> List[Tuple[int, int]]:
    chunk_size = max(1, int(chunk_size))
    return [(s, min(s + chunk_size, replicates)) for s in range(0, replicates, chunk_size)]


def run_replicates(
    fn: Callable[[int, int], np.ndarray],
    replicates: int,
    chunk_size: int = 2500,
    workers: int = 1,
    progress: bool = False,
    desc: str = "replicates"
) -> np.ndarray:
    """
    Evaluate fn(start, stop) over replicate chunks and stack the results

    Each chunk only depends on its replicate indices, so the output is
    identical for any worker count or chunk size.

    Args:
        fn: Returns an array whose first axis runs over replicates start..stop-1
        replicates: Total number of replicates
        chunk_size: Replicates per task
        workers: Thread pool size (1 runs inline)
        progress: Show a tqdm progress bar
        desc: Progress bar label

    Returns:
        Concatenated array ordered by replicate index
    """
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")

    bounds = chunk_bounds(replicates, chunk_size)
    logger.debug(f"Running {replicates} {desc} in {len(bounds)} chunks on {workers} worker(s)")

    if workers <= 1 or len(bounds) == 1:
        parts = [fn(s, e) for s, e in tqdm(bounds, desc=desc, disable=not progress)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, s, e) for s, e in bounds]
            parts = [f.result() for f in tqdm(futures, desc=desc, disable=not progress)]

    return np.concatenate(parts, axis=0)
