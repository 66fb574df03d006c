import os
import logging
from pathlib import Path
from typing import List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def validate_file_exists(file_path: str) -> bool:
    """Check if file exists"""
    return os.path.exists(file_path) and os.path.isfile(file_path)


def ensure_directory(dir_path: str) -> None:
    """Create directory if it doesn't exist"""
    os.makedirs(dir_path, exist_ok=True)


def validate_config_format(file_path: str, supported_formats: List[str]) -> bool:
    """
    Validate scenario file format

    Args:
        file_path: Path to scenario file
        supported_formats: List of supported extensions (e.g., ['json', 'yml'])

    Returns:
        True if format is supported
    """
    ext = Path(file_path).suffix.lower().lstrip('.')
    return ext in [fmt.lower() for fmt in supported_formats]


def validate_time_grid(times: Sequence[float], allow_zero: bool = True) -> bool:
    """
    Validate a simulation time grid

    Args:
        times: Observation times
        allow_zero: Whether the first time may be 0

    Returns:
        True if times are nonempty, finite, strictly increasing and start
        at t >= 0 (t > 0 when allow_zero is False)
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or not np.all(np.isfinite(t)):
        return False
    if t[0] < 0.0 or (not allow_zero and t[0] == 0.0):
        return False
    return bool(np.all(np.diff(t) > 0.0))


def validate_probability(p: float) -> bool:
    """Validate p lies strictly between 0 and 1"""
    return 0.0 < p < 1.0
