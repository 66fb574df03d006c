import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_DIGITS = 17


def format_value(value, digits: int = DEFAULT_DIGITS) -> str:
    """Locale-free float formatting; integers pass through"""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.{digits}g}"


def write_csv(
    path: str,
    header: Sequence[str],
    rows: Iterable[Sequence],
    digits: int = DEFAULT_DIGITS
) -> str:
    """
    Write rows as CSV with '.' decimals and `digits` significant digits

    Returns:
        Path to the written file
    """
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v, digits) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def write_json(path: str, payload) -> str:
    """Write a JSON document with sorted keys for byte-stable output"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote report to {path}")
    return path


def matrix_rows(matrix: np.ndarray, columns: Sequence[float]):
    """Yield (replicate, column label, value) rows of a replicate x column matrix"""
    for r, row in enumerate(matrix):
        for label, value in zip(columns, row):
            yield (r, label, value)
