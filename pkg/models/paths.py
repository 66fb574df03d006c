from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


class GridPath(BaseModel):
    """Nondecreasing step path observed on a strictly increasing time grid"""
    model_config = ConfigDict(frozen=True)

    times: List[float]
    values: List[float]

    @model_validator(mode="after")
    def _check_grid(self) -> "GridPath":
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have the same length")
        if not self.times:
            raise ValueError("path must have at least one time point")
        t = np.asarray(self.times)
        if t[0] < 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be nonnegative and strictly increasing")
        if np.any(np.diff(np.asarray(self.values)) < 0.0):
            raise ValueError("path values must be nondecreasing")
        return self

    def value_at(self, t: float) -> float:
        """Right-continuous step interpolation"""
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        if idx < 0:
            raise ValueError(f"t={t} precedes the first grid time {self.times[0]}")
        return self.values[idx]


class ExtremalPath(GridPath):
    """Path of an extremal process Y(t) (or a compound one, Y(T(t)))"""
    lower_edge: float = 0.0

    @model_validator(mode="after")
    def _check_support(self) -> "ExtremalPath":
        if np.any(np.asarray(self.values) < self.lower_edge):
            raise ValueError(f"path values must not fall below {self.lower_edge}")
        return self


class SubordinatorPath(GridPath):
    """Path of a nonnegative subordinator T(t)"""

    @model_validator(mode="after")
    def _check_origin(self) -> "SubordinatorPath":
        if np.any(np.asarray(self.values) < 0.0):
            raise ValueError("subordinator values must be nonnegative")
        if self.times[0] == 0.0 and self.values[0] != 0.0:
            raise ValueError("subordinator must start at T(0) = 0")
        return self
