import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


Branch = Literal["frechet", "weibull"]

# Dense validation grid used by every h / psi constructor
GRID_POINTS_PER_PERIOD = 4096
IDENTITY_TOL = 1e-12


class Harmonic(BaseModel):
    """Single sine term of the periodic level, relative to the base level"""
    model_config = ConfigDict(frozen=True)

    amplitude: float
    phase: float = Field(default=0.0, ge=0.0, lt=2 * math.pi)


class PeriodicLevel(BaseModel):
    """
    Positive bounded periodic function

        h(u) = base * (1 + sum_k amp_k * sin(2*pi*k*u / period + phase_k))

    The k-th harmonic (k = 1, 2, ...) has frequency k / period. No harmonics
    gives the constant level of the max-stable case.
    """
    model_config = ConfigDict(frozen=True)

    base: float = Field(gt=0.0)
    harmonics: List[Harmonic] = []
    period: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _check_positive_periodic(self) -> "PeriodicLevel":
        u = self.period_grid()
        values = self.values(u)
        if not np.all(np.isfinite(values)):
            raise ValueError("h must be bounded: non-finite value on the period grid")
        if values.min() <= 0.0:
            raise ValueError(
                f"h must be positive: min over period grid is {values.min():.6g}"
            )
        shifted = self.values(u + self.period)
        drift = float(np.max(np.abs(shifted - values)) / self.base)
        if drift > IDENTITY_TOL:
            raise ValueError(f"h is not periodic to tolerance: drift {drift:.3g}")
        return self

    @property
    def is_constant(self) -> bool:
        return all(hm.amplitude == 0.0 for hm in self.harmonics)

    def period_grid(self, periods: float = 1.0, start: float = 0.0) -> np.ndarray:
        """Dense grid over `periods` periods starting at `start`"""
        count = int(math.ceil(GRID_POINTS_PER_PERIOD * periods))
        return start + np.linspace(0.0, periods * self.period, count, endpoint=False)

    def values(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        total = np.ones_like(u)
        omega = 2.0 * math.pi / self.period
        for k, hm in enumerate(self.harmonics, start=1):
            if hm.amplitude != 0.0:
                total = total + hm.amplitude * np.sin(k * omega * u + hm.phase)
        return self.base * total

    def derivative(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        total = np.zeros_like(u)
        omega = 2.0 * math.pi / self.period
        for k, hm in enumerate(self.harmonics, start=1):
            if hm.amplitude != 0.0:
                total = total + hm.amplitude * k * omega * np.cos(k * omega * u + hm.phase)
        return self.base * total

    def bounds(self) -> Tuple[float, float]:
        """(min, max) of h over the dense period grid"""
        values = self.values(self.period_grid())
        return float(values.min()), float(values.max())


class PsiFunction(BaseModel):
    """
    Exponent function of a max-semi-stable law, F = exp(-psi)

    Frechet branch: psi(x) = x^-alpha * h(ln x) on x > 0, b > 1, a * b^-alpha = 1
    Weibull branch: psi(x) = |x|^alpha * h(ln |x|) on x < 0, 0 < b < 1, a * b^alpha = 1

    In both cases psi(x) = a * psi(b x) and h has period |ln b|.
    """
    model_config = ConfigDict(frozen=True)

    branch: Branch
    alpha: float = Field(gt=0.0)
    a: float = Field(gt=1.0)
    b: float = Field(gt=0.0)
    h: PeriodicLevel

    @model_validator(mode="after")
    def _check_invariants(self) -> "PsiFunction":
        if self.branch == "frechet" and not self.b > 1.0:
            raise ValueError(f"frechet branch requires b > 1, got b={self.b}")
        if self.branch == "weibull" and not 0.0 < self.b < 1.0:
            raise ValueError(f"weibull branch requires 0 < b < 1, got b={self.b}")

        product = self.a * self.b ** (self.sign * self.alpha)
        if abs(product - 1.0) > IDENTITY_TOL:
            relation = "a*b^-alpha" if self.branch == "frechet" else "a*b^alpha"
            raise ValueError(f"{relation} must equal 1, got {product!r}")

        log_b = abs(math.log(self.b))
        if abs(self.h.period - log_b) > IDENTITY_TOL * log_b:
            raise ValueError(
                f"h period {self.h.period!r} must equal |ln b| = {log_b!r}"
            )

        # F must be a d.f.: frechet h' <= alpha*h, weibull h' >= -alpha*h
        u = self.h.period_grid()
        slack = self.alpha * self.h.values(u) + self.sign * self.h.derivative(u)
        if slack.min() < -IDENTITY_TOL * self.h.base:
            condition = "h' <= alpha*h" if self.branch == "frechet" else "h' >= -alpha*h"
            raise ValueError(
                f"exp(-psi) is not monotone: {condition} violated by {-slack.min():.6g}"
            )
        return self

    @property
    def sign(self) -> int:
        """-1 for frechet, +1 for weibull; log psi is increasing in sign * ln|x|"""
        return -1 if self.branch == "frechet" else 1

    @property
    def lower_edge(self) -> float:
        return 0.0 if self.branch == "frechet" else -math.inf

    @property
    def upper_edge(self) -> float:
        return math.inf if self.branch == "frechet" else 0.0

    def in_support(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x > 0.0 if self.branch == "frechet" else x < 0.0

    def single_harmonic_bound(self) -> Optional[float]:
        """
        Closed-form slope margin for one harmonic: alpha - eps*sqrt((2pi/T)^2 + alpha^2)

        Nonnegative is sufficient for monotonicity. None when h has other than
        one nonzero harmonic.
        """
        active = [(k, hm) for k, hm in enumerate(self.h.harmonics, start=1) if hm.amplitude != 0.0]
        if len(active) != 1:
            return None
        k, hm = active[0]
        omega = 2.0 * math.pi * k / self.h.period
        return self.alpha - abs(hm.amplitude) * math.hypot(omega, self.alpha)

    def to_record(self) -> dict:
        return {
            "branch": self.branch,
            "alpha": self.alpha,
            "a": self.a,
            "b": self.b,
            "base": self.h.base,
            "harmonics": [
                {"amplitude": hm.amplitude, "phase": hm.phase} for hm in self.h.harmonics
            ],
            "period": self.h.period,
        }

    @classmethod
    def from_record(cls, record: dict) -> "PsiFunction":
        """
        Build from a flat config record. `alpha` may be omitted and is then
        derived from (a, b); `period` may be omitted and is derived as |ln b|.
        """
        branch = record["branch"]
        a = float(record["a"])
        b = float(record["b"])
        alpha = record.get("alpha")
        if alpha is None:
            alpha = alpha_for(a, b, branch)
        period = record.get("period")
        if period is None:
            period = abs(math.log(b))
        h = PeriodicLevel(
            base=record.get("base", 1.0),
            harmonics=record.get("harmonics", []),
            period=period,
        )
        return cls(branch=branch, alpha=alpha, a=a, b=b, h=h)


def alpha_for(a: float, b: float, branch: str) -> float:
    """alpha solving a*b^-alpha = 1 (frechet) or a*b^alpha = 1 (weibull)"""
    if branch == "frechet":
        return math.log(a) / math.log(b)
    return math.log(a) / math.log(1.0 / b)
