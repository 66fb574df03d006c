import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.psi import PsiFunction


LaplaceKind = Literal["exponential", "gamma", "degenerate"]


class LaplaceTransformSpec(BaseModel):
    """
    Laplace transform of a subordinator at unit time

    exponential: phi(s) = 1/(1+s)           (unit mean exponential)
    gamma:       phi(s) = (1+s)^-beta       (unit scale, shape beta)
    degenerate:  phi(s) = exp(-s)           (T(t) = t)
    """
    model_config = ConfigDict(frozen=True)

    kind: LaplaceKind
    beta: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _check_beta(self) -> "LaplaceTransformSpec":
        if self.kind == "exponential" and self.beta != 1.0:
            raise ValueError("exponential transform has beta = 1; use kind 'gamma'")
        return self

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "degenerate"

    def log_evaluate(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.is_degenerate:
            return -s
        return -self.beta * np.log1p(s)

    def evaluate(self, s) -> np.ndarray:
        return np.exp(self.log_evaluate(s))

    def level_from_log(self, log_v) -> np.ndarray:
        """Argument s with log(phi(s)) = log_v, for log_v <= 0"""
        log_v = np.asarray(log_v, dtype=float)
        if self.is_degenerate:
            return -log_v
        with np.errstate(over="ignore"):
            return np.expm1(-log_v / self.beta)

    def log_cofactor(self, s, a: float) -> np.ndarray:
        """log of phi(s) / phi(s/a); at s = inf this is log phi-ratio limit"""
        s = np.asarray(s, dtype=float)
        if self.is_degenerate:
            coef = 1.0 - 1.0 / a
            if coef == 0.0:
                return np.zeros_like(s)
            return -s * coef
        finite = np.isfinite(s)
        safe = np.where(finite, s, 0.0)
        value = self.beta * (np.log1p(safe / a) - np.log1p(safe))
        return np.where(finite, value, -self.beta * math.log(a))

    def cofactor_level_from_log(self, log_v, a: float) -> np.ndarray:
        """Argument s with log(phi(s)/phi(s/a)) = log_v; inf inside the lower atom"""
        log_v = np.asarray(log_v, dtype=float)
        if self.is_degenerate:
            return -log_v / (1.0 - 1.0 / a)
        r = np.exp(log_v / self.beta)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = -np.expm1(log_v / self.beta) / (r - 1.0 / a)
        return np.where(r > 1.0 / a, s, math.inf)


DEGENERATE = LaplaceTransformSpec(kind="degenerate")


class LevelLaw(BaseModel):
    """
    D.f. of the form G(x) = L(psi(x)) with L decreasing from L(0) = 1

    `link` is L, `level_from_log` inverts it in log form.
    """
    model_config = ConfigDict(frozen=True)

    psi: PsiFunction

    def log_link(self, s) -> np.ndarray:
        raise NotImplementedError

    def link(self, s) -> np.ndarray:
        return np.exp(self.log_link(s))

    def level_from_log(self, log_u) -> np.ndarray:
        raise NotImplementedError

    @property
    def atom(self) -> float:
        """Mass at the lower support edge"""
        return float(self.link(math.inf))


class MaxSemiStableDF(LevelLaw):
    """F(x) = exp(-psi(x))"""
    kind: Literal["max_semi_stable"] = "max_semi_stable"

    @property
    def phi(self) -> LaplaceTransformSpec:
        return DEGENERATE

    def log_link(self, s) -> np.ndarray:
        return -np.asarray(s, dtype=float)

    def level_from_log(self, log_u) -> np.ndarray:
        return -np.asarray(log_u, dtype=float)


class PhiMaxSemiStableDF(LevelLaw):
    """G(x) = phi(psi(x))"""
    kind: Literal["phi_max_semi_stable"] = "phi_max_semi_stable"
    phi: LaplaceTransformSpec

    def log_link(self, s) -> np.ndarray:
        return self.phi.log_evaluate(s)

    def level_from_log(self, log_u) -> np.ndarray:
        return self.phi.level_from_log(log_u)


class CofactorDF(LevelLaw):
    """
    Cofactor H(x) = G(x) / G(c x) of a law G = phi(psi)

    With psi(c x) = psi(x) / a_c this is H(x) = phi(psi(x)) / phi(psi(x) / a_c).
    Gamma-type phi leaves an atom a_c^-beta at the lower support edge.
    """
    kind: Literal["cofactor"] = "cofactor"
    phi: LaplaceTransformSpec = DEGENERATE
    c: float = Field(gt=0.0)
    a_c: float = Field(gt=0.0)

    def log_link(self, s) -> np.ndarray:
        return self.phi.log_cofactor(s, self.a_c)

    def level_from_log(self, log_u) -> np.ndarray:
        return self.phi.cofactor_level_from_log(log_u, self.a_c)
