from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.laws import LaplaceTransformSpec, MaxSemiStableDF, PhiMaxSemiStableDF
from models.psi import PsiFunction


Command = Literal[
    "make-dist",
    "eval",
    "sample",
    "verify",
    "sim-ep",
    "sim-compound-ep",
    "sim-ar1",
    "sim-ar1-mod",
]


class ScenarioError(ValueError):
    """Custom exception for scenario files missing what a command needs"""
    pass


class PsiRecord(BaseModel):
    """Flat config record of a PsiFunction; alpha and period are derived when omitted"""
    model_config = ConfigDict(extra="forbid")

    branch: Literal["frechet", "weibull"]
    a: float
    b: float
    alpha: Optional[float] = None
    base: float = 1.0
    harmonics: List[dict] = []
    period: Optional[float] = None

    def build(self) -> PsiFunction:
        return PsiFunction.from_record(self.model_dump())


class DistributionSpec(BaseModel):
    """psi plus an optional Laplace transform (phi-max-semi-stable law)"""
    model_config = ConfigDict(extra="forbid")

    psi: PsiRecord
    phi: Optional[LaplaceTransformSpec] = None

    def build(self) -> Union[MaxSemiStableDF, PhiMaxSemiStableDF]:
        psi = self.psi.build()
        if self.phi is None:
            return MaxSemiStableDF(psi=psi)
        return PhiMaxSemiStableDF(phi=self.phi, psi=psi)


class EvalSection(BaseModel):
    x: List[float] = []
    u: List[float] = []


class SampleSection(BaseModel):
    n: int = Field(ge=1)
    tau: float = Field(default=1.0, gt=0.0)
    format: Literal["csv", "json"] = "csv"


class ProcessSection(BaseModel):
    times: List[float]
    n: int = Field(ge=1)
    phi: Optional[LaplaceTransformSpec] = None
    self_similarity: List[float] = []


class MaxAR1Config(BaseModel):
    """
    Max-AR(1) scenario: X_n = rho X_{n-1} v eps_n, or the modified scheme
    that keeps rho X_{n-1} with probability p
    """
    model_config = ConfigDict(extra="forbid")

    rho: float = Field(gt=0.0)
    p: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    length: int = Field(default=200, ge=1)
    burn_in: int = Field(default=200, ge=0)
    init: Literal["marginal", "fixed"] = "marginal"
    x0: Optional[float] = None
    checkpoints: Optional[List[int]] = None

    @model_validator(mode="after")
    def _check_init(self) -> "MaxAR1Config":
        if self.init == "fixed" and self.x0 is None:
            raise ValueError("init 'fixed' requires x0")
        for cp in self.checkpoints or []:
            if not 0 <= cp <= self.length:
                raise ValueError(f"checkpoint {cp} outside [0, {self.length}]")
        return self

    def resolved_checkpoints(self) -> List[int]:
        """Configured checkpoints, else {0, burn_in/2, burn_in} clipped to the length"""
        if self.checkpoints is not None:
            return list(self.checkpoints)
        candidates = [0, self.burn_in // 2, self.burn_in]
        return sorted({min(cp, self.length) for cp in candidates})


class ScenarioConfig(BaseModel):
    """One scenario file; each command reads the sections it needs"""
    model_config = ConfigDict(extra="forbid")

    distribution: DistributionSpec
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    eval: Optional[EvalSection] = None
    sample: Optional[SampleSection] = None
    process: Optional[ProcessSection] = None
    ar: Optional[MaxAR1Config] = None
    replicates: int = Field(default=10_000, ge=1)

    def require(self, command: str) -> None:
        """
        Raises:
            ScenarioError: If the section `command` needs is missing
        """
        needed = {
            "eval": "eval",
            "sample": "sample",
            "sim-ep": "process",
            "sim-compound-ep": "process",
            "sim-ar1": "ar",
            "sim-ar1-mod": "ar",
        }.get(command)
        if needed and getattr(self, needed) is None:
            raise ScenarioError(f"command '{command}' needs a '{needed}' section")
        if command == "sim-compound-ep" and self.process.phi is None:
            raise ScenarioError("command 'sim-compound-ep' needs process.phi")
        if command == "sim-ar1-mod" and self.ar.p is None:
            raise ScenarioError("command 'sim-ar1-mod' needs ar.p")
