from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class Report(BaseModel):
    """Base for JSON reports; `passed` serializes as "pass\""""
    model_config = ConfigDict(populate_by_name=True)

    def to_json_dict(self) -> dict:
        return self.model_dump(by_alias=True, mode="json")


class KSReport(Report):
    """Kolmogorov-Smirnov distance against a reference d.f. or a second sample"""
    statistic: float = Field(ge=0.0, le=1.0)
    n: int
    m: Optional[int] = None
    threshold: float
    passed: bool = Field(alias="pass")


class ScalingReport(Report):
    max_rel_err: float
    tol: float
    passed: bool = Field(alias="pass")


class ConstancyReport(Report):
    """Periodicity of h under two periods and the resulting constancy verdict"""
    is_constant: bool
    spread: float
    t1_violation: float
    t2_violation: float
    ratio_rational: bool
    applies: bool


class MonotoneReport(Report):
    violations: int
    limits_ok: bool
    non_degenerate: bool
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.limits_ok and self.non_degenerate


class OrderResult(Report):
    order: int
    min_value: float
    passed: bool = Field(alias="pass")


class CMReport(Report):
    """Per-order outcome of the alternating finite-difference proxy"""
    orders: List[OrderResult]

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.orders)

    def first_failure(self) -> Optional[int]:
        for o in self.orders:
            if not o.passed:
                return o.order
        return None


class CheckReport(Report):
    """One entry of a verification run"""
    check: str
    anchor: str
    max_err: float
    tol: float
    passed: bool = Field(alias="pass")
    detail: Dict[str, object] = {}


class CheckpointResult(Report):
    index: int
    ks: KSReport


class StationarityReport(Report):
    checkpoints: List[CheckpointResult]

    @property
    def passed(self) -> bool:
        return all(cp.ks.passed for cp in self.checkpoints)
