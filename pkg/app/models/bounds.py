from pydantic import BaseModel, ConfigDict, Field
from typing import List, Optional
from enum import Enum

from app.models.measure import MeasureEstimate
from app.models.polynomial import ScaledPoly


class ChainStepKind(str, Enum):
    DERIVATIVE = "derivative"
    RECIPROCAL_THEN_DERIVATIVE = "reciprocal_then_derivative"
    STRIP = "strip"


class ChainStep(BaseModel):
    """One reduction step; `poly` is the result after removing any z^j factor"""

    model_config = ConfigDict(frozen=True)

    step: ChainStepKind
    poly: ScaledPoly
    poly_text: str = ""
    measured_log: Optional[float] = None


class BoundReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1, description="Nonzero-term count after stripping z^j")
    height: int = Field(..., ge=1)
    lower_bound_log: float = Field(..., description="log h - (k-2) log 2")
    upper_bound_log: float = Field(..., description="log(k h)")
    measured_log: float
    measured_error: float = 0.0
    tolerance: float
    satisfied: bool
    within_upper_bound: bool
    chain_verified: bool = Field(..., description="measures along the chain are non-increasing")
    chain: List[ChainStep] = []

    @property
    def reduction_steps(self) -> int:
        return sum(1 for step in self.chain if step.step != ChainStepKind.STRIP)


class GapBound(BaseModel):
    """1 + exp(-exponent), the explicit isolation gap for k-nomials"""

    model_config = ConfigDict(frozen=True)

    k: int
    exponent: float
    value: float


class FormulaSheet(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    extremal_ratio: str
    extremal_observed_ratio: str
    height_cap: int
    tuple_count_cap: int
    gap: GapBound
    theorem2_height_cap: Optional[float] = None
    theorem2_coefficient_tuples: Optional[int] = None


class Corollary2Report(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    height: int
    n: int = Field(..., description="Restriction index r_n used")
    restriction: str
    height_preserved: bool
    term_count_preserved: bool
    lower_bound_log: float
    restriction_report: BoundReport
    qmc: MeasureEstimate
    qmc_satisfied: bool

    @property
    def satisfied(self) -> bool:
        return self.restriction_report.satisfied and self.qmc_satisfied


class BoundRequest(BaseModel):
    poly: str = Field(..., description="Univariate polynomial in z")
    tol: float = Field(1e-9, gt=0.0)
