from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List, Optional, Tuple
from dataclasses import dataclass
from enum import Enum
import csv
import io
import math

import numpy as np


class MeasureMethod(str, Enum):
    ROOTS = "roots"
    QUADRATURE = "quadrature"
    QMC = "qmc"
    BOYD_LAWTON = "boyd_lawton"


class MeasureEstimate(BaseModel):
    """Logarithmic Mahler measure m (nats) with the method that produced it"""

    model_config = ConfigDict(frozen=True)

    log_value: float
    method: MeasureMethod
    error_bound: float = Field(0.0, ge=0.0)
    points: Optional[int] = None
    skipped_points: int = 0

    @field_validator("log_value")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("log_value must be finite")
        return value

    @property
    def mahler(self) -> float:
        """Classical measure M = exp(m)"""
        return math.exp(self.log_value)

    def shifted(self, delta: float) -> "MeasureEstimate":
        return self.model_copy(update={"log_value": self.log_value + delta})


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    leading_coefficient: int
    residual_bound: float
    relative_errors: np.ndarray
    iterations: int = 0

    @property
    def degree(self) -> int:
        return int(self.roots.shape[0])

    def moduli(self) -> np.ndarray:
        return np.abs(self.roots)


class SafeIndex(BaseModel):
    """Every integer n > threshold keeps the restricted monomials distinct"""

    model_config = ConfigDict(frozen=True)

    threshold: float = Field(..., ge=0.0)
    witness: Tuple[int, ...] = ()

    @property
    def first_safe_n(self) -> int:
        return math.floor(self.threshold) + 1


class ConvergenceRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    estimate: MeasureEstimate
    height_preserved: bool
    degree: int


class ConvergenceTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: List[ConvergenceRow] = []

    @field_validator("rows")
    @classmethod
    def _increasing(cls, rows: List[ConvergenceRow]) -> List[ConvergenceRow]:
        if any(b.n <= a.n for a, b in zip(rows, rows[1:])):
            raise ValueError("n must be strictly increasing")
        return rows

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["n", "m_estimate", "error_bound", "height_preserved"])
        for row in self.rows:
            writer.writerow([
                row.n,
                repr(row.estimate.log_value),
                repr(row.estimate.error_bound),
                str(row.height_preserved).lower(),
            ])
        return buffer.getvalue()


class MeasureRequest(BaseModel):
    poly: str = Field(..., description="Univariate polynomial in z, e.g. z^2+5*z+1")
    method: str = Field("auto", pattern="^(auto|roots|quad)$")
    points: Optional[int] = Field(None, ge=16, description="Quadrature grid size (power of two)")


class MultiMeasureRequest(BaseModel):
    poly: str = Field(..., description="Laurent polynomial in x1..xN")
    budget: int = Field(2 ** 16, ge=2 ** 10, le=2 ** 22, description="Total torus sample budget")
    seed: int = Field(0, description="Seed for the random lattice shifts")


class BoydLawtonRequest(BaseModel):
    poly: str = Field(..., description="Laurent polynomial in x1..xN")
    ns: Optional[List[int]] = Field(None, description="Strictly increasing restriction indices")
