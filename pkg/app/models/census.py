from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Optional, Tuple
from enum import Enum
from functools import reduce
import hashlib
import json
import math

from app.models.cyclotomic import CycloFactor, CycloFactorization
from app.models.polynomial import UnivariateIntPoly


class ExponentTuple(BaseModel):
    """n_1 > n_2 > ... > n_{k-1} > 0 with gcd 1"""

    model_config = ConfigDict(frozen=True)

    entries: Tuple[int, ...]

    @field_validator("entries")
    @classmethod
    def _check_entries(cls, entries: Tuple[int, ...]) -> Tuple[int, ...]:
        if not entries:
            raise ValueError("an exponent tuple needs at least one entry")
        if entries[-1] <= 0:
            raise ValueError("exponents must be positive")
        if any(b >= a for a, b in zip(entries, entries[1:])):
            raise ValueError("exponents must be strictly decreasing")
        if reduce(math.gcd, entries) != 1:
            raise ValueError("exponents must have gcd 1")
        return entries

    @property
    def k(self) -> int:
        return len(self.entries) + 1

    def unit_polynomial(self) -> UnivariateIntPoly:
        """f_n = z^{n_1} + ... + z^{n_{k-1}} + 1"""
        return UnivariateIntPoly.unit_knomial(self.entries)


class CensusKind(str, Enum):
    SC_MEMBER = "sc_member"
    SC_NONMEMBER = "sc_nonmember"
    COEFF_CENSUS_HIT = "coeff_census_hit"


class Provenance(str, Enum):
    SEARCH = "search"
    CONSTRUCTION = "construction"


class CensusRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: CensusKind
    k: int = Field(..., ge=2)
    exponents: List[int]
    coefficients: List[int]
    factors: Optional[List[CycloFactor]] = None
    remainder_terms: Optional[List[Tuple[int, int]]] = None
    m_value: float
    provenance: Provenance = Provenance.SEARCH
    config_hash: str = ""
    phi_p_divides: Optional[bool] = None
    f_at_one: Optional[int] = None

    @model_validator(mode="after")
    def _member_means_full_factorization(self):
        is_product = self.factors is not None and self.remainder_terms == [(0, 1)]
        if self.kind == CensusKind.SC_MEMBER and not is_product:
            raise ValueError("an S_c member must carry a complete cyclotomic factorization")
        if self.kind == CensusKind.SC_NONMEMBER and is_product:
            raise ValueError("a cyclotomic product cannot be recorded as a nonmember")
        return self

    @classmethod
    def from_factorization(
        cls, kind: CensusKind, factorization: Optional[CycloFactorization], **fields
    ) -> "CensusRecord":
        if factorization is None:
            return cls(kind=kind, **fields)
        return cls(
            kind=kind,
            factors=list(factorization.factors),
            remainder_terms=list(factorization.remainder.terms),
            **fields,
        )

    @property
    def resume_key(self) -> Tuple[int, ...]:
        return tuple(self.exponents) if self.kind != CensusKind.COEFF_CENSUS_HIT else tuple(self.coefficients)

    def polynomial(self) -> UnivariateIntPoly:
        return UnivariateIntPoly.knomial(self.coefficients, self.exponents)


class SearchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    search: str = Field("sc", description="sc or coeffs")
    k: int = Field(..., ge=2)
    max_degree: int = Field(..., ge=1, description="Largest n_1 (max_exponent for the coefficient census)")
    coeff_bound: Optional[int] = Field(None, ge=1)
    shard_index: int = Field(0, ge=0)
    shard_count: int = Field(1, ge=1)
    output_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_shard(self):
        if self.shard_index >= self.shard_count:
            raise ValueError("shard index must be smaller than the shard count")
        if self.max_degree < self.k - 1:
            raise ValueError("max_degree must be at least k - 1")
        return self

    def config_hash(self) -> str:
        """Binds records to the search they came from; shards of one search share it"""
        payload = self.model_dump(exclude={"shard_index", "shard_count", "output_path"})
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


class IsolationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_degree: int
    cases: int
    cyclotomic_count: int
    disagreements: List[str] = []
    min_mahler: Optional[float] = None
    min_witness: Optional[str] = None
    gap_bound: float

    @property
    def isolated(self) -> bool:
        return not self.disagreements and (self.min_mahler is None or self.min_mahler > self.gap_bound)


class StabilityRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_degree: int
    member_count: int


class StabilityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    k_is_prime: bool
    rows: List[StabilityRow]
    largest_member_degree: int = 0

    @property
    def stable(self) -> bool:
        """Counts agree on every slice past the largest member found"""
        tail = {row.member_count for row in self.rows if row.max_degree >= self.largest_member_degree}
        return len(tail) <= 1


class ConstructRequest(BaseModel):
    s: int = Field(..., ge=2)
    t: int = Field(..., ge=2)
    m: int = Field(..., ge=2)
    l: int = Field(..., ge=2)


class SearchScRequest(BaseModel):
    k: int = Field(..., ge=2, le=8)
    max_degree: int = Field(..., ge=1, le=60, description="In-memory searches are kept small")
