from pydantic import BaseModel, ConfigDict, Field
from typing import Any, Dict, List

from app.models.polynomial import UnivariateIntPoly


class CycloFactor(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Index of the cyclotomic polynomial Φ_n")
    mult: int = Field(..., ge=1, description="Multiplicity")


class CycloFactorization(BaseModel):
    """sign * z^z_power * prod Φ_n^mult * remainder"""

    model_config = ConfigDict(frozen=True)

    sign: int = Field(..., description="+1 or -1")
    z_power: int = Field(0, ge=0)
    factors: List[CycloFactor] = []
    remainder: UnivariateIntPoly

    @property
    def is_cyclotomic_product(self) -> bool:
        return self.remainder.is_one()

    def to_json(self) -> Dict[str, Any]:
        return {
            "sign": self.sign,
            "z_power": self.z_power,
            "factors": [{"n": f.n, "mult": f.mult} for f in self.factors],
            "remainder_terms": [[e, c] for e, c in self.remainder.terms],
        }


class PrimePowerCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int
    divisible_by_phi_p: bool
    f_at_one: int


class MannAuditEntry(BaseModel):
    """One cyclotomic divisor Φ_q of f and where Mann's order bound applies to it"""

    model_config = ConfigDict(frozen=True)

    q: int
    mult: int
    minimal: bool = Field(..., description="no proper subsum is divisible by Φ_q")
    root_order: int = Field(..., description="order of the group generated by ζ_q^(e_i - e_j)")
    in_mann_orders: bool


class MannAudit(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    entries: List[MannAuditEntry] = []

    @property
    def consistent(self) -> bool:
        return all(entry.in_mann_orders for entry in self.entries if entry.minimal)


class CycloRequest(BaseModel):
    poly: str = Field(..., description="Univariate polynomial in z")
