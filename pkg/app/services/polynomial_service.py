from typing import List, Tuple, Union
import logging

from sympy.polys.densearith import dup_div, dup_rem
from sympy.polys.domains import ZZ

from app.models.polynomial import (
    ExponentMatrix,
    ExponentVector,
    MultiLaurentPoly,
    ScaledPoly,
    UnivariateIntPoly,
)
from app.utils.errors import (
    DerivativeDegenerateError,
    InvalidArgumentError,
    ZeroPolynomialError,
)

logger = logging.getLogger(__name__)


def to_dense_zz(f: UnivariateIntPoly) -> list:
    return [ZZ(c) for c in f.to_dense()]


def from_dense_zz(coefficients: list) -> UnivariateIntPoly:
    return UnivariateIntPoly.from_dense(int(c) for c in coefficients)


class PolynomialService:
    """Exact operations on sparse univariate and Laurent integer polynomials"""

    def height(self, p: Union[UnivariateIntPoly, MultiLaurentPoly]) -> int:
        return max((abs(c) for c in p.coefficients), default=0)

    def reciprocal(self, f: UnivariateIntPoly) -> UnivariateIntPoly:
        """f*(z) = z^{deg f} f(1/z)"""
        if f.is_zero:
            raise ZeroPolynomialError()
        n = f.degree
        return UnivariateIntPoly.from_terms((n - e, c) for e, c in f.terms)

    def derivative_scaled(self, f: UnivariateIntPoly) -> ScaledPoly:
        """(1/n) f' with n = deg f"""
        if f.degree < 1:
            raise DerivativeDegenerateError()
        numerator = UnivariateIntPoly.from_terms((e - 1, c * e) for e, c in f.terms if e > 0)
        return ScaledPoly(numerator=numerator, denominator=f.degree)

    def strip_trivial(self, f: UnivariateIntPoly) -> Tuple[int, UnivariateIntPoly]:
        """Split f = z^j f1 with f1(0) != 0"""
        if f.is_zero:
            raise ZeroPolynomialError()
        j = f.min_exponent
        return j, UnivariateIntPoly.from_terms((e - j, c) for e, c in f.terms)

    def substitute_powers(self, F: MultiLaurentPoly, r: ExponentVector) -> UnivariateIntPoly:
        """F(z^r), shifted so that the lowest exponent is 0"""
        if len(r) != F.num_vars:
            raise InvalidArgumentError(
                f"exponent vector has length {len(r)}, polynomial has {F.num_vars} variables"
            )
        images = [(sum(ri * ji for ri, ji in zip(r, vector)), c) for vector, c in F.terms]
        merged = {}
        for exponent, coefficient in images:
            merged[exponent] = merged.get(exponent, 0) + coefficient
        merged = {e: c for e, c in merged.items() if c != 0}
        if not merged:
            return UnivariateIntPoly()
        lowest = min(merged)
        return UnivariateIntPoly.from_terms((e - lowest, c) for e, c in merged.items())

    def substitute_matrix(self, F: MultiLaurentPoly, A: ExponentMatrix) -> MultiLaurentPoly:
        """F_A(z_1..z_ℓ) = F(z^A): each exponent vector j maps to A·j"""
        if A.num_cols != F.num_vars:
            raise InvalidArgumentError(
                f"matrix has {A.num_cols} columns, polynomial has {F.num_vars} variables"
            )
        return MultiLaurentPoly.from_terms(A.num_rows, ((A.apply(v), c) for v, c in F.terms))

    def linear_form_preimage(self, F: MultiLaurentPoly) -> Tuple[MultiLaurentPoly, ExponentMatrix]:
        """(L, A) with L = a_1 z_1 + ... + a_k z_k and F = L_A"""
        if F.is_zero:
            raise ZeroPolynomialError()
        k = F.term_count
        linear = MultiLaurentPoly.from_terms(
            k, ((tuple(int(i == j) for j in range(k)), c) for i, c in enumerate(F.coefficients))
        )
        return linear, ExponentMatrix.from_columns(F.support)

    # Exact division by known factors

    def divmod(self, f: UnivariateIntPoly, g: UnivariateIntPoly) -> Tuple[UnivariateIntPoly, UnivariateIntPoly]:
        if g.is_zero:
            raise ZeroPolynomialError("division by the zero polynomial")
        if f.is_zero:
            return UnivariateIntPoly(), UnivariateIntPoly()
        quotient, remainder = dup_div(to_dense_zz(f), to_dense_zz(g), ZZ)
        return from_dense_zz(quotient), from_dense_zz(remainder)

    def divides(self, g: UnivariateIntPoly, f: UnivariateIntPoly) -> bool:
        if f.is_zero:
            return True
        if f.degree < g.degree:
            return False
        return not any(dup_rem(to_dense_zz(f), to_dense_zz(g), ZZ))

    def product(self, factors: List[UnivariateIntPoly]) -> UnivariateIntPoly:
        result = UnivariateIntPoly.constant(1)
        for factor in factors:
            result = result * factor
        return result


polynomial_service = PolynomialService()
