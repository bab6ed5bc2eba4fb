from fractions import Fraction
from math import comb
from typing import List, Optional, Tuple
import logging
import math

from app.config import settings
from app.models.bounds import (
    BoundReport,
    ChainStep,
    ChainStepKind,
    Corollary2Report,
    FormulaSheet,
    GapBound,
)
from app.models.polynomial import MultiLaurentPoly, ScaledPoly, UnivariateIntPoly
from app.services.multivar_measure_service import multivar_measure_service
from app.services.polynomial_service import polynomial_service
from app.services.roots_measure_service import roots_measure_service
from app.utils.errors import InvalidArgumentError, ProofChainPreconditionError, ZeroPolynomialError

logger = logging.getLogger(__name__)

_LOG2 = math.log(2.0)


def _check_k(k: int) -> None:
    if k < 2:
        raise InvalidArgumentError("k must be at least 2")


class BoundsService:
    """Explicit lower and upper bounds for the measure of k-nomials, with their witnesses"""

    def __init__(self):
        self.tol = settings.BOUND_TOL
        self.gap_constant = settings.GAP_CONSTANT

    # Theorem 1

    def theorem1_lower_bound(self, f: UnivariateIntPoly) -> float:
        """log h(f) - (k-2) log 2; for a monomial just log h(f)"""
        if f.is_zero:
            raise ZeroPolynomialError()
        height = polynomial_service.height(f)
        k = f.term_count
        if k == 1:
            return math.log(height)
        return math.log(height) - (k - 2) * _LOG2

    def proof_chain(self, f: UnivariateIntPoly) -> List[ChainStep]:
        """Derivative steps down to a binomial, each keeping at least half the height"""
        if f.is_zero:
            raise ProofChainPreconditionError("undefined for zero polynomial")
        if f.constant_term == 0:
            raise ProofChainPreconditionError("f(0) = 0; strip the z^j factor first")
        if f.term_count < 2:
            raise ProofChainPreconditionError("proof chain needs at least two terms")

        current = ScaledPoly(numerator=f, denominator=1)
        chain: List[ChainStep] = []
        while current.term_count > 2:
            numerator = current.numerator
            height = polynomial_service.height(numerator)
            n_1 = numerator.degree
            # largest exponent among the terms attaining the height
            n_i = max(e for e, c in numerator.terms if abs(c) == height)
            if 2 * n_i >= n_1:
                kind = ChainStepKind.DERIVATIVE
                source = numerator
            else:
                kind = ChainStepKind.RECIPROCAL_THEN_DERIVATIVE
                source = polynomial_service.reciprocal(numerator)
            derivative = polynomial_service.derivative_scaled(source)
            _, stripped = polynomial_service.strip_trivial(derivative.numerator)
            current = ScaledPoly(
                numerator=stripped, denominator=current.denominator * derivative.denominator
            ).normalized()
            chain.append(ChainStep(step=kind, poly=current, poly_text=str(current)))
        return chain

    def verify_theorem1(self, f: UnivariateIntPoly, tol: Optional[float] = None) -> BoundReport:
        """Measure f, compare with h/2^{k-2} and k*h, and check the chain numerically"""
        tol = self.tol if tol is None else tol
        if f.is_zero:
            raise ZeroPolynomialError()
        j, stripped = polynomial_service.strip_trivial(f)
        k = stripped.term_count
        height = polynomial_service.height(stripped)
        measured = roots_measure_service.mahler_measure(stripped)

        chain: List[ChainStep] = []
        if j > 0:
            start = ScaledPoly(numerator=stripped, denominator=1)
            chain.append(ChainStep(
                step=ChainStepKind.STRIP, poly=start, poly_text=str(start), measured_log=measured.log_value
            ))

        chain_verified = True
        if k >= 2:
            previous = measured.log_value
            for step in self.proof_chain(stripped):
                estimate = roots_measure_service.mahler_scaled(step.poly)
                if estimate.log_value > previous + tol + estimate.error_bound:
                    chain_verified = False
                    logger.warning(
                        f"chain step {step.poly_text} raised the measure: {estimate.log_value} > {previous}"
                    )
                previous = estimate.log_value
                chain.append(step.model_copy(update={"measured_log": estimate.log_value}))

        lower = self.theorem1_lower_bound(stripped)
        upper = math.log(k * height)
        slack = tol + measured.error_bound
        return BoundReport(
            k=k,
            height=height,
            lower_bound_log=lower,
            upper_bound_log=upper,
            measured_log=measured.log_value,
            measured_error=measured.error_bound,
            tolerance=tol,
            satisfied=measured.log_value >= lower - slack,
            within_upper_bound=measured.log_value <= upper + slack,
            chain_verified=chain_verified,
            chain=chain,
        )

    # Closed-form quantities

    def extremal_ratio(self, k: int) -> Fraction:
        """1 / C(k-1, floor((k-2)/2))"""
        _check_k(k)
        return Fraction(1, comb(k - 1, (k - 2) // 2))

    def extremal_observed_ratio(self, k: int) -> Fraction:
        """M/h for (z+1)^{k-1}, i.e. 1 / C(k-1, floor((k-1)/2))"""
        _check_k(k)
        return Fraction(1, comb(k - 1, (k - 1) // 2))

    def theorem2_height_cap(self, k: int, B: float) -> float:
        """2^{k-2} e^B"""
        _check_k(k)
        if B < 0:
            raise InvalidArgumentError("B must be nonnegative")
        return 2 ** (k - 2) * math.exp(B)

    def theorem2_coefficient_tuples(self, k: int, B: float) -> int:
        """Nonzero integer k-tuples with height at most floor(2^{k-2} e^B)"""
        cap = math.floor(self.theorem2_height_cap(k, B) * (1 + 1e-12))
        return (2 * cap) ** k

    def gap_exponent(self, k: int) -> float:
        """a 3^{floor((k-2)/4)} k^2 log k"""
        _check_k(k)
        return self.gap_constant * 3 ** ((k - 2) // 4) * k * k * math.log(k)

    def gap_lower_bound(self, k: int) -> GapBound:
        exponent = self.gap_exponent(k)
        return GapBound(k=k, exponent=exponent, value=1.0 + math.exp(-exponent))

    def corollary1_coeff_cap(self, k: int) -> Tuple[int, int]:
        """(2^{k-2}, (2^{k-1} + 1)^k)"""
        _check_k(k)
        return 2 ** (k - 2), (2 ** (k - 1) + 1) ** k

    def formula_sheet(self, k: int, B: Optional[float] = None) -> FormulaSheet:
        height_cap, tuple_cap = self.corollary1_coeff_cap(k)
        return FormulaSheet(
            k=k,
            extremal_ratio=str(self.extremal_ratio(k)),
            extremal_observed_ratio=str(self.extremal_observed_ratio(k)),
            height_cap=height_cap,
            tuple_count_cap=tuple_cap,
            gap=self.gap_lower_bound(k),
            theorem2_height_cap=None if B is None else self.theorem2_height_cap(k, B),
            theorem2_coefficient_tuples=None if B is None else self.theorem2_coefficient_tuples(k, B),
        )

    # Multivariate

    def verify_corollary2(
        self,
        F: MultiLaurentPoly,
        budget: Optional[int] = None,
        seed: Optional[int] = None,
        tol: Optional[float] = None,
    ) -> Corollary2Report:
        """M(F) >= h(F)/2^{k-2} through a height-preserving restriction and a torus estimate"""
        tol = self.tol if tol is None else tol
        if F.is_zero:
            raise ZeroPolynomialError()
        k = F.term_count
        height = polynomial_service.height(F)
        n = multivar_measure_service.safe_substitution_index(F).first_safe_n
        restriction = multivar_measure_service.restrict(F, n)
        report = self.verify_theorem1(restriction, tol)

        qmc = multivar_measure_service.mahler_qmc(F, budget=budget, seed=seed)
        lower = math.log(height) - max(k - 2, 0) * _LOG2
        return Corollary2Report(
            k=k,
            height=height,
            n=n,
            restriction=str(restriction),
            height_preserved=polynomial_service.height(restriction) == height,
            term_count_preserved=restriction.term_count == k,
            lower_bound_log=lower,
            restriction_report=report,
            qmc=qmc,
            qmc_satisfied=qmc.log_value >= lower - tol - qmc.error_bound,
        )


bounds_service = BoundsService()
