from functools import lru_cache
from math import gcd
from typing import List, Tuple
import logging
import math

import numpy as np
from sympy import factorint, primerange
from sympy.polys.domains import ZZ
from sympy.polys.factortools import dup_zz_cyclotomic_poly

from app.config import settings
from app.models.cyclotomic import (
    CycloFactor,
    CycloFactorization,
    MannAudit,
    MannAuditEntry,
    PrimePowerCheck,
)
from app.models.polynomial import UnivariateIntPoly
from app.services.polynomial_service import from_dense_zz, polynomial_service
from app.utils.errors import (
    InvalidArgumentError,
    NonUnitCoefficientsError,
    PhiAtOneError,
    RootFindingError,
    SubsetScanInfeasibleError,
    ZeroPolynomialError,
)

logger = logging.getLogger(__name__)

_EULER_GAMMA_EXP = math.exp(0.5772156649015329)
_SUBSET_CHUNK = 2 ** 14


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> UnivariateIntPoly:
    """Φ_n with exact integer coefficients"""
    if n < 1:
        raise InvalidArgumentError("cyclotomic index must be at least 1")
    return from_dense_zz(dup_zz_cyclotomic_poly(n, ZZ))


def _totient_floor(n: int) -> float:
    """Lower bound for φ(n), n >= 3 (Rosser-Schoenfeld)"""
    t = math.log(math.log(n))
    return n / (_EULER_GAMMA_EXP * t + 2.50637 / t)


@lru_cache(maxsize=32)
def _totient_table(limit: int) -> np.ndarray:
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in primerange(2, limit + 1):
        phi[p::p] -= phi[p::p] // p
    return phi


def orders_with_totients(degree: int) -> List[Tuple[int, int]]:
    """(n, φ(n)) for every n with φ(n) <= degree, ascending in n"""
    if degree < 1:
        return []
    limit = 2 * degree * degree + 2
    n = 30
    while n < limit and _totient_floor(n) <= degree:
        n *= 2
    limit = min(limit, n)
    phi = _totient_table(limit)
    return [(int(i), int(phi[i])) for i in np.flatnonzero(phi[1:] <= degree) + 1]


def orders_with_totient_at_most(degree: int) -> List[int]:
    """All n with φ(n) <= degree, ascending"""
    return [n for n, _ in orders_with_totients(degree)]


def _value_at_root_of_unity(f: UnivariateIntPoly, n: int) -> complex:
    """f(e^{2πi/n}) with exponents reduced mod n before the float conversion"""
    phases = np.array([(e % n) / n for e in f.exponents])
    return complex(np.exp(2j * np.pi * phases) @ np.array(f.coefficients, dtype=np.float64))


class CyclotomicService:
    """Exact cyclotomic detection and the subsum arithmetic around Φ_q divisors"""

    def __init__(self):
        self.prefilter_m = settings.CYCLO_PREFILTER_M
        self.subset_max_terms = settings.SUBSET_SCAN_MAX_TERMS
        self.max_root_degree = settings.MAX_ROOT_DEGREE

    def cyclotomic_poly(self, n: int) -> UnivariateIntPoly:
        return cyclotomic_poly(n)

    def is_cyclotomic_product(self, f: UnivariateIntPoly) -> CycloFactorization:
        """Divide out every Φ_n with φ(n) <= deg to full multiplicity"""
        if f.is_zero:
            raise ZeroPolynomialError()
        sign = 1 if f.leading_coefficient > 0 else -1
        z_power, current = polynomial_service.strip_trivial(f)
        current = current * sign
        factors: List[CycloFactor] = []
        scale = float(sum(abs(c) for c in current.coefficients))

        for n, phi_degree in orders_with_totients(current.degree):
            if phi_degree > current.degree:
                continue
            if abs(_value_at_root_of_unity(current, n)) > 1e-9 * scale:
                continue
            phi = cyclotomic_poly(n)
            mult = 0
            while current.degree >= phi_degree:
                quotient, remainder = polynomial_service.divmod(current, phi)
                if not remainder.is_zero:
                    break
                current = quotient
                mult += 1
            if mult:
                factors.append(CycloFactor(n=n, mult=mult))
                scale = float(sum(abs(c) for c in current.coefficients))
            if current.degree == 0:
                break

        return CycloFactorization(sign=sign, z_power=z_power, factors=factors, remainder=current)

    def is_kronecker(self, f: UnivariateIntPoly) -> bool:
        """M(f) = 1: reciprocal-symmetry filter, numeric M filter, then exact division"""
        if f.is_zero:
            raise ZeroPolynomialError()
        _, stripped = polynomial_service.strip_trivial(f)
        if abs(stripped.leading_coefficient) != 1 or abs(stripped.constant_term) != 1:
            return False
        reciprocal = polynomial_service.reciprocal(stripped)
        if reciprocal.terms not in (stripped.terms, (-stripped).terms):
            return False
        if stripped.degree <= self.max_root_degree:
            from app.services.roots_measure_service import roots_measure_service
            try:
                estimate = roots_measure_service.mahler_univariate(stripped)
                if estimate.log_value > math.log(self.prefilter_m):
                    return False
            except RootFindingError:
                logger.warning(f"root prefilter failed for a degree {stripped.degree} polynomial")
        return self.is_cyclotomic_product(stripped).is_cyclotomic_product

    def phi_at_one(self, m: int) -> int:
        """Φ_m(1): q for m = q^e, else 1"""
        if m == 1:
            raise PhiAtOneError()
        if m < 1:
            raise InvalidArgumentError("m must be a positive integer")
        primes = factorint(m)
        return int(next(iter(primes))) if len(primes) == 1 else 1

    def mann_orders(self, k: int) -> List[int]:
        """Squarefree integers built from primes <= k, ascending; always includes 1 and 2"""
        if k < 2:
            raise InvalidArgumentError("k must be at least 2")
        orders = {1}
        for p in primerange(2, k + 1):
            orders |= {q * p for q in orders}
        return sorted(orders | {2})

    def subsum_divisibility(self, f: UnivariateIntPoly, q: int) -> List[Tuple[int, ...]]:
        """Exponent sets of nonempty proper subsums of f that Φ_q divides"""
        if q < 1:
            raise InvalidArgumentError("q must be a positive integer")
        k = f.term_count
        if k > self.subset_max_terms:
            raise SubsetScanInfeasibleError(
                f"subset scan infeasible: {k} terms exceeds {self.subset_max_terms}"
            )
        if k < 2:
            return []
        phi = cyclotomic_poly(q)
        terms = f.terms
        values = np.exp(2j * np.pi * np.array([(e % q) / q for e, _ in terms]))
        values = values * np.array([float(c) for _, c in terms])
        scale = float(sum(abs(c) for _, c in terms))
        bits = np.arange(k, dtype=np.int64)
        full = (1 << k) - 1

        hits = []
        for start in range(1, full, _SUBSET_CHUNK):
            masks = np.arange(start, min(start + _SUBSET_CHUNK, full), dtype=np.int64)
            selection = (masks[:, None] >> bits) & 1
            sums = selection @ values
            for mask in masks[np.abs(sums) <= 1e-9 * scale]:
                chosen = [terms[i] for i in range(k) if (int(mask) >> i) & 1]
                subsum = UnivariateIntPoly.from_terms(chosen)
                if not subsum.is_zero and polynomial_service.divides(phi, subsum):
                    hits.append(tuple(sorted(e for e, _ in chosen)))
        return sorted(hits, key=lambda s: (len(s), s))

    def prime_power_divisor_check(self, f: UnivariateIntPoly) -> PrimePowerCheck:
        """For a unit-coefficient p-nomial: does Φ_p divide f, and f(1) = p"""
        if f.is_zero:
            raise ZeroPolynomialError()
        if any(c != 1 for c in f.coefficients):
            raise NonUnitCoefficientsError("all coefficients must equal 1")
        p = f.term_count
        divisible = p > 1 and polynomial_service.divides(cyclotomic_poly(p), f)
        return PrimePowerCheck(p=p, divisible_by_phi_p=divisible, f_at_one=f.evaluate(1))

    def mann_audit(self, f: UnivariateIntPoly) -> MannAudit:
        """Check each cyclotomic divisor of f against the squarefree order bound"""
        factorization = self.is_cyclotomic_product(f)
        k = f.term_count
        orders = set(self.mann_orders(max(k, 2)))
        exponents = f.exponents
        spread = 0
        for e in exponents:
            spread = gcd(spread, e - exponents[-1])
        entries = []
        for factor in factorization.factors:
            q = factor.n
            root_order = q // gcd(q, spread) if spread else 1
            minimal = not self.subsum_divisibility(f, q)
            entries.append(MannAuditEntry(
                q=q,
                mult=factor.mult,
                minimal=minimal,
                root_order=root_order,
                in_mann_orders=root_order in orders,
            ))
        return MannAudit(k=k, entries=entries)


cyclotomic_service = CyclotomicService()
