from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from sympy import prevprime, primitive_root

from app.config import settings
from app.models.measure import (
    ConvergenceRow,
    ConvergenceTable,
    MeasureEstimate,
    MeasureMethod,
    SafeIndex,
)
from app.models.polynomial import MultiLaurentPoly, UnivariateIntPoly
from app.services.polynomial_service import polynomial_service
from app.services.roots_measure_service import roots_measure_service
from app.utils.errors import (
    CircleZeroSaturationError,
    DegreeTooLargeError,
    InvalidArgumentError,
    VanishingRestrictionError,
    ZeroPolynomialError,
)

logger = logging.getLogger(__name__)

# Median-of-means combines replica means in groups of this size
_GROUP_SIZE = 4
# Consistency constant turning a MAD into a standard deviation
_MAD_SCALE = 1.4826
# Sub-lattice nudge for samples that land on a zero of F
_GOLDEN = (math.sqrt(5) - 1) / 2


def _power_vector(n: int, num_vars: int) -> Tuple[int, ...]:
    return tuple(n ** i for i in range(num_vars))


@lru_cache(maxsize=64)
def cbc_lattice(num_dims: int, num_points: int) -> Tuple[int, ...]:
    """Generating vector of a rank-1 lattice by fast component-by-component search.

    num_points must be prime. Uses the circulant structure of the Korobov kernel
    under a primitive-root permutation so every component costs one FFT pair.
    """
    z = [1] * num_dims
    if num_dims == 1 or num_points < 5:
        return tuple(z)
    half = (num_points - 1) // 2
    g = int(primitive_root(num_points))
    perm = np.ones(half, dtype=np.int64)
    for j in range(half - 1):
        perm[j + 1] = (g * perm[j]) % num_points
    perm = np.minimum(num_points - perm, perm)
    pn = perm / num_points
    kernel = pn * pn - pn + 1.0 / 6
    kernel_fft = np.fft.fft(kernel)
    weights = np.hstack([1.0, 0.8 ** np.arange(num_dims - 1)])
    q = np.ones(half)
    w = 0
    for s in range(1, num_dims):
        reordered = np.hstack([kernel[:w + 1][::-1], kernel[w + 1:half][::-1]])
        q = q * (1.0 + weights[s - 1] * reordered)
        w = int(np.fft.ifft(kernel_fft * np.fft.fft(q)).real.argmin())
        z[s] = int(perm[w])
    return tuple(z)


class MultivarMeasureService:
    """Mahler measure of Laurent polynomials on the torus and along Boyd-Lawton restrictions"""

    def __init__(self):
        self.budget = settings.QMC_BUDGET
        self.replicas = settings.QMC_REPLICAS
        self.seed = settings.QMC_SEED
        self.chunk = settings.QUAD_CHUNK
        self.zero_skip_limit = settings.ZERO_SKIP_LIMIT
        self.circle_zero_tol = settings.CIRCLE_ZERO_TOL
        self.max_restricted_degree = settings.BOYD_LAWTON_MAX_DEGREE

    # Restrictions

    def safe_substitution_index(self, F: MultiLaurentPoly) -> SafeIndex:
        """Threshold past which r_n = (1, n, ..., n^{l-1}) separates all monomials"""
        support = F.support
        if len(support) < 2:
            return SafeIndex(threshold=0.0, witness=())
        best = Fraction(0)
        witness: Tuple[int, ...] = ()
        for a in range(len(support)):
            for b in range(a + 1, len(support)):
                v = tuple(x - y for x, y in zip(support[a], support[b]))
                top = max(i for i, x in enumerate(v) if x != 0)
                value = sum((Fraction(abs(v[i]), abs(v[top])) for i in range(top)), Fraction(0))
                if value > best or not witness:
                    best, witness = value, v
        return SafeIndex(threshold=float(best), witness=witness)

    def restricted_degree(self, F: MultiLaurentPoly, n: int) -> int:
        images = [sum(r * j for r, j in zip(_power_vector(n, F.num_vars), v)) for v in F.support]
        return max(images) - min(images) if images else 0

    def restrict(self, F: MultiLaurentPoly, n: int) -> UnivariateIntPoly:
        """F(z^{r_n}) with the lowest exponent shifted to 0"""
        if n < 1:
            raise InvalidArgumentError("restriction index n must be at least 1")
        g = polynomial_service.substitute_powers(F, _power_vector(n, F.num_vars))
        if g.is_zero:
            raise VanishingRestrictionError()
        return g

    def default_ns(self, F: MultiLaurentPoly) -> List[int]:
        """Geometric grid {2^i, 3*2^i} past the safe index, capped by restricted degree"""
        start = self.safe_substitution_index(F).first_safe_n
        ns = []
        i = 0
        while True:
            candidates = [n for n in (2 ** i, 3 * 2 ** i) if n >= start]
            if any(self.restricted_degree(F, n) > self.max_restricted_degree for n in candidates):
                break
            ns.extend(candidates)
            i += 1
            if 2 ** i > self.max_restricted_degree:
                break
        return sorted(set(ns))

    def boyd_lawton_sequence(
        self, F: MultiLaurentPoly, ns: Optional[Sequence[int]] = None, threads: Optional[int] = None
    ) -> ConvergenceTable:
        ns = list(ns) if ns is not None else self.default_ns(F)
        if any(n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            raise InvalidArgumentError("ns must be strictly increasing and at least 1")
        if F.is_zero:
            raise ZeroPolynomialError()
        height = polynomial_service.height(F)
        rows = []
        for n in ns:
            degree = self.restricted_degree(F, n)
            if degree > self.max_restricted_degree:
                raise DegreeTooLargeError(
                    f"restriction at n={n} has degree {degree} > {self.max_restricted_degree}"
                )
            g = self.restrict(F, n)
            estimate = roots_measure_service.mahler_measure(g, threads=threads)
            rows.append(ConvergenceRow(
                n=n,
                estimate=estimate.model_copy(update={"method": MeasureMethod.BOYD_LAWTON}),
                height_preserved=polynomial_service.height(g) == height,
                degree=g.degree,
            ))
            logger.debug(f"restriction n={n}: degree {g.degree}, m = {estimate.log_value:.9f}")
        return ConvergenceTable(rows=rows)

    # Exact reductions

    def reduce_to_univariate(self, F: MultiLaurentPoly) -> Optional[UnivariateIntPoly]:
        """G with F = monomial * G(x^v) for a primitive v, when the support is collinear"""
        if F.is_zero:
            raise ZeroPolynomialError()
        support = F.support
        base = support[0]
        diffs = [tuple(a - b for a, b in zip(vector, base)) for vector in support]
        first = next((d for d in diffs if any(d)), None)
        if first is None:
            return UnivariateIntPoly.constant(F.coefficients[0])
        divisor = 0
        for x in first:
            divisor = gcd(divisor, x)
        v = tuple(x // divisor for x in first)
        pivot = next(i for i, x in enumerate(v) if x != 0)
        multiples = []
        for d in diffs:
            if d[pivot] % v[pivot]:
                return None
            t = d[pivot] // v[pivot]
            if any(x != t * y for x, y in zip(d, v)):
                return None
            multiples.append(t)
        lowest = min(multiples)
        return UnivariateIntPoly.from_terms((t - lowest, c) for t, c in zip(multiples, F.coefficients))

    # Torus quadrature

    def _replica_sum(
        self,
        residues: np.ndarray,
        offsets: np.ndarray,
        nudges: np.ndarray,
        coefficients: np.ndarray,
        num_points: int,
        tolerance: float,
    ) -> Tuple[float, int, int]:
        """Sum of log|F| over one shifted lattice.

        Points landing on a zero of F are resampled once at a sub-lattice offset;
        returns the sum, the number resampled and the number of points summed.
        """
        total = 0.0
        resampled = 0
        used = 0
        for start in range(0, num_points, self.chunk):
            i = np.arange(start, min(start + self.chunk, num_points), dtype=np.int64)
            phases = (np.outer(i, residues) % num_points) / num_points + offsets
            values = np.exp(2j * np.pi * phases) @ coefficients
            magnitudes = np.abs(values)
            zeros = magnitudes <= tolerance
            if zeros.any():
                moved = np.exp(2j * np.pi * (phases[zeros] + nudges)) @ coefficients
                magnitudes[zeros] = np.abs(moved)
                resampled += int(np.count_nonzero(zeros))
            keep = magnitudes > tolerance
            total += float(np.sum(np.log(magnitudes[keep])))
            used += int(np.count_nonzero(keep))
        return total, resampled, used

    def mahler_qmc(
        self,
        F: MultiLaurentPoly,
        budget: Optional[int] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> MeasureEstimate:
        """Randomly shifted rank-1 lattice average of log|F| over the torus"""
        budget = self.budget if budget is None else budget
        seed = self.seed if seed is None else seed
        threads = settings.THREADS if threads is None else threads
        if F.is_zero:
            raise ZeroPolynomialError()
        if budget < 2 ** 10:
            raise InvalidArgumentError("QMC budget must be at least 2^10")

        if F.term_count == 1:
            return MeasureEstimate(
                log_value=math.log(abs(F.coefficients[0])), method=MeasureMethod.QMC, error_bound=0.0
            )
        reduced = self.reduce_to_univariate(F)
        if reduced is not None:
            logger.debug("collinear support; measuring the univariate reduction exactly")
            estimate = roots_measure_service.mahler_measure(reduced, threads=threads)
            return estimate.model_copy(update={"method": MeasureMethod.QMC})

        num_points = int(prevprime(budget // self.replicas + 1))
        z = cbc_lattice(F.num_vars, num_points)
        rng = np.random.default_rng(seed)
        shifts = rng.random((self.replicas, F.num_vars))

        height = polynomial_service.height(F)
        coefficients = np.array([float(Fraction(c, height)) for c in F.coefficients])
        tolerance = self.circle_zero_tol * float(np.sum(np.abs(coefficients)))
        residues = np.array(
            [sum(e * zd for e, zd in zip(vector, z)) % num_points for vector in F.support], dtype=np.int64
        )
        delta = np.modf(np.arange(1, F.num_vars + 1) * _GOLDEN)[0] / (2 * num_points)
        nudges = np.array([float(np.dot(vector, delta)) for vector in F.support])

        def replica(shift: np.ndarray) -> Tuple[float, int, int]:
            offsets = np.array([math.fmod(sum(e * float(u) for e, u in zip(vector, shift)), 1.0)
                                for vector in F.support])
            return self._replica_sum(residues, offsets, nudges, coefficients, num_points, tolerance)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                partials = list(pool.map(replica, shifts))
        else:
            partials = [replica(shift) for shift in shifts]

        skipped = sum(p[1] for p in partials)
        total = self.replicas * num_points
        if skipped > self.zero_skip_limit * total:
            raise CircleZeroSaturationError(skipped, total)
        if skipped:
            logger.warning(f"resampled {skipped} torus samples at zeros of F")

        means = np.array([s / max(used, 1) for s, _, used in partials])
        usable = len(means) - len(means) % _GROUP_SIZE
        if usable >= 2 * _GROUP_SIZE:
            value = float(np.median(means[:usable].reshape(-1, _GROUP_SIZE).mean(axis=1)))
        else:
            value = float(np.median(means))
        spread = _MAD_SCALE * float(np.median(np.abs(means - np.median(means))))
        error = 3.0 * spread / math.sqrt(len(means))
        return MeasureEstimate(
            log_value=value + math.log(height),
            method=MeasureMethod.QMC,
            error_bound=error,
            points=total,
            skipped_points=skipped,
        )


multivar_measure_service = MultivarMeasureService()
