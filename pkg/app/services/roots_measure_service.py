from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import List, Optional, Tuple
import logging
import math

import numpy as np
from sympy.polys.domains import ZZ
from sympy.polys.sqfreetools import dup_sqf_list

from app.config import settings
from app.models.measure import MeasureEstimate, MeasureMethod, RootSet
from app.models.polynomial import ScaledPoly, UnivariateIntPoly
from app.services.polynomial_service import from_dense_zz, polynomial_service, to_dense_zz
from app.utils.errors import (
    CircleZeroSaturationError,
    DegreeTooLargeError,
    InvalidArgumentError,
    RootFindingError,
    ZeroPolynomialError,
)

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


def _normalized_arrays(f: UnivariateIntPoly) -> Tuple[np.ndarray, np.ndarray, int]:
    """Exponents and coefficients scaled by the height, so huge integers stay finite"""
    height = polynomial_service.height(f)
    exponents = np.array(f.exponents, dtype=np.float64)
    coefficients = np.array([float(Fraction(c, height)) for c in f.coefficients])
    return exponents, coefficients, height


def _initial_guesses(exponents: np.ndarray, coefficients: np.ndarray, degree: int) -> np.ndarray:
    """Starting points on the circles given by the upper hull of (n_i, log|a_i|)"""
    points = sorted(zip(exponents.tolist(), np.log(np.abs(coefficients)).tolist()))
    hull: List[Tuple[float, float]] = []
    for point in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (point[1] - y1) - (y2 - y1) * (point[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(point)

    guesses = []
    for edge, ((n_lo, l_lo), (n_hi, l_hi)) in enumerate(zip(hull, hull[1:])):
        count = int(round(n_hi - n_lo))
        radius = math.exp((l_lo - l_hi) / (n_hi - n_lo))
        offset = 0.7 + 2.0 * math.pi * edge / max(degree, 1)
        angles = 2.0 * math.pi * np.arange(count) / count + offset
        guesses.append(radius * np.exp(1j * angles))
    return np.concatenate(guesses) if guesses else np.zeros(0, dtype=np.complex128)


def _newton_ratio(
    x: np.ndarray, exponents: np.ndarray, coefficients: np.ndarray, degree: int
) -> Tuple[np.ndarray, np.ndarray]:
    """p/p' and the relative backward error |p| / sum |a_i||x|^{n_i} at each point.

    Points outside the unit disc are evaluated through the reversed polynomial at 1/x
    so that large powers never overflow.
    """
    ratio = np.empty_like(x)
    backward = np.empty(x.shape, dtype=np.float64)
    inside = np.abs(x) <= 1.0
    outside = ~inside
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if inside.any():
            xi = x[inside][:, None]
            powers = xi ** exponents
            p = powers @ coefficients
            scale = np.abs(powers) @ np.abs(coefficients)
            mask = exponents > 0
            dp = (xi ** (exponents[mask] - 1)) @ (coefficients[mask] * exponents[mask])
            ratio[inside] = p / dp
            backward[inside] = np.abs(p) / scale
        if outside.any():
            xo = x[outside]
            y = (1.0 / xo)[:, None]
            reversed_exponents = degree - exponents
            powers = y ** reversed_exponents
            q = powers @ coefficients
            scale = np.abs(powers) @ np.abs(coefficients)
            mask = reversed_exponents > 0
            dq = (y ** (reversed_exponents[mask] - 1)) @ (coefficients[mask] * reversed_exponents[mask])
            ratio[outside] = xo * q / (degree * q - y[:, 0] * dq)
            backward[outside] = np.abs(q) / scale
    return ratio, backward


def _root_annulus(exponents: np.ndarray, coefficients: np.ndarray) -> Tuple[float, float]:
    """Cauchy bounds r_lo <= |α| <= r_hi for every root α"""
    magnitudes = np.abs(coefficients)
    lead = magnitudes[int(np.argmax(exponents))]
    constant = magnitudes[int(np.argmin(exponents))]
    with np.errstate(over="ignore"):
        r_hi = 1.0 + (float(np.sum(magnitudes)) - lead) / lead
        r_lo = 1.0 / (1.0 + (float(np.sum(magnitudes)) - constant) / constant)
    return r_lo, min(r_hi, 1e300)


def _project(x: np.ndarray, r_lo: float, r_hi: float, fallback_angles: np.ndarray) -> np.ndarray:
    """Pull iterates back into the root annulus, keeping their arguments"""
    moduli = np.abs(x)
    angles = np.angle(x)
    angles = np.where((moduli > 0.0) & np.isfinite(angles), angles, fallback_angles)
    clipped = np.clip(np.where(np.isfinite(moduli), moduli, r_hi), r_lo, r_hi)
    return np.where((moduli < r_lo) | (moduli > r_hi) | ~np.isfinite(moduli), clipped * np.exp(1j * angles), x)


def _companion_roots(exponents: np.ndarray, coefficients: np.ndarray, degree: int) -> np.ndarray:
    dense = np.zeros(degree + 1)
    dense[degree - exponents.astype(np.int64)] = coefficients
    return np.roots(dense).astype(np.complex128)


def _aberth_sums(x: np.ndarray, active: np.ndarray, block: int) -> np.ndarray:
    """sum_{j != i} 1/(x_i - x_j) for each active index i, computed in row blocks"""
    sums = np.empty(active.shape[0], dtype=np.complex128)
    for start in range(0, active.shape[0], block):
        rows = active[start:start + block]
        local = np.arange(rows.shape[0])
        diff = x[rows][:, None] - x[None, :]
        diff[local, rows] = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            inverse = 1.0 / diff
        inverse[local, rows] = 0.0
        sums[start:start + block] = inverse.sum(axis=1)
    return sums


def _check_aliasing(exponents: List[int], num_points: int) -> None:
    """A midpoint grid of N points sees z^e only through e mod 2N"""
    period = 2 * num_points
    seen = {}
    for e in exponents:
        other = seen.setdefault(e % period, e)
        if other != e:
            raise DegreeTooLargeError(
                f"exponents {other} and {e} coincide modulo {period}; "
                f"a grid of {num_points} points cannot resolve this polynomial"
            )


class RootsMeasureService:
    """Univariate Mahler measure from root products, with a unit-circle quadrature oracle"""

    def __init__(self):
        self.tol = settings.ROOT_TOL
        self.max_iter = settings.ROOT_MAX_ITER
        self.max_degree = settings.MAX_ROOT_DEGREE
        self.block_size = settings.ROOT_BLOCK_SIZE
        self.sqf_trigger = settings.ROOT_SQF_TRIGGER
        self.fallback_max_degree = settings.ROOT_FALLBACK_MAX_DEGREE
        self.quad_points = settings.QUAD_POINTS
        self.quad_max_points = settings.QUAD_MAX_POINTS
        self.quad_chunk = settings.QUAD_CHUNK
        self.zero_skip_limit = settings.ZERO_SKIP_LIMIT
        self.circle_zero_tol = settings.CIRCLE_ZERO_TOL
        self.sqf_max_degree = settings.CYCLO_MAX_DEGREE

    # Roots

    def find_roots(self, f: UnivariateIntPoly, tol: Optional[float] = None) -> RootSet:
        """All roots of f by Aberth iteration; f must satisfy f(0) != 0"""
        tol = self.tol if tol is None else tol
        if f.is_zero:
            raise ZeroPolynomialError()
        if f.constant_term == 0:
            raise InvalidArgumentError("f(0) = 0; strip the z^j factor first")
        degree = f.degree
        if degree > self.max_degree:
            raise DegreeTooLargeError(
                f"degree {degree} exceeds the root-finding limit {self.max_degree}; use quadrature"
            )
        if degree == 0:
            return RootSet(
                roots=np.zeros(0, dtype=np.complex128),
                leading_coefficient=f.leading_coefficient,
                residual_bound=0.0,
                relative_errors=np.zeros(0),
            )

        exponents, coefficients, _ = _normalized_arrays(f)
        floor = 8.0 * f.term_count * _EPS
        r_lo, r_hi = _root_annulus(exponents, coefficients)
        x = _project(_initial_guesses(exponents, coefficients, degree), r_lo, r_hi, np.zeros(degree))
        spread_angles = 2.0 * np.pi * np.arange(degree) / degree + 0.3
        converged = np.zeros(degree, dtype=bool)
        iterations = 0

        for iterations in range(1, self.max_iter + 1):
            active = np.flatnonzero(~converged)
            if active.size == 0:
                break
            ratio, backward = _newton_ratio(x[active], exponents, coefficients, degree)
            settled = backward <= floor
            sums = _aberth_sums(x, active, self.block_size)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                step = ratio / (1.0 - ratio * sums)
                # p/p' -> infinity: the correction tends to -1/S
                limit = -1.0 / sums
            step = np.where(np.isfinite(ratio), step, limit)
            step = np.where(np.isfinite(step), step, 0.5 * r_lo * np.exp(1j * spread_angles[active]))
            step[settled] = 0.0
            x[active] = _project(x[active] - step, r_lo, r_hi, spread_angles[active])
            relative = np.abs(step) / np.maximum(1.0, np.abs(x[active]))
            converged[active[settled | (relative <= tol)]] = True

        ratio, backward = _newton_ratio(x, exponents, coefficients, degree)
        residual = float(np.max(backward))
        if not converged.all():
            if residual > 1e3 * floor:
                return self._fallback_roots(f, exponents, coefficients, floor, residual)
            logger.warning(
                f"Aberth iteration stagnated for {int((~converged).sum())} roots of a degree {degree} "
                f"polynomial; accepting backward error {residual:.3e}"
            )
        return self._root_set(f, x, ratio, residual, floor, iterations)

    @staticmethod
    def _root_set(
        f: UnivariateIntPoly, x: np.ndarray, ratio: np.ndarray, residual: float, floor: float, iterations: int
    ) -> RootSet:
        relative_errors = np.abs(ratio) / np.maximum(1.0, np.abs(x))
        relative_errors = np.where(np.isfinite(relative_errors), relative_errors, 0.0)
        return RootSet(
            roots=x,
            leading_coefficient=f.leading_coefficient,
            residual_bound=max(residual, floor),
            relative_errors=relative_errors,
            iterations=iterations,
        )

    def _fallback_roots(
        self, f: UnivariateIntPoly, exponents: np.ndarray, coefficients: np.ndarray, floor: float, residual: float
    ) -> RootSet:
        """Companion-matrix eigenvalues, polished by Newton steps that lower the backward error"""
        degree = f.degree
        if degree > self.fallback_max_degree:
            raise RootFindingError(
                f"Aberth iteration did not converge in {self.max_iter} steps", best_residual=residual
            )
        logger.warning(
            f"Aberth iteration failed for a degree {degree} polynomial (backward error {residual:.3e}); "
            f"using companion-matrix roots"
        )
        x = _companion_roots(exponents, coefficients, degree)
        ratio, backward = _newton_ratio(x, exponents, coefficients, degree)
        for _ in range(3):
            candidate = x - np.where(np.isfinite(ratio), ratio, 0.0)
            candidate_ratio, candidate_backward = _newton_ratio(candidate, exponents, coefficients, degree)
            better = candidate_backward < backward
            x = np.where(better, candidate, x)
            ratio = np.where(better, candidate_ratio, ratio)
            backward = np.where(better, candidate_backward, backward)
        fallback_residual = float(np.max(backward))
        if not math.isfinite(fallback_residual) or fallback_residual > 1e6 * floor:
            raise RootFindingError(
                f"Aberth iteration and companion-matrix roots both failed for a degree {degree} polynomial",
                best_residual=min(residual, fallback_residual) if math.isfinite(fallback_residual) else residual,
            )
        return self._root_set(f, x, ratio, fallback_residual, floor, self.max_iter)

    # Measures

    def mahler_univariate(self, f: UnivariateIntPoly, tol: Optional[float] = None) -> MeasureEstimate:
        """m(f) = log|lead| + sum_{|α|>1} log|α|"""
        return self._root_measure(f, tol, allow_split=True)

    def _root_measure(self, f: UnivariateIntPoly, tol: Optional[float], allow_split: bool) -> MeasureEstimate:
        if f.is_zero:
            raise ZeroPolynomialError()
        _, stripped = polynomial_service.strip_trivial(f)
        coefficients = stripped.coefficients
        if stripped.term_count <= 2:
            # monomials and binomials: every root has modulus |a_k/a_1|^{1/n}
            value = max(math.log(abs(c)) for c in coefficients)
            return MeasureEstimate(log_value=value, method=MeasureMethod.ROOTS, error_bound=0.0)

        try:
            root_set = self.find_roots(stripped, tol)
        except RootFindingError as e:
            logger.warning(f"{e.message}; measuring by quadrature instead")
            return self.mahler_quadrature(stripped, self.quadrature_points_for(stripped.degree))
        if allow_split and float(np.max(root_set.relative_errors)) > self.sqf_trigger:
            split = self._squarefree_measure(stripped, tol)
            if split is not None:
                return split

        moduli = root_set.moduli()
        outside = moduli > 1.0
        value = math.log(abs(root_set.leading_coefficient)) + float(np.sum(np.log(moduli[outside])))
        near = moduli > 1.0 - root_set.relative_errors
        error = float(np.sum(root_set.relative_errors[near])) + root_set.degree * _EPS
        return MeasureEstimate(
            log_value=max(value, 0.0), method=MeasureMethod.ROOTS, error_bound=error
        )

    def _squarefree_measure(self, f: UnivariateIntPoly, tol: Optional[float]) -> Optional[MeasureEstimate]:
        """Exact repeated-factor split: m(f) = log|c| + sum_i e_i m(g_i)"""
        if f.degree > self.sqf_max_degree:
            return None
        content, factors = dup_sqf_list(to_dense_zz(f), ZZ)
        if all(multiplicity == 1 for _, multiplicity in factors):
            return None
        logger.debug(f"squarefree split of a degree {f.degree} polynomial into {len(factors)} factors")
        value = math.log(abs(int(content)))
        error = 0.0
        for dense, multiplicity in factors:
            part = self._root_measure(from_dense_zz(dense), tol, allow_split=False)
            value += multiplicity * part.log_value
            error += multiplicity * part.error_bound
        return MeasureEstimate(log_value=value, method=MeasureMethod.ROOTS, error_bound=error)

    def mahler_scaled(self, g: ScaledPoly, tol: Optional[float] = None) -> MeasureEstimate:
        """m(numerator/denominator) = m(numerator) - log denominator"""
        return self.mahler_measure(g.numerator, tol=tol).shifted(-g.log_denominator)

    # Quadrature

    def _circle_log_sums(
        self, exponents: List[int], coefficients: np.ndarray, num_points: int, threads: int
    ) -> Tuple[float, int]:
        """Sum of log|f| over the midpoint grid t_j = (j + 1/2)/N, and the count of skipped zeros"""
        period = 2 * num_points
        reduced = np.array([e % period for e in exponents], dtype=np.int64)
        tolerance = self.circle_zero_tol * float(np.sum(np.abs(coefficients)))
        chunk = min(self.quad_chunk, num_points)

        def work(start: int) -> Tuple[float, int]:
            j = np.arange(start, min(start + chunk, num_points), dtype=np.int64)
            phases = (2 * np.outer(j, reduced) + reduced) % period
            values = np.exp(1j * np.pi * phases / num_points) @ coefficients
            magnitudes = np.abs(values)
            keep = magnitudes > tolerance
            return float(np.sum(np.log(magnitudes[keep]))), int(np.count_nonzero(~keep))

        starts = range(0, num_points, chunk)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                partials = list(pool.map(work, starts))
        else:
            partials = [work(start) for start in starts]
        total = float(np.sum(np.array([p[0] for p in partials])))
        skipped = sum(p[1] for p in partials)
        return total, skipped

    def mahler_quadrature(
        self, f: UnivariateIntPoly, num_points: Optional[int] = None, threads: Optional[int] = None
    ) -> MeasureEstimate:
        """Uniform-grid average of log|f(e^{2πit})| with a doubling error estimate"""
        num_points = self.quad_points if num_points is None else num_points
        threads = settings.THREADS if threads is None else threads
        if num_points < 16 or num_points & (num_points - 1):
            raise InvalidArgumentError("num_points must be a power of two and at least 16")
        if f.is_zero:
            raise ZeroPolynomialError()
        _, stripped = polynomial_service.strip_trivial(f)
        _, coefficients, height = _normalized_arrays(stripped)
        exponents = stripped.exponents

        _check_aliasing(exponents, num_points)
        fine_sum, skipped = self._circle_log_sums(exponents, coefficients, num_points, threads)
        if skipped > self.zero_skip_limit * num_points:
            raise CircleZeroSaturationError(skipped, num_points)
        if skipped:
            logger.warning(f"skipped {skipped} grid points at zeros of f on the unit circle")
        _check_aliasing(exponents, num_points // 2)
        coarse_sum, coarse_skipped = self._circle_log_sums(exponents, coefficients, num_points // 2, threads)

        log_height = math.log(height)
        fine = log_height + fine_sum / (num_points - skipped)
        coarse = log_height + coarse_sum / max(num_points // 2 - coarse_skipped, 1)
        error = abs(fine - coarse) + skipped * math.log(num_points) / num_points
        return MeasureEstimate(
            log_value=fine,
            method=MeasureMethod.QUADRATURE,
            error_bound=error,
            points=num_points,
            skipped_points=skipped,
        )

    def quadrature_points_for(self, degree: int) -> int:
        """Grid size resolving a polynomial of the given degree"""
        wanted = max(self.quad_points, 8 * degree)
        return min(1 << (wanted - 1).bit_length(), self.quad_max_points)

    def mahler_measure(
        self,
        f: UnivariateIntPoly,
        method: str = "auto",
        num_points: Optional[int] = None,
        tol: Optional[float] = None,
        threads: Optional[int] = None,
    ) -> MeasureEstimate:
        """Dispatch: roots when the degree allows it, quadrature otherwise"""
        if method not in ("auto", "roots", "quad"):
            raise InvalidArgumentError(f"unknown method {method!r}")
        if f.is_zero:
            raise ZeroPolynomialError()
        _, stripped = polynomial_service.strip_trivial(f)
        if method == "roots" or (
            method == "auto" and (stripped.degree <= self.max_degree or stripped.term_count <= 2)
        ):
            return self.mahler_univariate(f, tol)
        points = num_points or self.quadrature_points_for(stripped.degree)
        return self.mahler_quadrature(f, points, threads)


roots_measure_service = RootsMeasureService()
