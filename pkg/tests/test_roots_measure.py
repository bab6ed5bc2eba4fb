import math

import numpy as np
import pytest

from app.models.measure import MeasureMethod
from app.models.polynomial import UnivariateIntPoly
from app.services.polynomial_service import polynomial_service
from app.services.roots_measure_service import roots_measure_service
from app.utils.errors import (
    CircleZeroSaturationError,
    DegreeTooLargeError,
    InvalidArgumentError,
    RootFindingError,
    ZeroPolynomialError,
)
from tests.conftest import random_knomial

QUADRATIC_M = math.log((5 + math.sqrt(21)) / 2)


class TestFindRoots:
    def test_linear(self, z):
        roots = roots_measure_service.find_roots(z("z - 2"))
        assert roots.degree == 1
        assert abs(roots.roots[0] - 2) < 1e-12

    def test_quadratic(self, z):
        roots = roots_measure_service.find_roots(z("z^2 + 5*z + 1"))
        found = sorted(roots.roots.real)
        assert found == pytest.approx([(-5 - math.sqrt(21)) / 2, (-5 + math.sqrt(21)) / 2], abs=1e-10)
        assert np.max(np.abs(roots.roots.imag)) < 1e-10

    def test_phi_six_on_unit_circle(self, z):
        roots = roots_measure_service.find_roots(z("z^2 - z + 1"))
        assert roots.moduli() == pytest.approx([1.0, 1.0], abs=1e-10)

    def test_sparse_high_degree(self, z):
        f = z("z^400 + 7*z^3 - 2")
        roots = roots_measure_service.find_roots(f)
        assert roots.degree == 400
        values = [abs(complex(sum(c * r ** e for e, c in f.terms))) for r in roots.roots[:20]]
        assert max(values) < 1e-6

    def test_deterministic(self, z):
        f = z("3*z^37 - z^11 + 4*z^2 + 1")
        first = roots_measure_service.find_roots(f)
        second = roots_measure_service.find_roots(f)
        assert np.array_equal(first.roots, second.roots)

    def test_preconditions(self, z):
        with pytest.raises(ZeroPolynomialError):
            roots_measure_service.find_roots(UnivariateIntPoly())
        with pytest.raises(InvalidArgumentError):
            roots_measure_service.find_roots(z("z^3 + z"))
        with pytest.raises(DegreeTooLargeError):
            roots_measure_service.find_roots(z("z^10001 + 2*z + 1"))

    def test_root_collapsing_to_origin_recovers(self, z):
        estimate = roots_measure_service.mahler_univariate(z("29*z^155 + 13*z^154 - 27*z^139 + 97*z^138 - 27"))
        assert estimate.method == MeasureMethod.ROOTS
        assert estimate.log_value == pytest.approx(4.5738, abs=1e-3)

    def test_companion_fallback(self, z, monkeypatch):
        monkeypatch.setattr(roots_measure_service, "max_iter", 0)
        roots = roots_measure_service.find_roots(z("z^2 + 5*z + 1"))
        assert sorted(roots.roots.real) == pytest.approx(
            [(-5 - math.sqrt(21)) / 2, (-5 + math.sqrt(21)) / 2], abs=1e-10
        )
        estimate = roots_measure_service.mahler_univariate(z("z^2 + 5*z + 1"))
        assert estimate.method == MeasureMethod.ROOTS
        assert estimate.log_value == pytest.approx(QUADRATIC_M, abs=1e-10)

    def test_quadrature_fallback(self, z, monkeypatch):
        monkeypatch.setattr(roots_measure_service, "max_iter", 0)
        monkeypatch.setattr(roots_measure_service, "fallback_max_degree", 0)
        with pytest.raises(RootFindingError):
            roots_measure_service.find_roots(z("z^2 + 5*z + 1"))
        estimate = roots_measure_service.mahler_univariate(z("z^2 + 5*z + 1"))
        assert estimate.method == MeasureMethod.QUADRATURE
        assert estimate.log_value == pytest.approx(QUADRATIC_M, abs=1e-8)


class TestMahlerUnivariate:
    @pytest.mark.parametrize("text,expected", [
        ("3*z^7 + 5", math.log(5)),
        ("z + 1", 0.0),
        ("z^2 + 5*z + 1", QUADRATIC_M),
        ("z^2 - z + 1", 0.0),
        ("-4*z^3", math.log(4)),
        ("z^5 + z^3", 0.0),
    ])
    def test_examples(self, z, text, expected):
        estimate = roots_measure_service.mahler_univariate(z(text))
        assert estimate.method == MeasureMethod.ROOTS
        assert estimate.log_value == pytest.approx(expected, abs=1e-9)

    def test_classical_measure(self, z):
        assert roots_measure_service.mahler_univariate(z("z^2 + 5*z + 1")).mahler == pytest.approx(4.7913, abs=1e-4)

    def test_binomials_exact(self, rng):
        for _ in range(20):
            a1, a2 = (int(c) for c in rng.integers(1, 1000, size=2))
            n = int(rng.integers(1, 5000))
            estimate = roots_measure_service.mahler_univariate(UnivariateIntPoly.knomial([a1, -a2], [n]))
            assert abs(estimate.log_value - math.log(max(a1, a2))) <= 1e-12

    def test_repeated_factor(self, z):
        f = z("z^2 + 5*z + 1") ** 3 * z("z^2 + z + 1") ** 2
        assert roots_measure_service.mahler_univariate(f).log_value == pytest.approx(3 * QUADRATIC_M, abs=1e-7)

    def test_zero_rejected(self):
        with pytest.raises(ZeroPolynomialError):
            roots_measure_service.mahler_univariate(UnivariateIntPoly())

    def test_reciprocal_invariance(self, knomial_corpus):
        for f in knomial_corpus:
            m = roots_measure_service.mahler_univariate(f).log_value
            m_star = roots_measure_service.mahler_univariate(polynomial_service.reciprocal(f)).log_value
            assert abs(m - m_star) <= 1e-9 * max(1.0, m)

    def test_trivial_upper_bound(self, knomial_corpus):
        for f in knomial_corpus:
            m = roots_measure_service.mahler_univariate(f).log_value
            assert m <= math.log(f.term_count * polynomial_service.height(f)) + 1e-9

    def test_derivative_does_not_increase(self, knomial_corpus):
        for f in knomial_corpus[:30]:
            m = roots_measure_service.mahler_univariate(f)
            m_prime = roots_measure_service.mahler_scaled(polynomial_service.derivative_scaled(f))
            assert m_prime.log_value <= m.log_value + 1e-9 + m.error_bound + m_prime.error_bound

    def test_log_additivity(self, rng):
        for _ in range(10):
            f = random_knomial(rng, int(rng.integers(2, 6)), max_coeff=20, max_degree=30)
            g = random_knomial(rng, int(rng.integers(2, 6)), max_coeff=20, max_degree=30)
            product = roots_measure_service.mahler_univariate(f * g).log_value
            separate = (
                roots_measure_service.mahler_univariate(f).log_value
                + roots_measure_service.mahler_univariate(g).log_value
            )
            assert product == pytest.approx(separate, abs=1e-9 * max(1.0, separate))


class TestQuadrature:
    def test_linear(self, z):
        estimate = roots_measure_service.mahler_quadrature(z("z - 2"), 1024)
        assert estimate.method == MeasureMethod.QUADRATURE
        assert estimate.points == 1024
        assert abs(estimate.log_value - math.log(2)) < 1e-12

    def test_matches_roots(self, z):
        f = z("z^2 + 5*z + 1")
        quad = roots_measure_service.mahler_quadrature(f, 2 ** 16)
        roots = roots_measure_service.mahler_univariate(f)
        assert abs(quad.log_value - roots.log_value) < 1e-9

    def test_unit_circle_root(self, z):
        estimate = roots_measure_service.mahler_quadrature(z("z + 1"), 2 ** 16)
        assert abs(estimate.log_value) < 1e-4

    def test_agrees_within_error_bounds(self, z):
        f = z("2*z^9 - 3*z^4 + 11*z + 5")
        quad = roots_measure_service.mahler_quadrature(f)
        roots = roots_measure_service.mahler_univariate(f)
        assert abs(quad.log_value - roots.log_value) <= quad.error_bound + roots.error_bound + 1e-9

    def test_threads_do_not_change_result(self, z):
        f = z("z^300 - 4*z^17 + 9")
        single = roots_measure_service.mahler_quadrature(f, 2 ** 16, threads=1)
        pooled = roots_measure_service.mahler_quadrature(f, 2 ** 16, threads=4)
        assert single.log_value == pooled.log_value

    @pytest.mark.parametrize("points", [8, 100, 1000])
    def test_invalid_grid(self, z, points):
        with pytest.raises(InvalidArgumentError):
            roots_measure_service.mahler_quadrature(z("z + 3"), points)

    def test_saturation(self, z):
        with pytest.raises(CircleZeroSaturationError) as exc_info:
            roots_measure_service.mahler_quadrature(z("z^16 + 1"), 16)
        assert exc_info.value.skipped == 16

    @pytest.mark.parametrize("text", ["z^40 + z^8 + 1", "z^24 + z^8 + 1"])
    def test_aliased_exponents_refused(self, z, text):
        with pytest.raises(DegreeTooLargeError):
            roots_measure_service.mahler_quadrature(z(text), 16)

    def test_distinct_residues_accepted(self, z):
        estimate = roots_measure_service.mahler_quadrature(z("z^9 + z^8 + 3"), 16)
        assert estimate.points == 16


class TestDispatch:
    def test_unknown_method(self, z):
        with pytest.raises(InvalidArgumentError):
            roots_measure_service.mahler_measure(z("z + 1"), method="newton")

    def test_huge_binomial_stays_exact(self, z):
        estimate = roots_measure_service.mahler_measure(z("z^1000000000 + 7"))
        assert estimate.method == MeasureMethod.ROOTS
        assert estimate.log_value == pytest.approx(math.log(7), abs=1e-12)

    def test_huge_degree_uses_quadrature(self, z):
        estimate = roots_measure_service.mahler_measure(z("z^20000 + z + 3"))
        assert estimate.method == MeasureMethod.QUADRATURE
        assert math.log(3) - 1e-3 <= estimate.log_value <= math.log(5) + 1e-3

    def test_forced_roots_refused_above_cap(self, z):
        with pytest.raises(DegreeTooLargeError):
            roots_measure_service.mahler_measure(z("z^20000 + z + 3"), method="roots")

    def test_aliased_huge_degree_refused(self, z):
        with pytest.raises(DegreeTooLargeError):
            roots_measure_service.mahler_measure(z("z^33554433 + 2*z + 2"))

    def test_quadrature_points_for(self):
        assert roots_measure_service.quadrature_points_for(10) == 2 ** 16
        assert roots_measure_service.quadrature_points_for(20000) == 2 ** 18
