import math

import numpy as np
import pytest

from app.models.measure import MeasureMethod
from app.services.multivar_measure_service import cbc_lattice, multivar_measure_service
from app.services.polynomial_service import polynomial_service
from app.services.roots_measure_service import roots_measure_service
from app.utils.errors import (
    DegreeTooLargeError,
    InvalidArgumentError,
    VanishingRestrictionError,
    ZeroPolynomialError,
)

# m(1 + x + y)
SMYTH_CONSTANT = 0.3230659472


class TestSafeSubstitutionIndex:
    def test_plane(self, xs):
        index = multivar_measure_service.safe_substitution_index(xs("1 + x1 + x2"))
        assert index.threshold == 1.0
        assert index.witness in ((1, -1), (-1, 1))
        assert index.first_safe_n == 2

    def test_single_variable(self, xs):
        index = multivar_measure_service.safe_substitution_index(xs("1 + x1"))
        assert index.threshold == 0.0
        assert index.first_safe_n == 1

    def test_single_monomial(self, xs):
        index = multivar_measure_service.safe_substitution_index(xs("3*x1*x2"))
        assert index.threshold == 0.0
        assert index.witness == ()

    def test_three_variables(self, xs):
        index = multivar_measure_service.safe_substitution_index(xs("x1^4 + x3 - 2"))
        # (4, 0, -1) gives 4
        assert index.threshold == 4.0

    def test_height_and_count_preserved_past_threshold(self, xs):
        for text in ("1 + x1 + x2", "3*x1^2*x2 - x2^-1 + 5", "x1 - 2*x2 + x3^2 - 7*x1*x3"):
            F = xs(text)
            start = multivar_measure_service.safe_substitution_index(F).first_safe_n
            for n in range(start, start + 6):
                g = multivar_measure_service.restrict(F, n)
                assert g.term_count == F.term_count
                assert polynomial_service.height(g) == polynomial_service.height(F)


class TestRestrict:
    @pytest.mark.parametrize("text,n,expected", [
        ("1 + x1 + x2", 3, "z^3 + z + 1"),
        ("1 + x1 + x2", 2, "z^2 + z + 1"),
        ("x1*x2^-1 + 1", 2, "z + 1"),
        ("1 + x1 + x2", 1, "2*z + 1"),
    ])
    def test_examples(self, xs, z, text, n, expected):
        assert multivar_measure_service.restrict(xs(text), n).terms == z(expected).terms

    def test_vanishing(self, xs):
        with pytest.raises(VanishingRestrictionError, match="vanishing restriction"):
            multivar_measure_service.restrict(xs("x1 - x2"), 1)

    def test_invalid_n(self, xs):
        with pytest.raises(InvalidArgumentError):
            multivar_measure_service.restrict(xs("1 + x1 + x2"), 0)


class TestBoydLawton:
    def test_cyclotomic_restriction(self, xs):
        table = multivar_measure_service.boyd_lawton_sequence(xs("1 + x1 + x2"), [2])
        assert table.rows[0].estimate.log_value == pytest.approx(0.0, abs=1e-9)
        assert table.rows[0].estimate.method == MeasureMethod.BOYD_LAWTON

    def test_factorable_restriction(self, xs):
        table = multivar_measure_service.boyd_lawton_sequence(xs("1 + x1 + x2"), [5])
        assert table.rows[0].estimate.log_value == pytest.approx(0.28119, abs=1e-4)

    def test_approaches_limit(self, xs):
        table = multivar_measure_service.boyd_lawton_sequence(xs("1 + x1 + x2"), [50, 100, 200])
        assert [row.n for row in table.rows] == [50, 100, 200]
        for row in table.rows:
            assert abs(row.estimate.log_value - SMYTH_CONSTANT) < 0.02
            assert row.height_preserved

    def test_height_flag(self, xs):
        table = multivar_measure_service.boyd_lawton_sequence(xs("1 + x1 + x2"), [1, 2])
        assert [row.height_preserved for row in table.rows] == [False, True]

    @pytest.mark.parametrize("ns", [[3, 2], [0, 4], [5, 5]])
    def test_ns_validated(self, xs, ns):
        with pytest.raises(InvalidArgumentError):
            multivar_measure_service.boyd_lawton_sequence(xs("1 + x1 + x2"), ns)

    def test_degree_cap(self, xs):
        with pytest.raises(DegreeTooLargeError):
            multivar_measure_service.boyd_lawton_sequence(xs("1 + x1 + x2"), [2 * 10 ** 6])

    def test_default_ns(self, xs):
        F = xs("1 + x1 + x2")
        ns = multivar_measure_service.default_ns(F)
        assert ns[:5] == [2, 3, 4, 6, 8]
        assert all(b > a for a, b in zip(ns, ns[1:]))
        assert multivar_measure_service.restricted_degree(F, ns[-1]) <= 10 ** 6

    def test_csv(self, xs):
        csv_text = multivar_measure_service.boyd_lawton_sequence(xs("1 + x1 + x2"), [2, 3]).to_csv()
        lines = csv_text.splitlines()
        assert lines[0] == "n,m_estimate,error_bound,height_preserved"
        assert lines[1].startswith("2,")
        assert lines[2].endswith(",true")


class TestQMC:
    def test_monomial_factor(self, xs):
        estimate = multivar_measure_service.mahler_qmc(xs("x1 + x2"))
        assert estimate.log_value == pytest.approx(0.0, abs=1e-12)
        assert estimate.method == MeasureMethod.QMC

    def test_constant(self, xs):
        estimate = multivar_measure_service.mahler_qmc(xs("5"))
        assert estimate.log_value == math.log(5)
        assert estimate.error_bound == 0.0

    def test_plane(self, xs):
        estimate = multivar_measure_service.mahler_qmc(xs("1 + x1 + x2"), budget=2 ** 20, seed=7)
        assert estimate.method == MeasureMethod.QMC
        assert estimate.points <= 2 ** 20
        assert abs(estimate.log_value - SMYTH_CONSTANT) < 2e-3

    def test_deterministic_given_seed(self, xs):
        F = xs("2 + x1 - x2 + x1*x2")
        first = multivar_measure_service.mahler_qmc(F, budget=2 ** 14, seed=3)
        second = multivar_measure_service.mahler_qmc(F, budget=2 ** 14, seed=3)
        assert first.log_value == second.log_value

    def test_torus_symmetries(self, xs):
        F = xs("3 + x1 - 2*x2 + x1*x2^2")
        base = multivar_measure_service.mahler_qmc(F, budget=2 ** 18)
        for variant in (F.permute_variables([1, 0]), F.negate_variable(0), F.negate_variable(1)):
            other = multivar_measure_service.mahler_qmc(variant, budget=2 ** 18)
            assert abs(other.log_value - base.log_value) <= 3 * (base.error_bound + other.error_bound) + 1e-3

    def test_agrees_with_restriction_tail(self, xs):
        F = xs("2 + x1 + x2 - x1*x2^-1")
        qmc = multivar_measure_service.mahler_qmc(F, budget=2 ** 18)
        tail = multivar_measure_service.boyd_lawton_sequence(F, [400]).rows[-1].estimate
        assert abs(qmc.log_value - tail.log_value) < 0.02

    def test_errors(self, xs):
        with pytest.raises(InvalidArgumentError):
            multivar_measure_service.mahler_qmc(xs("1 + x1 + x2"), budget=512)
        with pytest.raises(ZeroPolynomialError):
            multivar_measure_service.mahler_qmc(xs("x1 - x1"))

    def test_reduce_to_univariate(self, xs, z):
        G = multivar_measure_service.reduce_to_univariate(xs("x1^2*x2 + 3*x1^4*x2^2 + x2^-1"))
        assert G is None
        G = multivar_measure_service.reduce_to_univariate(xs("x1^2*x2^2 + 3*x1^4*x2^4 - 1"))
        assert G.terms == z("-z^4 + z^2 + 3").terms

    def test_collinear_support_reports_qmc(self, xs, z):
        estimate = multivar_measure_service.mahler_qmc(xs("x1^2*x2^2 + 3*x1^4*x2^4 - 1"))
        exact = roots_measure_service.mahler_measure(z("-z^4 + z^2 + 3"))
        assert estimate.method == MeasureMethod.QMC
        assert estimate.log_value == exact.log_value

    def test_lattice_zero_is_resampled(self):
        # 1 + x1 with the first lattice point at x1 = -1
        num_points = 11
        nudge = 0.5 / num_points
        total, resampled, used = multivar_measure_service._replica_sum(
            np.array([1, 0]), np.array([0.5, 0.0]), np.array([nudge, 0.0]), np.array([1.0, 1.0]), num_points, 2e-13
        )
        assert (resampled, used) == (1, num_points)
        phases = (np.arange(num_points) / num_points + 0.5)
        phases[0] += nudge
        assert total == pytest.approx(float(np.sum(np.log(np.abs(1 + np.exp(2j * np.pi * phases))))))

    def test_persistent_zero_is_dropped(self):
        total, resampled, used = multivar_measure_service._replica_sum(
            np.array([1, 0]), np.array([0.5, 0.0]), np.array([0.0, 0.0]), np.array([1.0, 1.0]), 11, 2e-13
        )
        assert (resampled, used) == (1, 10)


def test_cbc_lattice():
    assert cbc_lattice(1, 1021) == (1,)
    vector = cbc_lattice(3, 1021)
    assert vector[0] == 1
    assert all(1 <= component <= 510 for component in vector)
    assert cbc_lattice(3, 1021) == vector
