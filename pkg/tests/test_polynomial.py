import pytest

from app.models.polynomial import ExponentMatrix, MultiLaurentPoly, ScaledPoly, UnivariateIntPoly
from app.services.polynomial_service import polynomial_service
from app.utils.errors import (
    DerivativeDegenerateError,
    ExponentOverflowError,
    InvalidArgumentError,
    ZeroPolynomialError,
)
from tests.conftest import random_knomial


class TestUnivariateIntPoly:
    def test_from_terms_sums_collisions_and_drops_zeros(self):
        f = UnivariateIntPoly.from_terms([(2, 1), (2, 1), (1, 3), (1, -3), (0, 4)])
        assert f.terms == ((2, 2), (0, 4))
        assert f.term_count == 2

    def test_zero_polynomial(self):
        zero = UnivariateIntPoly()
        assert zero.is_zero
        assert zero.degree == -1
        assert str(zero) == "0"

    def test_validator_rejects_unsorted_terms(self):
        with pytest.raises(ValueError):
            UnivariateIntPoly(terms=((1, 1), (2, 1)))

    def test_negative_exponent_rejected(self):
        with pytest.raises(InvalidArgumentError):
            UnivariateIntPoly.from_terms([(-1, 1)])

    def test_exponent_cap(self):
        with pytest.raises(ExponentOverflowError):
            UnivariateIntPoly.monomial(1, 2 ** 62 + 1)

    def test_knomial_constructor(self):
        f = UnivariateIntPoly.knomial([3, -7, 1], [5, 2])
        assert f.terms == ((5, 3), (2, -7), (0, 1))
        assert UnivariateIntPoly.unit_knomial([4, 3, 2, 1]).coefficients == [1] * 5

    def test_arithmetic(self):
        f = UnivariateIntPoly.from_dense([1, 1])
        assert (f * f).terms == ((2, 1), (1, 2), (0, 1))
        assert (f ** 3).coefficients == [1, 3, 3, 1]
        assert (f - f).is_zero
        assert (f + 1).terms == ((1, 1), (0, 2))
        assert f.compose_power(3).terms == ((3, 1), (0, 1))
        assert f.shift(2).terms == ((3, 1), (2, 1))

    def test_power_edge_cases(self):
        f = UnivariateIntPoly.from_dense([1, 1])
        assert (f ** 0).terms == ((0, 1),)
        with pytest.raises(InvalidArgumentError):
            f ** -1

    def test_dense_round_trip(self):
        f = UnivariateIntPoly.knomial([2, -1, 5], [4, 1])
        assert UnivariateIntPoly.from_dense(f.to_dense()).terms == f.terms

    def test_content_and_evaluate(self):
        f = UnivariateIntPoly.knomial([6, 4, 2], [3, 1])
        assert f.content == 2
        assert f.evaluate(1) == 12


class TestHeight:
    @pytest.mark.parametrize("terms,expected", [
        ([(5, 3), (2, -7), (0, 1)], 7),
        ([(3, 1), (2, 3), (1, 3), (0, 1)], 3),
        ([], 0),
    ])
    def test_univariate(self, terms, expected):
        assert polynomial_service.height(UnivariateIntPoly.from_terms(terms)) == expected

    def test_multivariate(self, xs):
        assert polynomial_service.height(xs("1 + x1*x2^-2 - 4*x1^3")) == 4


class TestReciprocal:
    def test_coefficient_reversal(self, z):
        assert polynomial_service.reciprocal(z("z^3 + 2*z + 5")).terms == z("5*z^3 + 2*z^2 + 1").terms

    def test_palindromic_fixed_point(self, z):
        f = z("z^9 + 1")
        assert polynomial_service.reciprocal(f).terms == f.terms

    def test_general_knomial(self):
        f = UnivariateIntPoly.knomial([2, 3, 5, 7], [9, 4, 1])
        expected = UnivariateIntPoly.knomial([7, 5, 3, 2], [9, 8, 5])
        assert polynomial_service.reciprocal(f).terms == expected.terms

    def test_zero_rejected(self):
        with pytest.raises(ZeroPolynomialError, match="undefined for zero polynomial"):
            polynomial_service.reciprocal(UnivariateIntPoly())

    def test_involution_and_height(self, knomial_corpus):
        for f in knomial_corpus:
            star = polynomial_service.reciprocal(f)
            assert polynomial_service.reciprocal(star).terms == f.terms
            assert polynomial_service.height(star) == polynomial_service.height(f)


class TestDerivativeScaled:
    def test_quadratic(self, z):
        g = polynomial_service.derivative_scaled(z("z^2 + 5*z + 1"))
        assert g.numerator.terms == ((1, 2), (0, 5))
        assert g.denominator == 2

    def test_binomial_normalizes_to_monomial(self, z):
        g = polynomial_service.derivative_scaled(z("z^10 + 7")).normalized()
        assert g.numerator.terms == ((9, 1),)
        assert g.denominator == 1

    def test_term_count_drops_by_one(self, z):
        g = polynomial_service.derivative_scaled(z("z^3 + z + 1"))
        assert g.numerator.terms == ((2, 3), (0, 1))
        assert g.denominator == 3

    def test_constant_rejected(self):
        with pytest.raises(DerivativeDegenerateError, match="derivative degenerate"):
            polynomial_service.derivative_scaled(UnivariateIntPoly.constant(4))

    def test_scaled_height(self):
        g = ScaledPoly(numerator=UnivariateIntPoly.knomial([2, 5], [1]), denominator=2)
        assert str(g.height) == "5/2"
        assert str(g) == "(2*z + 5)/2"


class TestStripTrivial:
    @pytest.mark.parametrize("text,j,rest", [
        ("z^5 + z^3", 3, "z^2 + 1"),
        ("z^2 + z + 1", 0, "z^2 + z + 1"),
        ("4*z^7", 7, "4"),
    ])
    def test_examples(self, z, text, j, rest):
        power, stripped = polynomial_service.strip_trivial(z(text))
        assert power == j
        assert stripped.terms == z(rest).terms

    def test_zero_rejected(self):
        with pytest.raises(ZeroPolynomialError):
            polynomial_service.strip_trivial(UnivariateIntPoly())


class TestSubstitution:
    def test_powers(self, xs):
        F = xs("1 + x1 + x2")
        assert polynomial_service.substitute_powers(F, (1, 3)).terms == ((3, 1), (1, 1), (0, 1))

    def test_powers_collision(self, xs):
        g = polynomial_service.substitute_powers(xs("1 + x1 + x2"), (1, 1))
        assert g.terms == ((1, 2), (0, 1))

    def test_powers_zero(self, xs):
        assert polynomial_service.substitute_powers(xs("x1 - x1"), (1,)).is_zero

    def test_powers_length_mismatch(self, xs):
        with pytest.raises(InvalidArgumentError):
            polynomial_service.substitute_powers(xs("1 + x1 + x2"), (1, 2, 3))

    def test_laurent_normalization(self, xs):
        g = polynomial_service.substitute_powers(xs("x1*x2^-1 + 1"), (1, 2))
        assert g.terms == ((1, 1), (0, 1))

    def test_matrix_collapse(self):
        F = MultiLaurentPoly.from_terms(2, [((1, 0), 3), ((0, 1), 4)])
        A = ExponentMatrix(rows=((1, 1),))
        result = polynomial_service.substitute_matrix(F, A)
        assert result.terms == (((1,), 7),)

    def test_matrix_identity(self, xs):
        F = xs("x1 + x2 + 1")
        assert polynomial_service.substitute_matrix(F, ExponentMatrix.identity(2)).terms == F.terms

    def test_matrix_row(self, xs):
        result = polynomial_service.substitute_matrix(xs("x1 + x2"), ExponentMatrix(rows=((2, 3),)))
        assert result.terms == (((3,), 1), ((2,), 1))

    def test_matrix_shape_mismatch(self, xs):
        with pytest.raises(InvalidArgumentError):
            polynomial_service.substitute_matrix(xs("x1 + x2"), ExponentMatrix.identity(3))

    def test_linear_form_preimage(self, xs):
        F = xs("3*x1^2*x2 - x2^-1 + 5")
        linear, A = polynomial_service.linear_form_preimage(F)
        assert linear.term_count == 3
        assert A.num_rows == 2 and A.num_cols == 3
        assert polynomial_service.substitute_matrix(linear, A).terms == F.terms

    def test_symmetry_operators(self, xs):
        F = xs("x1 + 2*x2^3")
        assert F.permute_variables([1, 0]).terms == xs("x2 + 2*x1^3").terms
        assert F.negate_variable(1).terms == xs("x1 + 2*x2^-3").terms


class TestDivision:
    def test_exact_division(self, z):
        quotient, remainder = polynomial_service.divmod(z("z^3 + 1"), z("z + 1"))
        assert quotient.terms == z("z^2 - z + 1").terms
        assert remainder.is_zero

    def test_divides(self, z):
        assert polynomial_service.divides(z("z^2 + z + 1"), z("z^6 + z^3 + 1") * z("z^2 + z + 1"))
        assert not polynomial_service.divides(z("z + 1"), z("z^2 + z + 1"))

    def test_product(self, rng):
        f = random_knomial(rng, 3, max_degree=20)
        g = random_knomial(rng, 4, max_degree=20)
        assert polynomial_service.product([f, g]).terms == (f * g).terms
