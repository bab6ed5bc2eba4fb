from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Dict, Iterable, List, Tuple
from fractions import Fraction
from functools import reduce
import math

from app.config import settings
from app.utils.errors import ExponentOverflowError, InvalidArgumentError

ExponentVector = Tuple[int, ...]


def _check_exponent(exponent: int) -> None:
    if abs(exponent) > settings.EXPONENT_CAP:
        raise ExponentOverflowError(
            f"exponent {exponent} exceeds the cap 2^{settings.EXPONENT_CAP.bit_length() - 1}"
        )


class UnivariateIntPoly(BaseModel):
    """Sparse polynomial over Z; `terms` holds (exponent, coefficient) pairs
    with strictly decreasing exponents and nonzero coefficients"""

    model_config = ConfigDict(frozen=True)

    terms: Tuple[Tuple[int, int], ...] = ()

    @model_validator(mode="after")
    def _check_canonical(self):
        previous = None
        for exponent, coefficient in self.terms:
            if exponent < 0:
                raise ValueError("exponents must be nonnegative")
            if coefficient == 0:
                raise ValueError("zero coefficients are not stored")
            if previous is not None and exponent >= previous:
                raise ValueError("exponents must be strictly decreasing")
            _check_exponent(exponent)
            previous = exponent
        return self

    # Constructors

    @classmethod
    def from_terms(cls, pairs: Iterable[Tuple[int, int]]) -> "UnivariateIntPoly":
        """Build from arbitrary (exponent, coefficient) pairs; collisions are summed"""
        accumulated: Dict[int, int] = {}
        for exponent, coefficient in pairs:
            exponent = int(exponent)
            if exponent < 0:
                raise InvalidArgumentError(f"negative exponent {exponent} in a univariate polynomial")
            _check_exponent(exponent)
            accumulated[exponent] = accumulated.get(exponent, 0) + int(coefficient)
        terms = tuple(
            (e, c) for e, c in sorted(accumulated.items(), reverse=True) if c != 0
        )
        return cls.model_construct(terms=terms)

    @classmethod
    def from_dense(cls, coefficients: Iterable[int]) -> "UnivariateIntPoly":
        """Coefficients listed from the highest degree down to the constant"""
        coefficients = list(coefficients)
        degree = len(coefficients) - 1
        return cls.from_terms((degree - i, c) for i, c in enumerate(coefficients))

    @classmethod
    def constant(cls, value: int) -> "UnivariateIntPoly":
        return cls.from_terms([(0, value)])

    @classmethod
    def monomial(cls, coefficient: int, exponent: int) -> "UnivariateIntPoly":
        return cls.from_terms([(exponent, coefficient)])

    @classmethod
    def knomial(cls, coefficients: List[int], exponents: List[int]) -> "UnivariateIntPoly":
        """a_1 z^{n_1} + ... + a_{k-1} z^{n_{k-1}} + a_k"""
        if len(coefficients) != len(exponents) + 1:
            raise InvalidArgumentError("a k-nomial needs k coefficients and k-1 exponents")
        return cls.from_terms(list(zip(list(exponents) + [0], coefficients)))

    @classmethod
    def unit_knomial(cls, exponents: Iterable[int]) -> "UnivariateIntPoly":
        """z^{n_1} + ... + z^{n_{k-1}} + 1"""
        return cls.from_terms([(e, 1) for e in exponents] + [(0, 1)])

    # Views

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial"""
        return self.terms[0][0] if self.terms else -1

    @property
    def min_exponent(self) -> int:
        return self.terms[-1][0] if self.terms else 0

    @property
    def leading_coefficient(self) -> int:
        return self.terms[0][1] if self.terms else 0

    @property
    def constant_term(self) -> int:
        if self.terms and self.terms[-1][0] == 0:
            return self.terms[-1][1]
        return 0

    @property
    def exponents(self) -> List[int]:
        return [e for e, _ in self.terms]

    @property
    def coefficients(self) -> List[int]:
        return [c for _, c in self.terms]

    @property
    def content(self) -> int:
        return reduce(math.gcd, (abs(c) for _, c in self.terms), 0)

    def coefficient(self, exponent: int) -> int:
        return dict(self.terms).get(exponent, 0)

    def as_dict(self) -> Dict[int, int]:
        return dict(self.terms)

    def to_dense(self) -> List[int]:
        if not self.terms:
            return []
        dense = [0] * (self.degree + 1)
        for exponent, coefficient in self.terms:
            dense[self.degree - exponent] = coefficient
        return dense

    def evaluate(self, x: int) -> int:
        return sum(c * x ** e for e, c in self.terms)

    def is_one(self) -> bool:
        return self.terms == ((0, 1),)

    # Arithmetic

    def __add__(self, other: "UnivariateIntPoly") -> "UnivariateIntPoly":
        if isinstance(other, int):
            other = UnivariateIntPoly.constant(other)
        return UnivariateIntPoly.from_terms(self.terms + other.terms)

    def __neg__(self) -> "UnivariateIntPoly":
        return UnivariateIntPoly.model_construct(terms=tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: "UnivariateIntPoly") -> "UnivariateIntPoly":
        if isinstance(other, int):
            other = UnivariateIntPoly.constant(other)
        return self + (-other)

    def __mul__(self, other) -> "UnivariateIntPoly":
        if isinstance(other, int):
            return UnivariateIntPoly.from_terms((e, c * other) for e, c in self.terms)
        return UnivariateIntPoly.from_terms(
            (e1 + e2, c1 * c2) for e1, c1 in self.terms for e2, c2 in other.terms
        )

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "UnivariateIntPoly":
        if power < 0:
            raise InvalidArgumentError(f"negative power {power} of a polynomial")
        result = UnivariateIntPoly.constant(1)
        for _ in range(power):
            result = result * self
        return result

    def compose_power(self, m: int) -> "UnivariateIntPoly":
        """f(z^m)"""
        return UnivariateIntPoly.from_terms((e * m, c) for e, c in self.terms)

    def shift(self, j: int) -> "UnivariateIntPoly":
        """z^j f(z)"""
        return UnivariateIntPoly.from_terms((e + j, c) for e, c in self.terms)

    def __str__(self) -> str:
        from app.utils.poly_parser import format_univariate
        return format_univariate(self)


class ScaledPoly(BaseModel):
    """numerator / denominator with a positive integer denominator"""

    model_config = ConfigDict(frozen=True)

    numerator: UnivariateIntPoly
    denominator: int = Field(1, gt=0)

    def normalized(self) -> "ScaledPoly":
        common = math.gcd(self.numerator.content, self.denominator)
        if common <= 1:
            return self
        return ScaledPoly(
            numerator=UnivariateIntPoly.from_terms(
                (e, c // common) for e, c in self.numerator.terms
            ),
            denominator=self.denominator // common,
        )

    @property
    def term_count(self) -> int:
        return self.numerator.term_count

    @property
    def height(self) -> Fraction:
        return Fraction(max((abs(c) for c in self.numerator.coefficients), default=0), self.denominator)

    @property
    def log_denominator(self) -> float:
        return math.log(self.denominator)

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"({self.numerator})/{self.denominator}"


class MultiLaurentPoly(BaseModel):
    """Sparse Laurent polynomial over Z in `num_vars` variables; terms are
    (exponent vector, coefficient) pairs in decreasing lexicographic order"""

    model_config = ConfigDict(frozen=True)

    num_vars: int = Field(..., ge=1)
    terms: Tuple[Tuple[Tuple[int, ...], int], ...] = ()

    @model_validator(mode="after")
    def _check_canonical(self):
        previous = None
        for vector, coefficient in self.terms:
            if len(vector) != self.num_vars:
                raise ValueError(f"exponent vector {vector} does not have length {self.num_vars}")
            if coefficient == 0:
                raise ValueError("zero coefficients are not stored")
            if previous is not None and vector >= previous:
                raise ValueError("exponent vectors must be strictly decreasing")
            for exponent in vector:
                _check_exponent(exponent)
            previous = vector
        return self

    @classmethod
    def from_terms(cls, num_vars: int, pairs: Iterable[Tuple[Iterable[int], int]]) -> "MultiLaurentPoly":
        if num_vars < 1:
            raise InvalidArgumentError("a Laurent polynomial needs at least one variable")
        accumulated: Dict[Tuple[int, ...], int] = {}
        for vector, coefficient in pairs:
            vector = tuple(int(e) for e in vector)
            if len(vector) != num_vars:
                raise InvalidArgumentError(f"exponent vector {vector} does not have length {num_vars}")
            for exponent in vector:
                _check_exponent(exponent)
            accumulated[vector] = accumulated.get(vector, 0) + int(coefficient)
        terms = tuple(
            (v, c) for v, c in sorted(accumulated.items(), reverse=True) if c != 0
        )
        return cls.model_construct(num_vars=num_vars, terms=terms)

    @classmethod
    def from_univariate(cls, f: UnivariateIntPoly) -> "MultiLaurentPoly":
        return cls.from_terms(1, (((e,), c) for e, c in f.terms))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def support(self) -> List[Tuple[int, ...]]:
        return [v for v, _ in self.terms]

    @property
    def coefficients(self) -> List[int]:
        return [c for _, c in self.terms]

    def as_dict(self) -> Dict[Tuple[int, ...], int]:
        return dict(self.terms)

    def __add__(self, other: "MultiLaurentPoly") -> "MultiLaurentPoly":
        if other.num_vars != self.num_vars:
            raise InvalidArgumentError("variable counts differ")
        return MultiLaurentPoly.from_terms(self.num_vars, self.terms + other.terms)

    def __neg__(self) -> "MultiLaurentPoly":
        return MultiLaurentPoly.model_construct(
            num_vars=self.num_vars, terms=tuple((v, -c) for v, c in self.terms)
        )

    def __sub__(self, other: "MultiLaurentPoly") -> "MultiLaurentPoly":
        return self + (-other)

    def __mul__(self, other: "MultiLaurentPoly") -> "MultiLaurentPoly":
        if other.num_vars != self.num_vars:
            raise InvalidArgumentError("variable counts differ")
        return MultiLaurentPoly.from_terms(
            self.num_vars,
            (
                (tuple(a + b for a, b in zip(v1, v2)), c1 * c2)
                for v1, c1 in self.terms
                for v2, c2 in other.terms
            ),
        )

    def permute_variables(self, order: List[int]) -> "MultiLaurentPoly":
        """Variable i of the result is variable order[i] of self"""
        return MultiLaurentPoly.from_terms(
            self.num_vars, ((tuple(v[i] for i in order), c) for v, c in self.terms)
        )

    def negate_variable(self, index: int) -> "MultiLaurentPoly":
        """Replace z_index by its inverse"""
        return MultiLaurentPoly.from_terms(
            self.num_vars,
            ((tuple(-e if i == index else e for i, e in enumerate(v)), c) for v, c in self.terms),
        )

    def __str__(self) -> str:
        from app.utils.poly_parser import format_multivariate
        return format_multivariate(self)


class ExponentMatrix(BaseModel):
    """Integer ℓ×s matrix A acting on exponent vectors by j ↦ A·j"""

    model_config = ConfigDict(frozen=True)

    rows: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_shape(self):
        if not self.rows or not self.rows[0]:
            raise ValueError("matrix dimensions must be positive")
        width = len(self.rows[0])
        if any(len(row) != width for row in self.rows):
            raise ValueError("matrix rows must all have the same length")
        return self

    @classmethod
    def identity(cls, size: int) -> "ExponentMatrix":
        return cls(rows=tuple(tuple(int(i == j) for j in range(size)) for i in range(size)))

    @classmethod
    def from_columns(cls, columns: List[Tuple[int, ...]]) -> "ExponentMatrix":
        return cls(rows=tuple(zip(*columns)))

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def num_cols(self) -> int:
        return len(self.rows[0])

    def apply(self, vector: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(sum(a * j for a, j in zip(row, vector)) for row in self.rows)
