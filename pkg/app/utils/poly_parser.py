"""
Text form of sparse polynomials.

Grammar (whitespace insignificant):

    poly    := [sign] term (sign term)*
    term    := INT ['*'] [factors] | factors
    factors := factor (['*'] factor)*
    factor  := VAR ['^' [sign] INT]
    sign    := '+' | '-' | '−'

VAR is ``z`` in univariate mode and ``x1`` .. ``xN`` in multivariate mode.
Colliding monomials are summed; the printer emits the canonical form that
parses back to the same polynomial. The multivariate printer only names the
variables that occur, so pass the original `num_vars` back to `parse_poly`
when trailing variables are unused. Digits are ASCII only.
"""
import re
from typing import Dict, List, Optional, Tuple, Union

from app.config import settings
from app.models.polynomial import MultiLaurentPoly, UnivariateIntPoly
from app.utils.errors import ExponentOverflowError, InvalidArgumentError, PolynomialSyntaxError

UNIVARIATE = "univariate"
MULTIVARIATE = "multivariate"

_TOKEN = re.compile(r"\s*(?:(?P<int>[0-9]+)|(?P<var>z|x[0-9]+)|(?P<op>[-+*^−]))")
_TRAILING_SPACE = re.compile(r"\s*$")

Token = Tuple[str, str, int]  # (kind, text, char offset)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    position = 0
    while not _TRAILING_SPACE.fullmatch(text, position):
        match = _TOKEN.match(text, position)
        if match is None:
            offset = position + len(text[position:]) - len(text[position:].lstrip())
            raise PolynomialSyntaxError(
                f"unexpected character {text[offset]!r}", _byte_offset(text, offset)
            )
        kind = match.lastgroup
        value = match.group(kind)
        if value == "−":
            value = "-"
        tokens.append((kind, value, match.start(kind)))
        position = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str, mode: str):
        self.text = text
        self.mode = mode
        self.tokens = _tokenize(text)
        self.index = 0
        self.max_var = 0

    def _peek(self) -> Optional[Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def _error(self, message: str, token: Optional[Token] = None) -> PolynomialSyntaxError:
        offset = token[2] if token else len(self.text)
        return PolynomialSyntaxError(message, _byte_offset(self.text, offset))

    def _take(self) -> Token:
        token = self._peek()
        if token is None:
            raise self._error("unexpected end of input")
        self.index += 1
        return token

    def _is_op(self, token: Optional[Token], symbols: str) -> bool:
        return token is not None and token[0] == "op" and token[1] in symbols

    def parse(self) -> List[Tuple[Dict[int, int], int]]:
        if not self.tokens:
            raise self._error("empty polynomial")
        monomials = []
        sign = 1
        if self._is_op(self._peek(), "+-"):
            sign = -1 if self._take()[1] == "-" else 1
        monomials.append(self._term(sign))
        while self._peek() is not None:
            token = self._take()
            if not self._is_op(token, "+-"):
                raise self._error(f"expected '+' or '-', found {token[1]!r}", token)
            monomials.append(self._term(-1 if token[1] == "-" else 1))
        return monomials

    def _term(self, sign: int) -> Tuple[Dict[int, int], int]:
        coefficient = sign
        exponents: Dict[int, int] = {}
        token = self._peek()
        if token is None:
            raise self._error("expected a term")
        if token[0] == "int":
            self._take()
            coefficient *= int(token[1])
            if self._is_op(self._peek(), "*"):
                self._take()
                if self._peek() is None or self._peek()[0] != "var":
                    raise self._error("expected a variable after '*'", self._peek())
            if self._peek() is None or self._peek()[0] != "var":
                return exponents, coefficient
        elif token[0] != "var":
            raise self._error(f"expected a term, found {token[1]!r}", token)
        self._factor(exponents)
        while True:
            token = self._peek()
            if self._is_op(token, "*"):
                self._take()
                if self._peek() is None or self._peek()[0] != "var":
                    raise self._error("expected a variable after '*'", self._peek())
            elif token is None or token[0] != "var":
                break
            self._factor(exponents)
        return exponents, coefficient

    def _factor(self, exponents: Dict[int, int]) -> None:
        token = self._take()
        name = token[1]
        if self.mode == UNIVARIATE:
            if name != "z":
                raise self._error(f"variable {name!r} is not allowed in univariate mode", token)
            index = 1
        else:
            if name == "z":
                raise self._error("variable 'z' is not allowed in multivariate mode; use x1..xN", token)
            index = int(name[1:])
            if index < 1:
                raise self._error("variables are numbered from x1", token)
        self.max_var = max(self.max_var, index)
        exponent = 1
        if self._is_op(self._peek(), "^"):
            self._take()
            exponent_sign = 1
            if self._is_op(self._peek(), "+-"):
                exponent_sign = -1 if self._take()[1] == "-" else 1
            digits = self._take()
            if digits[0] != "int":
                raise self._error("expected an integer exponent", digits)
            exponent = exponent_sign * int(digits[1])
            if abs(exponent) > settings.EXPONENT_CAP:
                raise ExponentOverflowError(
                    f"exponent {exponent} at byte {_byte_offset(self.text, digits[2])} exceeds the cap"
                )
            if exponent < 0 and self.mode == UNIVARIATE:
                raise self._error("negative exponent in univariate mode", digits)
        exponents[index] = exponents.get(index, 0) + exponent


def parse_poly(
    text: str, mode: str = UNIVARIATE, num_vars: Optional[int] = None
) -> Union[UnivariateIntPoly, MultiLaurentPoly]:
    """Parse `text`; `num_vars` widens a multivariate result beyond the highest variable seen"""
    if mode not in (UNIVARIATE, MULTIVARIATE):
        raise InvalidArgumentError(f"unknown parse mode {mode!r}")
    parser = _Parser(text, mode)
    monomials = parser.parse()
    if mode == UNIVARIATE:
        return UnivariateIntPoly.from_terms((exps.get(1, 0), c) for exps, c in monomials)
    width = max(parser.max_var, num_vars or 0, 1)
    return MultiLaurentPoly.from_terms(
        width,
        ((tuple(exps.get(i + 1, 0) for i in range(width)), c) for exps, c in monomials),
    )


def _join(pieces: List[Tuple[int, str]]) -> str:
    if not pieces:
        return "0"
    out = []
    for position, (coefficient, body) in enumerate(pieces):
        magnitude = abs(coefficient)
        if body:
            text = body if magnitude == 1 else f"{magnitude}*{body}"
        else:
            text = str(magnitude)
        if position == 0:
            out.append(("-" if coefficient < 0 else "") + text)
        else:
            out.append((" - " if coefficient < 0 else " + ") + text)
    return "".join(out)


def _power(name: str, exponent: int) -> str:
    return name if exponent == 1 else f"{name}^{exponent}"


def format_univariate(f: UnivariateIntPoly) -> str:
    return _join([(c, _power("z", e) if e else "") for e, c in f.terms])


def format_multivariate(F: MultiLaurentPoly) -> str:
    """Unused trailing variables are not printed; parse back with `num_vars=F.num_vars`"""
    pieces = []
    for vector, coefficient in F.terms:
        body = "*".join(_power(f"x{i + 1}", e) for i, e in enumerate(vector) if e)
        pieces.append((coefficient, body))
    return _join(pieces)


def format_poly(p: Union[UnivariateIntPoly, MultiLaurentPoly]) -> str:
    if isinstance(p, MultiLaurentPoly):
        return format_multivariate(p)
    return format_univariate(p)
