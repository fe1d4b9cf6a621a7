"""Dynamic-filter mini-language: parser and evaluator.

Grammar (whitespace-insensitive)::

    or-expr    := and-expr ('|' and-expr)*
    and-expr   := unary ('&' unary)*
    unary      := '!' unary | '(' or-expr ')' | comparison
    comparison := feature op literal
    feature    := bare identifier | double-quoted string
    op         := '>' | '>=' | '<' | '<=' | '=' | '==' | '!='
    literal    := decimal number | double-quoted string

``&`` binds tighter than ``|``; ``!`` binds tightest. String literals are
only legal with equality operators. Feature names match case-sensitively.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union

from .errors import FilterSyntaxError, FilterTypeError, UnknownFeatureError


class CmpOp(Enum):
    GT = ">"
    GE = ">="
    LT = "<"
    LE = "<="
    EQ = "=="
    NE = "!="


@dataclass(frozen=True)
class Comparison:
    feature: str
    op: CmpOp
    literal: Union[float, str]


@dataclass(frozen=True)
class And:
    left: "FilterExpr"
    right: "FilterExpr"


@dataclass(frozen=True)
class Or:
    left: "FilterExpr"
    right: "FilterExpr"


@dataclass(frozen=True)
class Not:
    inner: "FilterExpr"


FilterExpr = Union[Comparison, And, Or, Not]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")

# token kind -> human-readable name used in "expected" sets
_VALUE_TOKENS = ("number", "string")
_OPERAND_TOKENS = ("identifier", "string", "'('", "'!'")


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT NUMBER STRING OP AND OR NOT LPAREN RPAREN EOF
    text: str
    value: Union[float, str, CmpOp, None]
    offset: int


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch == '"':
            j = src.find('"', i + 1)
            if j < 0:
                raise FilterSyntaxError("unterminated string", offset=i)
            tokens.append(_Token("STRING", src[i : j + 1], src[i + 1 : j], i))
            i = j + 1
            continue
        if ch in "<>=!":
            two = src[i : i + 2]
            if two in (">=", "<=", "==", "!="):
                tokens.append(_Token("OP", two, CmpOp(two), i))
                i += 2
                continue
            if ch == ">":
                tokens.append(_Token("OP", ch, CmpOp.GT, i))
            elif ch == "<":
                tokens.append(_Token("OP", ch, CmpOp.LT, i))
            elif ch == "=":
                tokens.append(_Token("OP", ch, CmpOp.EQ, i))
            else:
                tokens.append(_Token("NOT", ch, None, i))
            i += 1
            continue
        if ch == "&":
            tokens.append(_Token("AND", ch, None, i))
            i += 1
            continue
        if ch == "|":
            tokens.append(_Token("OR", ch, None, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("LPAREN", ch, None, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("RPAREN", ch, None, i))
            i += 1
            continue
        m = _NUMBER_RE.match(src, i)
        if m and (ch.isdigit() or ch in "+-."):
            tokens.append(_Token("NUMBER", m.group(), float(m.group()), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(src, i)
        if m:
            tokens.append(_Token("IDENT", m.group(), m.group(), i))
            i = m.end()
            continue
        raise FilterSyntaxError(
            f"unexpected character {ch!r}", offset=i, expected=_OPERAND_TOKENS
        )
    tokens.append(_Token("EOF", "", None, n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, expected: tuple[str, ...]) -> FilterSyntaxError:
        return FilterSyntaxError(message, offset=self.peek().offset, expected=expected)

    def parse_or(self) -> FilterExpr:
        expr = self.parse_and()
        while self.peek().kind == "OR":
            self.advance()
            expr = Or(expr, self.parse_and())
        return expr

    def parse_and(self) -> FilterExpr:
        expr = self.parse_unary()
        while self.peek().kind == "AND":
            self.advance()
            expr = And(expr, self.parse_unary())
        return expr

    def parse_unary(self) -> FilterExpr:
        tok = self.peek()
        if tok.kind == "NOT":
            self.advance()
            return Not(self.parse_unary())
        if tok.kind == "LPAREN":
            self.advance()
            expr = self.parse_or()
            if self.peek().kind != "RPAREN":
                raise self.fail("expected ')'", expected=("')'",))
            self.advance()
            return expr
        if tok.kind in ("IDENT", "STRING"):
            return self.parse_comparison()
        raise self.fail(
            f"expected a comparison, got {tok.text or 'end of input'!r}",
            expected=_OPERAND_TOKENS,
        )

    def parse_comparison(self) -> Comparison:
        feature = self.advance().value
        op_tok = self.peek()
        if op_tok.kind != "OP":
            raise self.fail("expected a comparison operator", expected=("operator",))
        self.advance()
        lit_tok = self.peek()
        if lit_tok.kind == "NUMBER":
            self.advance()
            return Comparison(str(feature), op_tok.value, float(lit_tok.value))
        if lit_tok.kind == "STRING":
            if op_tok.value not in (CmpOp.EQ, CmpOp.NE):
                raise FilterSyntaxError(
                    "string literal requires '=' or '!='",
                    offset=lit_tok.offset,
                    expected=("number",),
                )
            self.advance()
            return Comparison(str(feature), op_tok.value, str(lit_tok.value))
        raise self.fail("expected a number or string literal", expected=_VALUE_TOKENS)


def parse(source: str) -> FilterExpr:
    """Parse a filter expression, raising FilterSyntaxError with byte offset."""
    if source.strip() == "":
        raise FilterSyntaxError(
            "empty filter expression", offset=0, expected=_OPERAND_TOKENS
        )
    parser = _Parser(_tokenize(source))
    expr = parser.parse_or()
    if parser.peek().kind != "EOF":
        raise parser.fail(
            f"unexpected trailing input {parser.peek().text!r}", expected=("end of input",)
        )
    return expr


def _compare(op: CmpOp, value: float, literal: float) -> bool:
    if op is CmpOp.GT:
        return value > literal
    if op is CmpOp.GE:
        return value >= literal
    if op is CmpOp.LT:
        return value < literal
    if op is CmpOp.LE:
        return value <= literal
    if op is CmpOp.EQ:
        return value == literal
    return value != literal


def eval_expr(expr: FilterExpr, row: Mapping[str, Union[float, str]]) -> bool:
    """Evaluate against a feature-name -> value mapping. Pure."""
    if isinstance(expr, Comparison):
        if expr.feature not in row:
            raise UnknownFeatureError([expr.feature])
        value = row[expr.feature]
        if isinstance(expr.literal, str):
            # parser guarantees EQ/NE here
            if not isinstance(value, str):
                raise FilterTypeError(
                    f"feature {expr.feature!r} is numeric, compared to a string"
                )
            eq = value == expr.literal
            return eq if expr.op is CmpOp.EQ else not eq
        if isinstance(value, str):
            raise FilterTypeError(
                f"feature {expr.feature!r} is a string column, "
                f"{expr.op.value!r} needs a numeric feature"
            )
        return _compare(expr.op, float(value), expr.literal)
    if isinstance(expr, And):
        return eval_expr(expr.left, row) and eval_expr(expr.right, row)
    if isinstance(expr, Or):
        return eval_expr(expr.left, row) or eval_expr(expr.right, row)
    if isinstance(expr, Not):
        return not eval_expr(expr.inner, row)
    raise TypeError(f"not a filter expression: {expr!r}")


def referenced_features(expr: FilterExpr) -> set[str]:
    if isinstance(expr, Comparison):
        return {expr.feature}
    if isinstance(expr, (And, Or)):
        return referenced_features(expr.left) | referenced_features(expr.right)
    if isinstance(expr, Not):
        return referenced_features(expr.inner)
    raise TypeError(f"not a filter expression: {expr!r}")


def _render_literal(lit: Union[float, str]) -> str:
    if isinstance(lit, str):
        return f'"{lit}"'
    return repr(lit)


def _render_feature(name: str) -> str:
    if _IDENT_RE.fullmatch(name):
        return name
    return f'"{name}"'


def to_string(expr: FilterExpr) -> str:
    """Print with explicit parentheses; parse(to_string(e)) == e."""
    if isinstance(expr, Comparison):
        return (
            f"{_render_feature(expr.feature)} {expr.op.value} "
            f"{_render_literal(expr.literal)}"
        )
    if isinstance(expr, And):
        return f"({to_string(expr.left)} & {to_string(expr.right)})"
    if isinstance(expr, Or):
        return f"({to_string(expr.left)} | {to_string(expr.right)})"
    if isinstance(expr, Not):
        return f"!({to_string(expr.inner)})"
    raise TypeError(f"not a filter expression: {expr!r}")
