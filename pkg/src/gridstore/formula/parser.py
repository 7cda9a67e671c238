"""Tokenizer and recursive-descent parser for the formula language.

Standard precedence (comparison < additive < multiplicative < unary),
left-associative, parentheses honored. ``$`` anchors are accepted and
ignored. Error offsets are 1-based byte positions into the original text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from gridstore.core import Region, letters_to_col
from gridstore.formula.ast import (
    FUNCTIONS,
    AttrRef,
    Bin,
    Call,
    DeadRef,
    FormulaExpr,
    Lit,
    Neg,
    RangeRef,
    Ref,
)


class FormulaError(ValueError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<deadref>\#REF!)
  | (?P<ref>\$?[A-Za-z]{1,3}\$?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|<>|[-+*/():,<>=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ref | ident | op | end
    text: str
    offset: int  # 1-based


def _tokenize(text: str, start: int) -> list[_Token]:
    tokens = []
    pos = start
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos]!r}", pos + 1)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(_Token("end", "", pos + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], allow_attrs: bool) -> None:
        self.tokens = tokens
        self.pos = 0
        self.allow_attrs = allow_attrs

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise FormulaError(f"expected {op!r}", tok.offset)
        return self.advance()

    def parse(self) -> FormulaExpr:
        expr = self.comparison()
        tok = self.peek()
        if tok.kind != "end":
            raise FormulaError(f"unexpected token {tok.text!r}", tok.offset)
        return expr

    def comparison(self) -> FormulaExpr:
        left = self.additive()
        while self.peek().kind == "op" and self.peek().text in ("=", "<>", "<", "<=", ">", ">="):
            op = self.advance().text
            left = Bin(op, left, self.additive())
        return left

    def additive(self) -> FormulaExpr:
        left = self.multiplicative()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.advance().text
            left = Bin(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> FormulaExpr:
        left = self.unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.advance().text
            left = Bin(op, left, self.unary())
        return left

    def unary(self) -> FormulaExpr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.advance()
            return self.unary()
        return self.primary()

    def primary(self) -> FormulaExpr:
        tok = self.advance()
        if tok.kind == "number":
            return Lit(float(tok.text), tok.text)
        if tok.kind == "deadref":
            return DeadRef()
        if tok.kind == "ref":
            return self.ref_or_range(tok)
        if tok.kind == "ident":
            name = tok.text.upper()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if name not in FUNCTIONS:
                    raise FormulaError(f"unknown function {tok.text!r}", tok.offset)
                return self.call(name)
            if self.allow_attrs:
                return AttrRef(tok.text)
            raise FormulaError(f"unexpected name {tok.text!r}", tok.offset)
        if tok.kind == "op" and tok.text == "(":
            expr = self.comparison()
            self.expect_op(")")
            return expr
        if tok.kind == "end":
            raise FormulaError("unexpected end of formula", tok.offset)
        raise FormulaError(f"unexpected token {tok.text!r}", tok.offset)

    def ref_or_range(self, tok: _Token) -> FormulaExpr:
        first = _decode_ref(tok)
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == ":":
            self.advance()
            second_tok = self.advance()
            if second_tok.kind != "ref":
                raise FormulaError("expected cell reference after ':'", second_tok.offset)
            second = _decode_ref(second_tok)
            region = Region(
                min(first.row, second.row),
                min(first.col, second.col),
                max(first.row, second.row),
                max(first.col, second.col),
            )
            return RangeRef(region)
        return first

    def call(self, name: str) -> FormulaExpr:
        self.expect_op("(")
        args: list[FormulaExpr] = []
        if not (self.peek().kind == "op" and self.peek().text == ")"):
            args.append(self.comparison())
            while self.peek().kind == "op" and self.peek().text == ",":
                self.advance()
                args.append(self.comparison())
        tok = self.peek()
        if tok.kind != "op" or tok.text != ")":
            raise FormulaError("expected ')'", tok.offset)
        self.advance()
        return Call(name, tuple(args))


_REF_RE = re.compile(r"\$?([A-Za-z]+)\$?(\d+)$")


def _decode_ref(tok: _Token) -> Ref:
    m = _REF_RE.match(tok.text)
    if not m:
        raise FormulaError(f"malformed reference {tok.text!r}", tok.offset)
    row = int(m.group(2))
    if row < 1:
        raise FormulaError(f"row must be >= 1 in {tok.text!r}", tok.offset)
    return Ref(row, letters_to_col(m.group(1)))


def parse_formula(src: str) -> FormulaExpr:
    """Parse a formula cell's source, which must begin with '='."""
    if not src.startswith("="):
        raise FormulaError("formula must begin with '='", 1)
    return _Parser(_tokenize(src, 1), allow_attrs=False).parse()


def parse_expression(src: str) -> FormulaExpr:
    """Parse a bare expression (no '=' prefix)."""
    return _Parser(_tokenize(src, 0), allow_attrs=False).parse()


def parse_predicate(src: str) -> FormulaExpr:
    """Parse a filter predicate; bare names become attribute references."""
    return _Parser(_tokenize(src, 0), allow_attrs=True).parse()
