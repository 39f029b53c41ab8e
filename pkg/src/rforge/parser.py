"""Recursive-descent parser for the ASCII formula syntax.

Grammar::

    formula   := or_expr ("=>" formula)?          right-associative
    or_expr   := and_expr ("|" and_expr)*
    and_expr  := unary ("&" unary)*
    unary     := "~" unary
               | ("forall" | "exists") IDENT "." formula
               | atom
               | "(" formula ")"
    atom      := UPPER_IDENT
               | LOWER_IDENT ("(" term ("," term)* ")")?
    term      := LOWER_IDENT ("(" term ("," term)* ")")?

Uppercase identifiers are schema placeholders.  A lowercase identifier bound
by an enclosing quantifier is an individual variable; otherwise it is a
predicate (formula position) or a constant/function (term position).
Quantifier scope runs to the end of the enclosing expression.

Within one :class:`SignatureContext` every predicate and every
function/constant name must be used at a single arity; share one context
across related parses (for example all lines of a premise file) to get that
check across formulas.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .formulas import (
    And,
    Entail,
    EXISTS,
    FORALL,
    Formula,
    Fun,
    Not,
    Or,
    Pred,
    Quantified,
    SchemaAtom,
    Term,
    Var,
)


class ParseError(ValueError):
    """Syntax or arity error, carrying the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


@dataclass
class SignatureContext:
    """Arity bookkeeping shared across all formulas of one problem."""

    predicates: dict[str, int] = field(default_factory=dict)
    functions: dict[str, int] = field(default_factory=dict)

    def note_predicate(self, name: str, arity: int, line: int, col: int) -> None:
        seen = self.predicates.setdefault(name, arity)
        if seen != arity:
            raise ParseError(
                f"arity mismatch: predicate '{name}' used with {arity} argument(s), "
                f"previously {seen}",
                line,
                col,
            )

    def note_function(self, name: str, arity: int, line: int, col: int) -> None:
        seen = self.functions.setdefault(name, arity)
        if seen != arity:
            raise ParseError(
                f"arity mismatch: function '{name}' used with {arity} argument(s), "
                f"previously {seen}",
                line,
                col,
            )


_TOKEN_RE = re.compile(r"=>|[A-Za-z][A-Za-z0-9_]*|[()~&|,.]|\S")


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line_start = 0
    line_no = 1
    pos = 0
    length = len(text)
    while pos < length:
        ch = text[pos]
        if ch == "\n":
            line_no += 1
            pos += 1
            line_start = pos
            continue
        if ch.isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        assert m is not None
        tok = m.group(0)
        col = pos - line_start + 1
        if not re.fullmatch(r"=>|[A-Za-z][A-Za-z0-9_]*|[()~&|,.]", tok):
            raise ParseError(f"unexpected character {tok!r}", line_no, col)
        tokens.append(_Token(tok, line_no, col))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], context: SignatureContext):
        self.tokens = tokens
        self.pos = 0
        self.context = context
        self.bound: list[str] = []  # stack of quantified variable names

    def error(self, message: str) -> ParseError:
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            return ParseError(message, tok.line, tok.column)
        if self.tokens:
            last = self.tokens[-1]
            return ParseError(message + " (at end of input)", last.line, last.column + len(last.text))
        return ParseError(message, 1, 1)

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].text
        return None

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.peek() != text:
            raise self.error(f"expected {text!r}")
        return self.advance()

    def parse_formula(self) -> Formula:
        left = self.parse_or()
        if self.peek() == "=>":
            self.advance()
            right = self.parse_formula()
            return Entail(left, right)
        return left

    def parse_or(self) -> Formula:
        node = self.parse_and()
        while self.peek() == "|":
            self.advance()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> Formula:
        node = self.parse_unary()
        while self.peek() == "&":
            self.advance()
            node = And(node, self.parse_unary())
        return node

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise self.error("expected a formula")
        if tok == "~":
            self.advance()
            return Not(self.parse_unary())
        if tok in (FORALL, EXISTS):
            quant = self.advance()
            name_tok = self.tokens[self.pos] if self.pos < len(self.tokens) else None
            if name_tok is None or not name_tok.text[0].islower() or not name_tok.text.isidentifier():
                raise self.error(f"expected a lowercase variable after '{quant.text}'")
            if name_tok.text in (FORALL, EXISTS):
                raise self.error(f"'{name_tok.text}' cannot be used as a variable name")
            self.advance()
            self.expect(".")
            self.bound.append(name_tok.text)
            try:
                body = self.parse_formula()
            finally:
                self.bound.pop()
            return Quantified(quant.text, name_tok.text, body)
        if tok == "(":
            self.advance()
            inner = self.parse_formula()
            self.expect(")")
            return inner
        if tok[0].isupper():
            atom = self.advance()
            if self.peek() == "(":
                raise self.error(f"schema placeholder '{atom.text}' takes no arguments")
            return SchemaAtom(atom.text)
        if tok[0].islower():
            return self.parse_predicate()
        raise self.error(f"unexpected token {tok!r}")

    def parse_predicate(self) -> Formula:
        name = self.advance()
        if self.peek() == "(":
            if name.text in self.bound:
                raise ParseError(
                    f"bound variable '{name.text}' cannot be applied as a function or predicate",
                    name.line,
                    name.column,
                )
            args = self.parse_term_args()
            self.context.note_predicate(name.text, len(args), name.line, name.column)
            return Pred(name.text, args)
        if name.text in self.bound:
            raise ParseError(
                f"bound variable '{name.text}' used in formula position",
                name.line,
                name.column,
            )
        self.context.note_predicate(name.text, 0, name.line, name.column)
        return Pred(name.text, ())

    def parse_term_args(self) -> tuple[Term, ...]:
        self.expect("(")
        args = [self.parse_term()]
        while self.peek() == ",":
            self.advance()
            args.append(self.parse_term())
        self.expect(")")
        return tuple(args)

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok is None or not tok[0].islower() or tok in (FORALL, EXISTS):
            raise self.error("expected a term (lowercase identifier)")
        name = self.advance()
        if self.peek() == "(":
            if name.text in self.bound:
                raise ParseError(
                    f"bound variable '{name.text}' cannot be applied as a function",
                    name.line,
                    name.column,
                )
            args = self.parse_term_args()
            self.context.note_function(name.text, len(args), name.line, name.column)
            return Fun(name.text, args)
        if name.text in self.bound:
            return Var(name.text)
        self.context.note_function(name.text, 0, name.line, name.column)
        return Fun(name.text, ())


def parse_formula(text: str, context: SignatureContext | None = None) -> Formula:
    """Parse ``text`` into a formula AST.

    Raises :class:`ParseError` with line/column on malformed input or on an
    arity clash with earlier uses recorded in ``context``.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty input", 1, 1)
    parser = _Parser(tokens, context if context is not None else SignatureContext())
    formula = parser.parse_formula()
    if parser.pos < len(parser.tokens):
        raise parser.error(f"unexpected trailing token {parser.peek()!r}")
    return formula
