"""Formula and term ASTs plus the canonical text rendering.

Connective precedence in the text syntax is ``~`` > ``&`` > ``|`` > ``=>``
with ``=>`` right-associative.  Quantifier scope extends as far right as
possible, so a quantified formula needs parentheses whenever it is not the
final operand of its enclosing expression.  ``render_formula`` emits the
minimal parenthesisation under those rules and is byte-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

ENTAIL = "=>"
AND = "&"
OR = "|"
NOT = "~"
CONNECTIVES = (ENTAIL, AND, OR, NOT)

FORALL = "forall"
EXISTS = "exists"


@dataclass(frozen=True, slots=True)
class Var:
    """Individual variable; only meaningful under a quantifier binding it."""

    name: str


@dataclass(frozen=True, slots=True)
class Fun:
    """Function application over terms; a constant when ``args`` is empty."""

    name: str
    args: tuple["Term", ...] = ()


Term = Union[Var, Fun]


@dataclass(frozen=True, slots=True)
class SchemaAtom:
    """Placeholder for an arbitrary formula (uppercase in the text syntax)."""

    name: str


@dataclass(frozen=True, slots=True)
class Pred:
    """Predicate over terms; a propositional atom when ``args`` is empty."""

    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True, slots=True)
class Not:
    child: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Entail:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True, slots=True)
class Quantified:
    quantifier: str  # FORALL or EXISTS
    var: str
    body: "Formula"


Formula = Union[SchemaAtom, Pred, Not, And, Or, Entail, Quantified]

_BINARY = (And, Or, Entail)


# ---------------------------------------------------------------------------
# Rendering

_PREC_ENTAIL = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNARY = 4

_PRECEDENCE = {Entail: _PREC_ENTAIL, Or: _PREC_OR, And: _PREC_AND, Not: _PREC_UNARY}


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.name
    return f"{t.name}({', '.join(render_term(a) for a in t.args)})"


def render_formula(f: Formula) -> str:
    """Render ``f`` as canonical ASCII text; parses back to an equal AST."""
    return _render(f, 0, True)


def _render(f: Formula, ctx: int, tail: bool) -> str:
    if isinstance(f, SchemaAtom):
        return f.name
    if isinstance(f, Pred):
        if not f.args:
            return f.name
        return f"{f.name}({', '.join(render_term(a) for a in f.args)})"
    if isinstance(f, Quantified):
        # Wide scope: safe without parentheses only in tail position.
        if not tail:
            return "(" + _render(f, 0, True) + ")"
        return f"{f.quantifier} {f.var}. {_render(f.body, 0, True)}"
    prec = _PRECEDENCE[type(f)]
    if prec < ctx:
        return "(" + _render(f, 0, True) + ")"
    if isinstance(f, Not):
        return "~" + _render(f.child, _PREC_UNARY, tail)
    if isinstance(f, And):
        return _render(f.left, _PREC_AND, False) + " & " + _render(f.right, _PREC_UNARY, tail)
    if isinstance(f, Or):
        return _render(f.left, _PREC_OR, False) + " | " + _render(f.right, _PREC_AND, tail)
    assert isinstance(f, Entail)
    return _render(f.antecedent, _PREC_OR, False) + " => " + _render(f.consequent, 0, tail)


# ---------------------------------------------------------------------------
# Structural helpers


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.child,)
    if isinstance(f, And) or isinstance(f, Or):
        return (f.left, f.right)
    if isinstance(f, Entail):
        return (f.antecedent, f.consequent)
    if isinstance(f, Quantified):
        return (f.body,)
    return ()


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    """Preorder traversal of ``f`` including ``f`` itself."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def formula_size(f: Formula) -> int:
    """Node count of ``f``, terms included."""
    total = 0
    for node in iter_subformulas(f):
        total += 1
        if isinstance(node, Pred):
            total += sum(term_size(a) for a in node.args)
    return total


def has_schema_atoms(f: Formula) -> bool:
    return any(isinstance(n, SchemaAtom) for n in iter_subformulas(f))


def has_quantifier(f: Formula) -> bool:
    return any(isinstance(n, Quantified) for n in iter_subformulas(f))


def schema_atom_names(f: Formula) -> set[str]:
    return {n.name for n in iter_subformulas(f) if isinstance(n, SchemaAtom)}


def connectives_used(f: Formula) -> set[str]:
    used = set()
    for node in iter_subformulas(f):
        if isinstance(node, Entail):
            used.add(ENTAIL)
        elif isinstance(node, And):
            used.add(AND)
        elif isinstance(node, Or):
            used.add(OR)
        elif isinstance(node, Not):
            used.add(NOT)
    return used


def _term_vars(t: Term, out: set[str]) -> None:
    if isinstance(t, Var):
        out.add(t.name)
    else:
        for a in t.args:
            _term_vars(a, out)


def free_individual_variables(f: Formula) -> set[str]:
    """Names of individual variables not bound by an enclosing quantifier."""
    free: set[str] = set()

    def walk(node: Formula, bound: frozenset[str]) -> None:
        if isinstance(node, Pred):
            names: set[str] = set()
            for a in node.args:
                _term_vars(a, names)
            free.update(names - bound)
        elif isinstance(node, Quantified):
            walk(node.body, bound | {node.var})
        else:
            for child in children(node):
                walk(child, bound)

    walk(f, frozenset())
    return free


def is_closed(f: Formula) -> bool:
    return not free_individual_variables(f)


def unbindable_identifiers(f: Formula) -> set[str]:
    """Predicate, function, constant, and free-variable names of ``f``.

    These are the lowercase identifiers a renamed bound variable must not
    collide with; bound-variable names themselves are excluded.
    """
    names: set[str] = set()

    def walk_term(t: Term, bound: frozenset[str]) -> None:
        if isinstance(t, Var):
            if t.name not in bound:
                names.add(t.name)
            return
        names.add(t.name)
        for a in t.args:
            walk_term(a, bound)

    def walk(node: Formula, bound: frozenset[str]) -> None:
        if isinstance(node, Pred):
            names.add(node.name)
            for a in node.args:
                walk_term(a, bound)
        elif isinstance(node, Quantified):
            walk(node.body, bound | {node.var})
        else:
            for child in children(node):
                walk(child, bound)

    walk(f, frozenset())
    return names


def ground_terms(f: Formula) -> set[Term]:
    """All variable-free terms (including nested subterms) occurring in ``f``."""
    found: set[Term] = set()

    def walk_term(t: Term) -> bool:
        if isinstance(t, Var):
            return False
        ground = all([walk_term(a) for a in t.args])
        if ground:
            found.add(t)
        return ground

    for node in iter_subformulas(f):
        if isinstance(node, Pred):
            for a in node.args:
                walk_term(a)
    return found


def function_symbols(f: Formula) -> set[tuple[str, int]]:
    """(name, arity) pairs of all function symbols occurring in ``f``."""
    out: set[tuple[str, int]] = set()

    def walk_term(t: Term) -> None:
        if isinstance(t, Fun):
            out.add((t.name, len(t.args)))
            for a in t.args:
                walk_term(a)

    for node in iter_subformulas(f):
        if isinstance(node, Pred):
            for a in node.args:
                walk_term(a)
    return out


def strip_quantifier_prefix(f: Formula) -> tuple[tuple[tuple[str, str], ...], Formula]:
    """Split ``f`` into its leading quantifier prefix and the remaining core."""
    prefix: list[tuple[str, str]] = []
    while isinstance(f, Quantified):
        prefix.append((f.quantifier, f.var))
        f = f.body
    return tuple(prefix), f


def top_kind(f: Formula) -> str:
    """Coarse shape tag of the root node, used for rule-application indexing."""
    if isinstance(f, SchemaAtom):
        return "schema"
    if isinstance(f, Pred):
        return "pred"
    if isinstance(f, Not):
        return "not"
    if isinstance(f, And):
        return "and"
    if isinstance(f, Or):
        return "or"
    if isinstance(f, Entail):
        return "entail"
    return f.quantifier
