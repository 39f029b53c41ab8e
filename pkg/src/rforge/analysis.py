"""Degree metrics, degree-based classification, polarity analysis, and the
relevance validators, plus canonical forms for variant deduplication.

The degree of a connective counts its nesting depth: zero when the
connective does not occur, one plus the maximum over the operands at a node
of that connective, the plain maximum at any other connective, and unchanged
under a quantifier prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formulas import (
    AND,
    And,
    CONNECTIVES,
    ENTAIL,
    Entail,
    Formula,
    Fun,
    NOT,
    Not,
    OR,
    Or,
    Pred,
    Quantified,
    SchemaAtom,
    Term,
    Var,
    has_quantifier,
    has_schema_atoms,
    strip_quantifier_prefix,
    unbindable_identifiers,
)

DegreeVector = dict[str, int]


def degree_vector(f: Formula) -> DegreeVector:
    """Degrees of all four connectives in one traversal."""
    d_ent, d_and, d_or, d_not = _degrees(f)
    return {ENTAIL: d_ent, AND: d_and, OR: d_or, NOT: d_not}


def _degrees(f: Formula) -> tuple[int, int, int, int]:
    if isinstance(f, (SchemaAtom, Pred)):
        return (0, 0, 0, 0)
    if isinstance(f, Quantified):
        return _degrees(f.body)
    if isinstance(f, Not):
        e, a, o, n = _degrees(f.child)
        return (e, a, o, n + 1)
    le, la, lo, ln = _degrees(f.left if not isinstance(f, Entail) else f.antecedent)
    re_, ra, ro, rn = _degrees(f.right if not isinstance(f, Entail) else f.consequent)
    e, a, o, n = max(le, re_), max(la, ra), max(lo, ro), max(ln, rn)
    if isinstance(f, Entail):
        return (e + 1, a, o, n)
    if isinstance(f, And):
        return (e, a + 1, o, n)
    return (e, a, o + 1, n)


def connective_degree(f: Formula, connective: str) -> int:
    """Nesting degree of ``connective`` in ``f``."""
    if connective not in CONNECTIVES:
        raise ValueError(f"unknown connective {connective!r}; expected one of {CONNECTIVES}")
    return degree_vector(f)[connective]


def degrees_within(degrees: DegreeVector, caps: DegreeVector) -> bool:
    """True when every capped connective stays at or below its cap."""
    return all(degrees.get(conn, 0) <= cap for conn, cap in caps.items())


# ---------------------------------------------------------------------------
# Classification

ZERO_DEGREE = "zero-degree"
FIRST_DEGREE_CONDITIONAL = "first-degree-conditional"
FIRST_DEGREE = "first-degree"
KTH_DEGREE = "kth-degree"


@dataclass(frozen=True)
class FormulaClass:
    """Most specific degree label together with the conditional degree."""

    kind: str
    degree: int


def classify_formula(f: Formula) -> FormulaClass:
    k = connective_degree(f, ENTAIL)
    if k == 0:
        return FormulaClass(ZERO_DEGREE, 0)
    if k == 1:
        _, core = strip_quantifier_prefix(f)
        if isinstance(core, Entail):
            return FormulaClass(FIRST_DEGREE_CONDITIONAL, 1)
        return FormulaClass(FIRST_DEGREE, 1)
    return FormulaClass(KTH_DEGREE, k)


# ---------------------------------------------------------------------------
# Polarity and the relevance validators

ANTECEDENT = "antecedent"
CONSEQUENT = "consequent"


@dataclass(frozen=True)
class OccurrenceFlags:
    as_antecedent: bool
    as_consequent: bool

    @property
    def both(self) -> bool:
        return self.as_antecedent and self.as_consequent


def proposition_symbols(f: Formula) -> set[str]:
    """Schema-atom names plus nullary predicate names occurring in ``f``.

    Predicates with arguments lie outside the propositional-symbol notion the
    relevance validators are defined over.
    """
    out: set[str] = set()
    _collect_symbols(f, out)
    return out


def _collect_symbols(f: Formula, out: set[str]) -> None:
    if isinstance(f, SchemaAtom):
        out.add(f.name)
    elif isinstance(f, Pred):
        if not f.args:
            out.add(f.name)
    elif isinstance(f, Not):
        _collect_symbols(f.child, out)
    elif isinstance(f, Quantified):
        _collect_symbols(f.body, out)
    elif isinstance(f, Entail):
        _collect_symbols(f.antecedent, out)
        _collect_symbols(f.consequent, out)
    else:
        _collect_symbols(f.left, out)
        _collect_symbols(f.right, out)


def occurrence_report(f: Formula) -> dict[str, OccurrenceFlags]:
    """Per propositional symbol: does it occur as an antecedent part and as a
    consequent part?

    The whole formula is a consequent part.  At an entailment the antecedent
    side takes the opposite role of the current position and the consequent
    side keeps it; negation flips the role of its child; conjunction,
    disjunction, and quantifiers preserve it.
    """
    seen: dict[str, list[bool]] = {}

    def mark(name: str, role: str) -> None:
        flags = seen.setdefault(name, [False, False])
        if role == ANTECEDENT:
            flags[0] = True
        else:
            flags[1] = True

    def flip(role: str) -> str:
        return CONSEQUENT if role == ANTECEDENT else ANTECEDENT

    def walk(node: Formula, role: str) -> None:
        if isinstance(node, SchemaAtom):
            mark(node.name, role)
        elif isinstance(node, Pred):
            if not node.args:
                mark(node.name, role)
        elif isinstance(node, Not):
            walk(node.child, flip(role))
        elif isinstance(node, Quantified):
            walk(node.body, role)
        elif isinstance(node, Entail):
            walk(node.antecedent, flip(role))
            walk(node.consequent, role)
        else:
            walk(node.left, role)
            walk(node.right, role)

    walk(f, CONSEQUENT)
    return {name: OccurrenceFlags(flags[0], flags[1]) for name, flags in seen.items()}


def strong_relevance_holds(f: Formula) -> bool:
    """True iff every propositional symbol of ``f`` occurs at least once as an
    antecedent part and at least once as a consequent part.

    Vacuously true for formulas without propositional symbols.
    """
    return all(flags.both for flags in occurrence_report(f).values())


class NotAConditionalError(ValueError):
    pass


def variable_sharing_holds(f: Formula) -> bool:
    """True iff the antecedent and consequent of the conditional ``f`` (under
    any quantifier prefix) share at least one propositional symbol."""
    _, core = strip_quantifier_prefix(f)
    if not isinstance(core, Entail):
        raise NotAConditionalError(
            "variable sharing is defined for conditionals; top node is not '=>'"
        )
    return bool(proposition_symbols(core.antecedent) & proposition_symbols(core.consequent))


# ---------------------------------------------------------------------------
# Canonical form

_SCHEMA_PREFIX = "A"
_VAR_PREFIX = "x"


def canonicalize(f: Formula) -> Formula:
    """Rename schema atoms to A1, A2, ... and bound individual variables to
    x1, x2, ... in order of first preorder occurrence.

    Idempotent; two formulas are variants iff their canonical forms are
    structurally equal.  Predicates, constants, functions, and free variables
    are never renamed.  Generated variable names skip identifiers already
    used in terms so rendering stays unambiguous.
    """
    if not has_schema_atoms(f) and not has_quantifier(f):
        return f
    avoid = unbindable_identifiers(f)
    schema_map: dict[str, str] = {}
    var_counter = [0]

    def fresh_var() -> str:
        while True:
            var_counter[0] += 1
            name = f"{_VAR_PREFIX}{var_counter[0]}"
            if name not in avoid:
                return name

    def rename_term(t: Term, env: dict[str, str]) -> Term:
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if not t.args:
            return t
        return Fun(t.name, tuple(rename_term(a, env) for a in t.args))

    def walk(node: Formula, env: dict[str, str]) -> Formula:
        if isinstance(node, SchemaAtom):
            target = schema_map.get(node.name)
            if target is None:
                target = f"{_SCHEMA_PREFIX}{len(schema_map) + 1}"
                schema_map[node.name] = target
            return SchemaAtom(target)
        if isinstance(node, Pred):
            if not node.args:
                return node
            return Pred(node.name, tuple(rename_term(a, env) for a in node.args))
        if isinstance(node, Not):
            return Not(walk(node.child, env))
        if isinstance(node, And):
            return And(walk(node.left, env), walk(node.right, env))
        if isinstance(node, Or):
            return Or(walk(node.left, env), walk(node.right, env))
        if isinstance(node, Entail):
            return Entail(walk(node.antecedent, env), walk(node.consequent, env))
        assert isinstance(node, Quantified)
        new_name = fresh_var()
        inner = dict(env)
        inner[node.var] = new_name
        return Quantified(node.quantifier, new_name, walk(node.body, inner))

    return walk(f, {})


def is_variant(f: Formula, g: Formula) -> bool:
    """Equal up to renaming of schema atoms and bound variables."""
    return canonicalize(f) == canonicalize(g)
