"""Substitutions over schema atoms and individual variables, one-way
matching, and most-general unification with occurs check.

Schema atoms are placeholders for whole formulas; individual variables are
placeholders for terms.  Quantified formulas unify/match up to renaming of
the bound variable: both bodies are rewritten to share a fresh rigid
variable that no binding may mention, which also rejects bindings that would
let a bound variable escape its scope.

``unify`` and ``match_schema`` expect the two sides to use disjoint schema
namespaces when the shared names are not meant to be shared variables; use
``tag_schema_atoms`` to rename a side apart first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formulas import (
    And,
    Entail,
    Formula,
    Fun,
    Not,
    Or,
    Pred,
    Quantified,
    SchemaAtom,
    Term,
    Var,
    children,
    free_individual_variables,
    unbindable_identifiers,
)

_RIGID_PREFIX = "$"


@dataclass(frozen=True)
class Substitution:
    """Bindings of schema-atom names to formulas and variable names to terms.

    Application is simultaneous: inserted ranges are never re-substituted.
    Substitutions produced by :func:`unify` are normalized (fully resolved,
    hence idempotent).
    """

    schema: dict[str, Formula] = field(default_factory=dict)
    terms: dict[str, Term] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "Substitution":
        return cls({}, {})

    def is_empty(self) -> bool:
        return not self.schema and not self.terms


def tag_schema_atoms(f: Formula, tag: str) -> Formula:
    """Append ``tag`` to every schema-atom name in ``f``."""
    if isinstance(f, SchemaAtom):
        return SchemaAtom(f.name + tag)
    if isinstance(f, Pred):
        return f
    if isinstance(f, Not):
        return Not(tag_schema_atoms(f.child, tag))
    if isinstance(f, And):
        return And(tag_schema_atoms(f.left, tag), tag_schema_atoms(f.right, tag))
    if isinstance(f, Or):
        return Or(tag_schema_atoms(f.left, tag), tag_schema_atoms(f.right, tag))
    if isinstance(f, Entail):
        return Entail(tag_schema_atoms(f.antecedent, tag), tag_schema_atoms(f.consequent, tag))
    assert isinstance(f, Quantified)
    return Quantified(f.quantifier, f.var, tag_schema_atoms(f.body, tag))


def rename_free_variable(f: Formula, old: str, new: str) -> Formula:
    """Rename free occurrences of the individual variable ``old`` to ``new``."""

    def rename_term(t: Term, shadowed: bool) -> Term:
        if isinstance(t, Var):
            return Var(new) if t.name == old and not shadowed else t
        if not t.args:
            return t
        return Fun(t.name, tuple(rename_term(a, shadowed) for a in t.args))

    def walk(node: Formula, shadowed: bool) -> Formula:
        if isinstance(node, SchemaAtom):
            return node
        if isinstance(node, Pred):
            if not node.args:
                return node
            return Pred(node.name, tuple(rename_term(a, shadowed) for a in node.args))
        if isinstance(node, Not):
            return Not(walk(node.child, shadowed))
        if isinstance(node, And):
            return And(walk(node.left, shadowed), walk(node.right, shadowed))
        if isinstance(node, Or):
            return Or(walk(node.left, shadowed), walk(node.right, shadowed))
        if isinstance(node, Entail):
            return Entail(walk(node.antecedent, shadowed), walk(node.consequent, shadowed))
        assert isinstance(node, Quantified)
        return Quantified(
            node.quantifier, node.var, walk(node.body, shadowed or node.var == old)
        )

    return walk(f, False)


# ---------------------------------------------------------------------------
# Application


def _apply_term(t: Term, terms: dict[str, Term]) -> Term:
    if isinstance(t, Var):
        return terms.get(t.name, t)
    if not t.args:
        return t
    return Fun(t.name, tuple(_apply_term(a, terms) for a in t.args))


def apply_substitution(f: Formula, sub: Substitution) -> Formula:
    """Simultaneous, capture-avoiding application of ``sub`` to ``f``.

    Bound variables of ``f`` are never substituted; a quantifier whose
    variable occurs free in an inserted range is renamed apart first.
    """
    if sub.is_empty():
        return f
    range_vars: set[str] = set()
    for formula in sub.schema.values():
        range_vars.update(free_individual_variables(formula))
    for term in sub.terms.values():
        _collect_term_vars(term, range_vars)
    return _apply(f, sub.schema, sub.terms, range_vars)


def _collect_term_vars(t: Term, out: set[str]) -> None:
    if isinstance(t, Var):
        out.add(t.name)
    else:
        for a in t.args:
            _collect_term_vars(a, out)


def _apply(
    f: Formula,
    schema: dict[str, Formula],
    terms: dict[str, Term],
    range_vars: set[str],
) -> Formula:
    if isinstance(f, SchemaAtom):
        return schema.get(f.name, f)
    if isinstance(f, Pred):
        if not f.args or not terms:
            return f
        return Pred(f.name, tuple(_apply_term(a, terms) for a in f.args))
    if isinstance(f, Not):
        return Not(_apply(f.child, schema, terms, range_vars))
    if isinstance(f, And):
        return And(
            _apply(f.left, schema, terms, range_vars),
            _apply(f.right, schema, terms, range_vars),
        )
    if isinstance(f, Or):
        return Or(
            _apply(f.left, schema, terms, range_vars),
            _apply(f.right, schema, terms, range_vars),
        )
    if isinstance(f, Entail):
        return Entail(
            _apply(f.antecedent, schema, terms, range_vars),
            _apply(f.consequent, schema, terms, range_vars),
        )
    assert isinstance(f, Quantified)
    inner_terms = terms
    if f.var in terms:
        inner_terms = {k: v for k, v in terms.items() if k != f.var}
    var = f.var
    body = f.body
    if var in range_vars:
        fresh = _fresh_variable(var, range_vars | unbindable_identifiers(body))
        body = rename_free_variable(body, var, fresh)
        var = fresh
    return Quantified(f.quantifier, var, _apply(body, schema, inner_terms, range_vars))


def _fresh_variable(base: str, avoid: set[str]) -> str:
    i = 1
    while True:
        candidate = f"{base}_{i}"
        if candidate not in avoid:
            return candidate
        i += 1


# ---------------------------------------------------------------------------
# Unification

_FORMULA_LEAVES = (SchemaAtom, Pred)


class _Unifier:
    def __init__(self) -> None:
        self.schema: dict[str, Formula] = {}
        self.terms: dict[str, Term] = {}
        self.counter = 0

    def fresh_rigid(self) -> str:
        self.counter += 1
        return f"{_RIGID_PREFIX}b{self.counter}"

    def resolve_formula(self, x: Formula) -> Formula:
        while isinstance(x, SchemaAtom):
            bound = self.schema.get(x.name)
            if bound is None:
                return x
            x = bound
        return x

    def resolve_term(self, t: Term) -> Term:
        while isinstance(t, Var):
            bound = self.terms.get(t.name)
            if bound is None:
                return t
            t = bound
        return t

    def occurs_schema(self, name: str, x: Formula) -> bool:
        x = self.resolve_formula(x)
        if isinstance(x, SchemaAtom):
            return x.name == name
        return any(self.occurs_schema(name, c) for c in children(x))

    def occurs_var(self, name: str, t: Term) -> bool:
        t = self.resolve_term(t)
        if isinstance(t, Var):
            return t.name == name
        return any(self.occurs_var(name, a) for a in t.args)

    def formula_has_rigid(self, x: Formula) -> bool:
        x = self.resolve_formula(x)
        if isinstance(x, SchemaAtom):
            return False
        if isinstance(x, Pred):
            return any(self.term_has_rigid(a) for a in x.args)
        return any(self.formula_has_rigid(c) for c in children(x))

    def term_has_rigid(self, t: Term) -> bool:
        t = self.resolve_term(t)
        if isinstance(t, Var):
            return t.name.startswith(_RIGID_PREFIX)
        return any(self.term_has_rigid(a) for a in t.args)

    def bind_schema(self, name: str, x: Formula) -> bool:
        x = self.resolve_formula(x)
        if isinstance(x, SchemaAtom) and x.name == name:
            return True
        if self.occurs_schema(name, x):
            return False
        if self.formula_has_rigid(x):
            return False  # a bound variable would escape its quantifier
        self.schema[name] = x
        return True

    def unify_formulas(self, a: Formula, b: Formula) -> bool:
        a = self.resolve_formula(a)
        b = self.resolve_formula(b)
        if isinstance(a, SchemaAtom):
            return self.bind_schema(a.name, b)
        if isinstance(b, SchemaAtom):
            return self.bind_schema(b.name, a)
        if type(a) is not type(b):
            return False
        if isinstance(a, Pred):
            if a.name != b.name or len(a.args) != len(b.args):
                return False
            return all(self.unify_terms(s, t) for s, t in zip(a.args, b.args))
        if isinstance(a, Not):
            return self.unify_formulas(a.child, b.child)
        if isinstance(a, And) or isinstance(a, Or):
            return self.unify_formulas(a.left, b.left) and self.unify_formulas(
                a.right, b.right
            )
        if isinstance(a, Entail):
            return self.unify_formulas(a.antecedent, b.antecedent) and self.unify_formulas(
                a.consequent, b.consequent
            )
        assert isinstance(a, Quantified) and isinstance(b, Quantified)
        if a.quantifier != b.quantifier:
            return False
        rigid = self.fresh_rigid()
        return self.unify_formulas(
            rename_free_variable(a.body, a.var, rigid),
            rename_free_variable(b.body, b.var, rigid),
        )

    def unify_terms(self, s: Term, t: Term) -> bool:
        s = self.resolve_term(s)
        t = self.resolve_term(t)
        if isinstance(s, Var) and isinstance(t, Var) and s.name == t.name:
            return True
        if isinstance(s, Var) and not s.name.startswith(_RIGID_PREFIX):
            if self.occurs_var(s.name, t) or self.term_has_rigid(t):
                return False
            self.terms[s.name] = t
            return True
        if isinstance(t, Var) and not t.name.startswith(_RIGID_PREFIX):
            if self.occurs_var(t.name, s) or self.term_has_rigid(s):
                return False
            self.terms[t.name] = s
            return True
        if isinstance(s, Var) or isinstance(t, Var):
            return False  # distinct rigid variables, or rigid against a function
        if s.name != t.name or len(s.args) != len(t.args):
            return False
        return all(self.unify_terms(a, b) for a, b in zip(s.args, t.args))

    def solved_form(self) -> Substitution:
        schema = {name: self.deep_formula(self.schema[name]) for name in self.schema}
        terms = {name: self.deep_term(self.terms[name]) for name in self.terms}
        return Substitution(schema, terms)

    def deep_formula(self, x: Formula) -> Formula:
        x = self.resolve_formula(x)
        if isinstance(x, SchemaAtom):
            return x
        if isinstance(x, Pred):
            if not x.args:
                return x
            return Pred(x.name, tuple(self.deep_term(a) for a in x.args))
        if isinstance(x, Not):
            return Not(self.deep_formula(x.child))
        if isinstance(x, And):
            return And(self.deep_formula(x.left), self.deep_formula(x.right))
        if isinstance(x, Or):
            return Or(self.deep_formula(x.left), self.deep_formula(x.right))
        if isinstance(x, Entail):
            return Entail(self.deep_formula(x.antecedent), self.deep_formula(x.consequent))
        assert isinstance(x, Quantified)
        return Quantified(x.quantifier, x.var, self.deep_formula(x.body))

    def deep_term(self, t: Term) -> Term:
        t = self.resolve_term(t)
        if isinstance(t, Var):
            return t
        if not t.args:
            return t
        return Fun(t.name, tuple(self.deep_term(a) for a in t.args))


def unify(f: Formula, g: Formula) -> Substitution | None:
    """Most general unifier of ``f`` and ``g``, or None.

    Shared schema-atom names denote the same variable on both sides; rename
    apart first when that is not intended.
    """
    unifier = _Unifier()
    if not unifier.unify_formulas(f, g):
        return None
    return unifier.solved_form()


def unify_many(pairs: list[tuple[Formula, Formula]]) -> Substitution | None:
    """Simultaneous unification of several formula pairs under one binding set."""
    unifier = _Unifier()
    for f, g in pairs:
        if not unifier.unify_formulas(f, g):
            return None
    return unifier.solved_form()


# ---------------------------------------------------------------------------
# One-way matching


class _Matcher:
    def __init__(self) -> None:
        self.schema: dict[str, Formula] = {}
        self.terms: dict[str, Term] = {}
        self.counter = 0

    def fresh_rigid(self) -> str:
        self.counter += 1
        return f"{_RIGID_PREFIX}m{self.counter}"

    def match_formulas(self, pattern: Formula, target: Formula) -> bool:
        if isinstance(pattern, SchemaAtom):
            bound = self.schema.get(pattern.name)
            if bound is not None:
                return bound == target
            if _plain_formula_has_rigid(target):
                return False
            self.schema[pattern.name] = target
            return True
        if type(pattern) is not type(target):
            return False
        if isinstance(pattern, Pred):
            if pattern.name != target.name or len(pattern.args) != len(target.args):
                return False
            return all(
                self.match_terms(p, t) for p, t in zip(pattern.args, target.args)
            )
        if isinstance(pattern, Not):
            return self.match_formulas(pattern.child, target.child)
        if isinstance(pattern, And) or isinstance(pattern, Or):
            return self.match_formulas(pattern.left, target.left) and self.match_formulas(
                pattern.right, target.right
            )
        if isinstance(pattern, Entail):
            return self.match_formulas(
                pattern.antecedent, target.antecedent
            ) and self.match_formulas(pattern.consequent, target.consequent)
        assert isinstance(pattern, Quantified)
        if pattern.quantifier != target.quantifier:
            return False
        rigid = self.fresh_rigid()
        return self.match_formulas(
            rename_free_variable(pattern.body, pattern.var, rigid),
            rename_free_variable(target.body, target.var, rigid),
        )

    def match_terms(self, pattern: Term, target: Term) -> bool:
        if isinstance(pattern, Var):
            if pattern.name.startswith(_RIGID_PREFIX):
                return isinstance(target, Var) and target.name == pattern.name
            bound = self.terms.get(pattern.name)
            if bound is not None:
                return bound == target
            if _plain_term_has_rigid(target):
                return False
            self.terms[pattern.name] = target
            return True
        if isinstance(target, Var):
            return False
        if pattern.name != target.name or len(pattern.args) != len(target.args):
            return False
        return all(self.match_terms(p, t) for p, t in zip(pattern.args, target.args))


def _plain_term_has_rigid(t: Term) -> bool:
    if isinstance(t, Var):
        return t.name.startswith(_RIGID_PREFIX)
    return any(_plain_term_has_rigid(a) for a in t.args)


def _plain_formula_has_rigid(x: Formula) -> bool:
    if isinstance(x, Pred):
        return any(_plain_term_has_rigid(a) for a in x.args)
    return any(_plain_formula_has_rigid(c) for c in children(x))


def match_schema(schema: Formula, target: Formula) -> Substitution | None:
    """The unique substitution taking ``schema`` onto ``target``, or None.

    One-way: only placeholders of ``schema`` bind; schema atoms of ``target``
    are treated as ground.  When the two sides share placeholder names the
    result is meaningful under simultaneous application only.
    """
    matcher = _Matcher()
    if not matcher.match_formulas(schema, target):
        return None
    return Substitution(matcher.schema, matcher.terms)


def is_instance_of(general: Formula, specific: Formula) -> bool:
    """True when ``specific`` is a substitution instance of ``general``.

    Placeholder names of ``specific`` are renamed apart first, so shared
    names never alias.
    """
    return match_schema(general, tag_schema_atoms(specific, "_t")) is not None
