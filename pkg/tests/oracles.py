"""Independent brute-force implementations used to cross-check the engine.

Everything here recomputes results from first principles: path-parity
polarity marking, textbook recursive unification with naive composition, and
full-rescan fixpoint saturation with no agenda, indexing, or subsumption.
Canonical forms are used only as the shared comparison key.
"""

from __future__ import annotations

import itertools

from rforge.analysis import canonicalize, degree_vector
from rforge.formulas import (
    And,
    Entail,
    Formula,
    Not,
    Or,
    Pred,
    Quantified,
    SchemaAtom,
    formula_size,
    render_formula,
)
from rforge.logic import LogicSystem
from rforge.substitution import match_schema, tag_schema_atoms


# ---------------------------------------------------------------------------
# Polarity by path parity


def polarity_occurrences(f: Formula) -> list[tuple[str, str]]:
    """(symbol, role) for every propositional-symbol occurrence, with the
    role computed by counting polarity inversions along the path."""
    out: list[tuple[str, str]] = []

    def walk(node: Formula, inversions: int) -> None:
        if isinstance(node, SchemaAtom):
            out.append((node.name, "antecedent" if inversions % 2 else "consequent"))
        elif isinstance(node, Pred):
            if not node.args:
                out.append((node.name, "antecedent" if inversions % 2 else "consequent"))
        elif isinstance(node, Not):
            walk(node.child, inversions + 1)
        elif isinstance(node, Quantified):
            walk(node.body, inversions)
        elif isinstance(node, Entail):
            walk(node.antecedent, inversions + 1)
            walk(node.consequent, inversions)
        else:
            walk(node.left, inversions)
            walk(node.right, inversions)

    walk(f, 0)
    return out


def oracle_occurrence_flags(f: Formula) -> dict[str, tuple[bool, bool]]:
    flags: dict[str, list[bool]] = {}
    for name, role in polarity_occurrences(f):
        entry = flags.setdefault(name, [False, False])
        entry[0 if role == "antecedent" else 1] = True
    return {name: (entry[0], entry[1]) for name, entry in flags.items()}


def oracle_strong_relevance(f: Formula) -> bool:
    return all(a and c for a, c in oracle_occurrence_flags(f).values())


# ---------------------------------------------------------------------------
# Naive rule application (textbook unification, no solved forms)


def naive_unify(a: Formula, b: Formula, bindings: dict[str, Formula]) -> dict[str, Formula] | None:
    def resolve(x: Formula) -> Formula:
        while isinstance(x, SchemaAtom) and x.name in bindings:
            x = bindings[x.name]
        return x

    def occurs(name: str, x: Formula) -> bool:
        x = resolve(x)
        if isinstance(x, SchemaAtom):
            return x.name == name
        if isinstance(x, Pred):
            return False
        if isinstance(x, Not):
            return occurs(name, x.child)
        if isinstance(x, Quantified):
            return occurs(name, x.body)
        if isinstance(x, Entail):
            return occurs(name, x.antecedent) or occurs(name, x.consequent)
        return occurs(name, x.left) or occurs(name, x.right)

    a = resolve(a)
    b = resolve(b)
    if isinstance(a, SchemaAtom):
        if isinstance(b, SchemaAtom) and b.name == a.name:
            return bindings
        if occurs(a.name, b):
            return None
        bindings[a.name] = b
        return bindings
    if isinstance(b, SchemaAtom):
        return naive_unify(b, a, bindings)
    if type(a) is not type(b):
        return None
    if isinstance(a, Pred):
        return bindings if a == b else None
    if isinstance(a, Not):
        return naive_unify(a.child, b.child, bindings)
    if isinstance(a, Quantified):
        if a.quantifier != b.quantifier or a.var != b.var:
            return None
        return naive_unify(a.body, b.body, bindings)
    if isinstance(a, Entail):
        if naive_unify(a.antecedent, b.antecedent, bindings) is None:
            return None
        return naive_unify(a.consequent, b.consequent, bindings)
    if naive_unify(a.left, b.left, bindings) is None:
        return None
    return naive_unify(a.right, b.right, bindings)


def naive_substitute(f: Formula, bindings: dict[str, Formula]) -> Formula:
    if isinstance(f, SchemaAtom):
        return bindings.get(f.name, f)
    if isinstance(f, Pred):
        return f
    if isinstance(f, Not):
        return Not(naive_substitute(f.child, bindings))
    if isinstance(f, And):
        return And(naive_substitute(f.left, bindings), naive_substitute(f.right, bindings))
    if isinstance(f, Or):
        return Or(naive_substitute(f.left, bindings), naive_substitute(f.right, bindings))
    if isinstance(f, Entail):
        return Entail(
            naive_substitute(f.antecedent, bindings),
            naive_substitute(f.consequent, bindings),
        )
    assert isinstance(f, Quantified)
    return Quantified(f.quantifier, f.var, naive_substitute(f.body, bindings))


def _resolve_bindings(bindings: dict[str, Formula]) -> dict[str, Formula]:
    # Iterate substitution into the ranges until nothing changes.
    for _ in range(len(bindings) + 1):
        updated = {name: naive_substitute(value, bindings) for name, value in bindings.items()}
        if updated == bindings:
            return updated
        bindings = updated
    return bindings


def naive_apply_rule(rule, parent_formulas: tuple[Formula, ...]) -> Formula | None:
    """Condensed rule application rebuilt from scratch: rename apart with
    letter suffixes, unify premise-by-premise, substitute, canonicalize."""
    premises = [tag_schema_atoms(p, "X") for p in rule.premises]
    conclusion = tag_schema_atoms(rule.conclusion, "X")
    parents = [
        tag_schema_atoms(f, f"Y{i}") for i, f in enumerate(parent_formulas)
    ]
    bindings: dict[str, Formula] = {}
    for premise, parent in zip(premises, parents):
        if naive_unify(premise, parent, bindings) is None:
            return None
    resolved = _resolve_bindings(bindings)
    return canonicalize(naive_substitute(conclusion, resolved))


# ---------------------------------------------------------------------------
# Fixpoint saturation by full rescan


def naive_saturate(
    logic: LogicSystem,
    caps: dict[str, int],
    max_size: int,
    max_rounds: int = 60,
) -> set[str]:
    """Canonical texts of the full closure of the axioms under the rules
    within the caps; literal inductive definition, no subsumption."""
    theorems: dict[str, Formula] = {}
    for axiom in logic.axioms:
        formula = canonicalize(axiom.formula)
        degrees = degree_vector(formula)
        if all(degrees.get(c, 0) <= cap for c, cap in caps.items()):
            if formula_size(formula) <= max_size:
                theorems.setdefault(render_formula(formula), formula)
    for _ in range(max_rounds):
        changed = False
        snapshot = list(theorems.values())
        for rule in logic.rules:
            for combo in itertools.product(snapshot, repeat=len(rule.premises)):
                result = naive_apply_rule(rule, combo)
                if result is None:
                    continue
                degrees = degree_vector(result)
                if not all(degrees.get(c, 0) <= cap for c, cap in caps.items()):
                    continue
                if formula_size(result) > max_size:
                    continue
                text = render_formula(result)
                if text not in theorems:
                    theorems[text] = result
                    changed = True
        if not changed:
            return set(theorems)
    raise AssertionError("naive saturation did not reach a fixpoint")


def naive_derive(
    logic: LogicSystem,
    fragment_formulas: list[Formula],
    premise_formulas: list[Formula],
    entail_cap: int,
    max_size: int = 60,
    max_rounds: int = 40,
) -> set[str]:
    """Premise saturation mirror: seeds are exempt from the cap, every rule
    result is capped on the conditional degree, and a rule application needs
    at least one parent descending from a premise."""
    theorems: dict[str, Formula] = {}
    ancestry: dict[str, bool] = {}
    for formula in premise_formulas:
        formula = canonicalize(formula)
        text = render_formula(formula)
        theorems.setdefault(text, formula)
        ancestry[text] = True
    for formula in fragment_formulas:
        formula = canonicalize(formula)
        text = render_formula(formula)
        if text not in theorems:
            theorems[text] = formula
            ancestry[text] = False
    for _ in range(max_rounds):
        changed = False
        snapshot = list(theorems.items())
        for rule in logic.rules:
            for combo in itertools.product(snapshot, repeat=len(rule.premises)):
                if not any(ancestry[text] for text, _ in combo):
                    continue
                result = naive_apply_rule(rule, tuple(f for _, f in combo))
                if result is None:
                    continue
                if degree_vector(result)["=>"] > entail_cap:
                    continue
                if formula_size(result) > max_size:
                    continue
                text = render_formula(result)
                if text not in theorems:
                    theorems[text] = result
                    ancestry[text] = True
                    changed = True
        if not changed:
            return set(theorems)
    raise AssertionError("naive derivation did not reach a fixpoint")


def naive_contains(texts: set[str], target: Formula) -> bool:
    """Target present as a variant or as an instance of a schematic entry."""
    target = canonicalize(target)
    if render_formula(target) in texts:
        return True
    from rforge.parser import parse_formula

    for text in texts:
        entry = parse_formula(text)
        if match_schema(entry, tag_schema_atoms(target, "_t")) is not None:
            return True
    return False


def naive_deducibility(
    logic: LogicSystem,
    fragment_formulas: list[Formula],
    premise_formulas: list[Formula],
    target: Formula,
    max_j: int = 6,
) -> int | None:
    for j in range(max_j + 1):
        texts = naive_derive(logic, fragment_formulas, premise_formulas, j)
        if naive_contains(texts, target):
            return j
    return None
