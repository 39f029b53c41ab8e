"""Hypothesis strategies and a seeded random generator for formula ASTs.

Generated formulas are always well formed: individual variables appear only
under a quantifier that binds them, and arities are consistent within one
formula.
"""

from __future__ import annotations

import random

from hypothesis import strategies as st

from rforge.formulas import (
    And,
    Entail,
    Formula,
    Fun,
    Not,
    Or,
    Pred,
    Quantified,
    SchemaAtom,
    Var,
)

_ATOMS = ("p", "q", "r", "s")
_SCHEMAS = ("A", "B", "C")
_PREDICATES = (("nat", 1), ("eq", 2))
_FUNCTIONS = (("zero", 0), ("s", 1))


def random_term(rng: random.Random, env: tuple[str, ...], depth: int = 2):
    if env and rng.random() < 0.5:
        return Var(rng.choice(env))
    name, arity = rng.choice(_FUNCTIONS)
    if depth <= 0 or arity == 0:
        return Fun("zero")
    return Fun(name, tuple(random_term(rng, env, depth - 1) for _ in range(arity)))


def random_formula(
    rng: random.Random,
    budget: int,
    env: tuple[str, ...] = (),
    allow_schema: bool = True,
    allow_quantifier: bool = True,
) -> Formula:
    """Random well-formed formula with roughly ``budget`` nodes."""
    if budget <= 1:
        if allow_schema and rng.random() < 0.3:
            return SchemaAtom(rng.choice(_SCHEMAS))
        return Pred(rng.choice(_ATOMS))
    roll = rng.random()
    if roll < 0.12 and allow_quantifier:
        var = f"v{rng.randrange(3)}"
        quantifier = "forall" if rng.random() < 0.8 else "exists"
        return Quantified(
            quantifier,
            var,
            random_formula(rng, budget - 1, env + (var,), allow_schema, allow_quantifier),
        )
    if roll < 0.24:
        return Not(random_formula(rng, budget - 1, env, allow_schema, allow_quantifier))
    if roll < 0.34 and env:
        name, arity = rng.choice(_PREDICATES)
        return Pred(name, tuple(random_term(rng, env) for _ in range(arity)))
    left_budget = rng.randrange(1, budget)
    left = random_formula(rng, left_budget, env, allow_schema, allow_quantifier)
    right = random_formula(rng, budget - left_budget, env, allow_schema, allow_quantifier)
    kind = rng.random()
    if kind < 0.5:
        return Entail(left, right)
    if kind < 0.75:
        return And(left, right)
    return Or(left, right)


@st.composite
def formulas(draw, max_budget: int = 16, allow_quantifier: bool = True) -> Formula:
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    budget = draw(st.integers(min_value=1, max_value=max_budget))
    rng = random.Random(seed)
    return random_formula(rng, budget, allow_quantifier=allow_quantifier)


@st.composite
def conditionals(draw, max_budget: int = 12) -> Formula:
    left = draw(formulas(max_budget // 2))
    right = draw(formulas(max_budget // 2))
    return Entail(left, right)
