"""Degree-bounded forward saturation.

Stage 1 (:func:`generate_fragment`) closes a logic's axiom schemata under
its inference rules, keeping every conclusion whose per-connective degrees
stay within the caps.  Rule application is condensed: each rule premise is
unified (most general unifier) with a parent record, so one schematic record
stands for all of its substitution instances.

Stage 2 (:func:`derive_from_premises`) seeds the closure with a premise set
and a previously generated fragment.  Premises and fragment members enter
free of charge; only rule-application results are degree-capped.  Rule
applications must involve at least one parent that descends from a premise,
so everything new is empirical rather than a rerun of stage 1.

The agenda is breadth-first by depth.  Within a level, candidates are
admitted in lexicographic order of their canonical text, which fixes record
ids and makes output byte-reproducible regardless of worker count.  When the
record budget fills mid-level the remaining candidate stream is cut at a
deterministic point, so truncated runs are reproducible too.
"""

from __future__ import annotations

import bisect
import multiprocessing
import time
from dataclasses import dataclass, field

from .analysis import (
    DegreeVector,
    NotAConditionalError,
    canonicalize,
    degree_vector,
    strong_relevance_holds,
    variable_sharing_holds,
)
from .formulas import (
    AND,
    And,
    ENTAIL,
    Entail,
    FORALL,
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
    children,
    connectives_used,
    formula_size,
    function_symbols,
    ground_terms,
    has_quantifier,
    has_schema_atoms,
    render_formula,
    render_term,
    top_kind,
)
from .logic import InferenceRule, LogicSystem
from .premises import PremiseSet
from .substitution import (
    Substitution,
    apply_substitution,
    is_instance_of,
    tag_schema_atoms,
    unify_many,
)

FORALL_ELIM = "forall-elim"

_RULE_TAG = "_R"


class EngineError(ValueError):
    """Precondition failure in an engine operation."""


@dataclass(frozen=True)
class DerivationLimits:
    """Resource bounds for one saturation run."""

    max_depth: int = 10
    max_records: int = 1_000_000
    max_formula_size: int = 80
    time_budget: float = 300.0

    def __post_init__(self) -> None:
        if self.max_depth <= 0 or self.max_records <= 0 or self.max_formula_size <= 0:
            raise EngineError("derivation limits must be positive")
        if self.time_budget <= 0:
            raise EngineError("time budget must be positive")


@dataclass(frozen=True)
class Derivation:
    """How a record came to be: a seed reference or a rule application."""

    kind: str  # "axiom" | "premise" | "fragment" | "rule"
    name: str  # axiom name, premise label, fragment record id, or rule name
    parents: tuple[int, ...] = ()
    subst: Substitution | None = None

    @property
    def ref(self) -> str:
        return self.name if self.kind == "rule" else f"{self.kind}:{self.name}"


@dataclass(frozen=True, slots=True)
class TheoremRecord:
    id: int
    formula: Formula  # canonical
    text: str  # canonical rendering
    derivation: Derivation
    depth: int
    degrees: DegreeVector
    size: int
    is_premise: bool
    strong_relevance: bool
    variable_sharing: bool | None  # None when the formula is not a conditional
    logical_instance: bool
    route_degree: int  # conditional-degree bound witnessed by this derivation
    premise_ancestry: bool
    top_kind: str
    has_schema: bool
    has_quantifier: bool
    existential: bool


@dataclass(frozen=True)
class SaturationUsage:
    levels: int = 0
    candidates_seen: int = 0
    duplicates: int = 0
    over_caps: int = 0
    over_size: int = 0
    subsumed: int = 0
    back_subsumed: int = 0
    truncated_by: str | None = None
    elapsed: float = 0.0


@dataclass(frozen=True)
class Fragment:
    """Variant-deduplicated closure of a logic under per-connective caps."""

    logic_name: str
    caps: DegreeVector
    limits: DerivationLimits
    complete: bool
    records: tuple[TheoremRecord, ...]
    usage: SaturationUsage = field(compare=False, default=SaturationUsage())

    def texts(self) -> set[str]:
        return {r.text for r in self.records}


@dataclass(frozen=True)
class DerivationResult:
    """Everything stage 2 produced, premises and fragment seeds included."""

    logic_name: str
    caps: DegreeVector
    limits: DerivationLimits
    complete: bool
    records: tuple[TheoremRecord, ...]
    term_universe: tuple[Term, ...]
    usage: SaturationUsage = field(compare=False, default=SaturationUsage())

    def non_seed_records(self) -> tuple[TheoremRecord, ...]:
        return tuple(r for r in self.records if r.derivation.kind == "rule")

    def contains(self, formula: Formula) -> TheoremRecord | None:
        """Record equal to ``formula`` up to variants, or a schematic record
        that ``formula`` instantiates."""
        text = render_formula(canonicalize(formula))
        by_text = {r.text: r for r in self.records}
        hit = by_text.get(text)
        if hit is not None:
            return hit
        for r in self.records:
            if r.has_schema and is_instance_of(r.formula, formula):
                return r
        return None


# ---------------------------------------------------------------------------
# Rule application


def _parent_tag(i: int) -> str:
    return f"_P{i}"


@dataclass(frozen=True)
class _RuleContext:
    """Per-rule precomputation: tagged formulas, slot shapes, degree and
    size bounds used to prune parent tuples before they are built."""

    rule: InferenceRule
    premises: tuple[Formula, ...]  # schema atoms tagged apart from parents
    conclusion: Formula
    premise_tops: tuple[str, ...]
    all_bare: bool  # every premise a distinct bare schema atom
    bare_names: tuple[str | None, ...]
    slot_bumps: tuple[dict[str, int] | None, ...]
    conclusion_has_quantifier: bool
    base_size: int  # conclusion size with every schema atom priced at zero
    atom_occurrences: dict[str, int]  # schema atom -> occurrences in conclusion


def _conclusion_bumps(conclusion: Formula, atom: str) -> dict[str, int] | None:
    """Minimal extra nesting each connective adds above any occurrence of
    ``atom`` in ``conclusion``; None when the atom does not occur."""
    best: dict[str, int] | None = None

    def walk(node: Formula, counts: tuple[int, int, int, int]) -> None:
        nonlocal best
        e, a, o, n = counts
        if isinstance(node, SchemaAtom):
            if node.name == atom:
                bump = {ENTAIL: e, AND: a, OR: o, NOT: n}
                if best is None:
                    best = bump
                else:
                    best = {k: min(best[k], bump[k]) for k in bump}
            return
        if isinstance(node, Pred):
            return
        if isinstance(node, Not):
            walk(node.child, (e, a, o, n + 1))
        elif isinstance(node, And):
            walk(node.left, (e, a + 1, o, n))
            walk(node.right, (e, a + 1, o, n))
        elif isinstance(node, Or):
            walk(node.left, (e, a, o + 1, n))
            walk(node.right, (e, a, o + 1, n))
        elif isinstance(node, Entail):
            walk(node.antecedent, (e + 1, a, o, n))
            walk(node.consequent, (e + 1, a, o, n))
        else:
            walk(node.body, counts)

    walk(conclusion, (0, 0, 0, 0))
    return best


def _conclusion_size_shape(conclusion: Formula) -> tuple[int, dict[str, int]]:
    base = 0
    occurrences: dict[str, int] = {}

    def walk(node: Formula) -> None:
        nonlocal base
        if isinstance(node, SchemaAtom):
            occurrences[node.name] = occurrences.get(node.name, 0) + 1
            return
        if isinstance(node, Pred):
            base += formula_size(node)
            return
        base += 1
        for child in children(node):
            walk(child)

    walk(conclusion)
    return base, occurrences


def _rule_context(rule: InferenceRule) -> _RuleContext:
    premises = tuple(tag_schema_atoms(p, _RULE_TAG) for p in rule.premises)
    conclusion = tag_schema_atoms(rule.conclusion, _RULE_TAG)
    tops = tuple(top_kind(p) for p in premises)
    bare_names: list[str | None] = []
    for p in premises:
        bare_names.append(p.name if isinstance(p, SchemaAtom) else None)
    distinct_bare = (
        all(n is not None for n in bare_names)
        and len(set(bare_names)) == len(bare_names)
    )
    bumps: list[dict[str, int] | None] = []
    for name in bare_names:
        bumps.append(_conclusion_bumps(conclusion, name) if name is not None else None)
    base_size, occurrences = _conclusion_size_shape(conclusion)
    return _RuleContext(
        rule=rule,
        premises=premises,
        conclusion=conclusion,
        premise_tops=tops,
        all_bare=distinct_bare,
        bare_names=tuple(bare_names),
        slot_bumps=tuple(bumps),
        conclusion_has_quantifier=has_quantifier(conclusion),
        base_size=base_size,
        atom_occurrences=occurrences,
    )


@dataclass(frozen=True, slots=True)
class _Candidate:
    text: str
    formula: Formula
    degrees: DegreeVector
    size: int
    rule_name: str
    parents: tuple[int, ...]
    subst: Substitution
    route_degree: int
    depth: int
    has_schema: bool
    has_quant: bool


def _combine(ctx: _RuleContext, parents: tuple[TheoremRecord, ...]) -> tuple[Formula, Substitution] | None:
    """Unify every rule premise with its parent; canonical conclusion + MGU."""
    pairs = []
    for i, (premise, parent) in enumerate(zip(ctx.premises, parents)):
        pf = parent.formula
        if parent.has_schema:
            pf = tag_schema_atoms(pf, _parent_tag(i))
        pairs.append((premise, pf))
    if ctx.all_bare:
        # Distinct bare premises bind directly; no unification needed.
        subst = Substitution({p.name: pf for p, pf in pairs}, {})
    else:
        subst = unify_many(pairs)
        if subst is None:
            return None
    conclusion = apply_substitution(ctx.conclusion, subst)
    return canonicalize(conclusion), subst


def apply_rule(
    rule: InferenceRule, parents: "list[TheoremRecord] | tuple[TheoremRecord, ...]"
) -> list[tuple[Formula, Substitution]]:
    """All conclusions (at most one: the MGU) of applying ``rule`` to the
    given parent records, with the substitution used."""
    if len(parents) != len(rule.premises):
        raise EngineError(
            f"rule {rule.name!r} takes {len(rule.premises)} premise(s), "
            f"got {len(parents)} parent(s)"
        )
    ctx = _rule_context(rule)
    combined = _combine(ctx, tuple(parents))
    if combined is None:
        return []
    return [combined]


def record_from_formula(formula: Formula, record_id: int = 0) -> TheoremRecord:
    """Wrap an arbitrary formula as a synthetic record (parents unknown)."""
    canonical = canonicalize(formula)
    return _make_record(
        record_id,
        canonical,
        render_formula(canonical),
        Derivation("premise", "adhoc"),
        depth=0,
        degrees=degree_vector(canonical),
        size=formula_size(canonical),
        is_premise=True,
        logical_instance=False,
        route_degree=0,
        premise_ancestry=True,
    )


def _make_record(
    record_id: int,
    formula: Formula,
    text: str,
    derivation: Derivation,
    *,
    depth: int,
    degrees: DegreeVector,
    size: int,
    is_premise: bool,
    logical_instance: bool,
    route_degree: int,
    premise_ancestry: bool,
) -> TheoremRecord:
    try:
        sharing: bool | None = variable_sharing_holds(formula)
    except NotAConditionalError:
        sharing = None
    kind = top_kind(formula)
    return TheoremRecord(
        id=record_id,
        formula=formula,
        text=text,
        derivation=derivation,
        depth=depth,
        degrees=degrees,
        size=size,
        is_premise=is_premise,
        strong_relevance=strong_relevance_holds(formula),
        variable_sharing=sharing,
        logical_instance=logical_instance,
        route_degree=route_degree,
        premise_ancestry=premise_ancestry,
        top_kind=kind,
        has_schema=has_schema_atoms(formula),
        has_quantifier=has_quantifier(formula),
        existential=kind == "exists",
    )


# ---------------------------------------------------------------------------
# Record store


class _Store:
    def __init__(self) -> None:
        self.records: dict[int, TheoremRecord] = {}
        self.by_text: dict[str, int] = {}
        self.by_kind: dict[str, list[int]] = {}
        self.children: dict[int, int] = {}
        self.by_size: dict[int, list[int]] = {}
        self.schema_ids: list[int] = []
        self.pure_schema_ids: list[int] = []  # schema atoms only at the leaves
        self.next_id = 0

    def __len__(self) -> int:
        return len(self.records)

    def add(self, record: TheoremRecord) -> None:
        self.records[record.id] = record
        self.by_text[record.text] = record.id
        self.by_kind.setdefault(record.top_kind, []).append(record.id)
        self.by_size.setdefault(record.size, []).append(record.id)
        if record.has_schema:
            self.schema_ids.append(record.id)
            if _is_pure_schema(record.formula):
                self.pure_schema_ids.append(record.id)
        for pid in record.derivation.parents:
            self.children[pid] = self.children.get(pid, 0) + 1

    def remove(self, record: TheoremRecord) -> None:
        del self.records[record.id]
        del self.by_text[record.text]
        self.by_kind[record.top_kind].remove(record.id)
        self.by_size[record.size].remove(record.id)
        if record.has_schema:
            self.schema_ids.remove(record.id)
            if record.id in self.pure_schema_ids:
                self.pure_schema_ids.remove(record.id)
        for pid in record.derivation.parents:
            self.children[pid] -= 1

    def size_bounded_ids(self, max_size: int, lo: int, hi: int) -> list[int]:
        """Active ids in [lo, hi) with formula size at most ``max_size``."""
        out: list[int] = []
        for size, ids in self.by_size.items():
            if size <= max_size:
                out.extend(self.kind_slice_from(ids, lo, hi))
        out.sort()
        return out

    def kind_slice(self, kind: str, lo: int, hi: int) -> list[int]:
        ids = self.by_kind.get(kind, ())
        left = bisect.bisect_left(ids, lo)
        right = bisect.bisect_left(ids, hi)
        return ids[left:right]

    def candidates_for(self, pattern_top: str, lo: int, hi: int) -> list[int]:
        """Active ids in [lo, hi) whose top shape can unify with the pattern."""
        if pattern_top == "schema":
            out = []
            for ids in self.by_kind.values():
                out.extend(self.kind_slice_from(ids, lo, hi))
            out.sort()
            return out
        matches = self.kind_slice(pattern_top, lo, hi)
        schemas = self.kind_slice("schema", lo, hi)
        if not schemas:
            return matches
        return sorted(matches + schemas)

    @staticmethod
    def kind_slice_from(ids: list[int], lo: int, hi: int) -> list[int]:
        left = bisect.bisect_left(ids, lo)
        right = bisect.bisect_left(ids, hi)
        return ids[left:right]

    def sorted_records(self) -> tuple[TheoremRecord, ...]:
        return tuple(self.records[i] for i in sorted(self.records))


def _is_pure_schema(f: Formula) -> bool:
    """True when every leaf of ``f`` is a schema atom (no predicates)."""
    if isinstance(f, SchemaAtom):
        return True
    if isinstance(f, Pred):
        return False
    return all(_is_pure_schema(c) for c in children(f))


# ---------------------------------------------------------------------------
# Candidate generation


def _within_caps(degrees: DegreeVector, caps: DegreeVector) -> bool:
    for conn, cap in caps.items():
        if degrees.get(conn, 0) > cap:
            return False
    return True


def _slot_ok(ctx: _RuleContext, slot: int, record: TheoremRecord, caps: DegreeVector) -> bool:
    ptop = ctx.premise_tops[slot]
    if ptop != "schema" and record.top_kind != ptop and record.top_kind != "schema":
        return False
    bumps = ctx.slot_bumps[slot]
    if bumps is not None:
        for conn, cap in caps.items():
            if record.degrees.get(conn, 0) + bumps.get(conn, 0) > cap:
                return False
    return True


def _template_metrics(
    template: Formula,
    slot_degrees: dict[str, DegreeVector],
    slot_sizes: dict[str, int],
) -> tuple[DegreeVector, int]:
    """Degrees and size of ``template`` with each schema atom priced at the
    metrics of its substituted formula."""

    def walk(node: Formula) -> tuple[int, int, int, int, int]:
        if isinstance(node, SchemaAtom):
            d = slot_degrees[node.name]
            return (d[ENTAIL], d[AND], d[OR], d[NOT], slot_sizes[node.name])
        if isinstance(node, Pred):
            return (0, 0, 0, 0, formula_size(node))
        if isinstance(node, Not):
            e, a, o, n, s = walk(node.child)
            return (e, a, o, n + 1, s + 1)
        if isinstance(node, Quantified):
            e, a, o, n, s = walk(node.body)
            return (e, a, o, n, s + 1)
        if isinstance(node, Entail):
            left, right = node.antecedent, node.consequent
        else:
            left, right = node.left, node.right
        le, la, lo, ln, ls = walk(left)
        re_, ra, ro, rn, rs = walk(right)
        e, a, o, n = max(le, re_), max(la, ra), max(lo, ro), max(ln, rn)
        s = ls + rs + 1
        if isinstance(node, Entail):
            return (e + 1, a, o, n, s)
        if isinstance(node, And):
            return (e, a + 1, o, n, s)
        return (e, a, o + 1, n, s)

    e, a, o, n, s = walk(template)
    return ({ENTAIL: e, AND: a, OR: o, NOT: n}, s)


class _Generation:
    """One level's candidate generation over a frozen store snapshot."""

    def __init__(
        self,
        rule_ctxs: tuple[_RuleContext, ...],
        store: _Store,
        boundary: int,
        caps: DegreeVector,
        limits: DerivationLimits,
        require_ancestry: bool,
        instantiate: bool,
        universe: tuple[Term, ...],
    ) -> None:
        self.rule_ctxs = rule_ctxs
        self.store = store
        self.boundary = boundary
        self.caps = caps
        self.limits = limits
        self.require_ancestry = require_ancestry
        self.instantiate = instantiate
        self.universe = universe

    def units(self) -> list[tuple[int, int, int]]:
        """Deterministic stream of (rule_index, new_slot, driver_id) units.

        Rule index ``-1`` denotes universal instantiation of a driver record.
        For binary rules slot 0 always drives and ``new_slot`` says which side
        must come from the current level; for wider rules the driver occupies
        ``new_slot`` itself, earlier slots draw from older records only, and
        later slots from everything, so each parent tuple is enumerated once.
        """
        out: list[tuple[int, int, int]] = []
        end = self.store.next_id
        for ri, ctx in enumerate(self.rule_ctxs):
            arity = len(ctx.premises)
            if arity == 1:
                for pid in self._slot_ids(ctx, 0, self.boundary, end):
                    out.append((ri, 0, pid))
            elif arity == 2:
                for pid in self._slot_ids(ctx, 0, self.boundary, end):
                    out.append((ri, 0, pid))
                for pid in self._slot_ids(ctx, 0, 0, self.boundary):
                    out.append((ri, 1, pid))
            else:
                for j in range(arity):
                    for pid in self._slot_ids(ctx, j, self.boundary, end):
                        out.append((ri, j, pid))
        if self.instantiate and self.universe:
            for pid in self.store.kind_slice(FORALL, self.boundary, end):
                out.append((-1, 0, pid))
        return out

    def _slot_size_limit(self, ctx: _RuleContext, slot: int) -> int | None:
        """Largest parent size slot ``slot`` can take without the conclusion
        overshooting the size limit, assuming minimal other parents.  Only
        meaningful for all-bare rules, whose conclusion size is additive."""
        if not ctx.all_bare:
            return None
        name = ctx.bare_names[slot]
        occ = ctx.atom_occurrences.get(name, 0) if name is not None else 0
        if occ == 0:
            return None
        others_min = sum(
            ctx.atom_occurrences.get(other, 0)
            for i, other in enumerate(ctx.bare_names)
            if i != slot and other is not None
        )
        budget = self.limits.max_formula_size - ctx.base_size - others_min
        return budget // occ

    def _slot_ids(self, ctx: _RuleContext, slot: int, lo: int, hi: int) -> list[int]:
        size_limit = self._slot_size_limit(ctx, slot)
        if size_limit is not None and size_limit < 1:
            return []
        ptop = ctx.premise_tops[slot]
        if size_limit is not None and ptop == "schema":
            ids = self.store.size_bounded_ids(size_limit, lo, hi)
        else:
            ids = self.store.candidates_for(ptop, lo, hi)
        records = self.store.records
        return [i for i in ids if _slot_ok(ctx, slot, records[i], self.caps)]

    def run_unit(self, unit: tuple[int, int, int]) -> list[_Candidate]:
        ri, new_slot, driver_id = unit
        if ri < 0:
            return self._instantiate_unit(driver_id)
        ctx = self.rule_ctxs[ri]
        driver = self.store.records[driver_id]
        if len(ctx.premises) == 1:
            if self.require_ancestry and not driver.premise_ancestry:
                return []
            cand = self._build(ctx, (driver,))
            return [cand] if cand is not None else []
        if len(ctx.premises) > 2:
            return self._wide_unit(ctx, new_slot, driver)
        lo, hi = (0, self.store.next_id) if new_slot == 0 else (self.boundary, self.store.next_id)
        partners = self._partner_ids(ctx, driver, lo, hi)
        out = []
        for pid in partners:
            partner = self.store.records[pid]
            if self.require_ancestry and not (
                driver.premise_ancestry or partner.premise_ancestry
            ):
                continue
            cand = self._build(ctx, (driver, partner))
            if cand is not None:
                out.append(cand)
        return out

    def _partner_ids(self, ctx: _RuleContext, driver: TheoremRecord, lo: int, hi: int) -> list[int]:
        """Ids that can fill slot 1 given the driver in slot 0."""
        if ctx.all_bare:
            name0, name1 = ctx.bare_names
            occ0 = ctx.atom_occurrences.get(name0, 0) if name0 is not None else 0
            occ1 = ctx.atom_occurrences.get(name1, 0) if name1 is not None else 0
            if occ1 > 0:
                budget = self.limits.max_formula_size - ctx.base_size - occ0 * driver.size
                limit = budget // occ1
                if limit < 1:
                    return []
                ids = self.store.size_bounded_ids(limit, lo, hi)
            else:
                ids = self.store.candidates_for(ctx.premise_tops[1], lo, hi)
        elif driver.has_schema:
            ids = self.store.candidates_for(ctx.premise_tops[1], lo, hi)
        else:
            # Driver is concrete: resolve slot 1 through the partial unifier
            # and narrow the lookup, down to an exact fetch when ground.
            sub = unify_many([(ctx.premises[0], driver.formula)])
            if sub is None:
                return []
            pattern = apply_substitution(ctx.premises[1], sub)
            if not has_schema_atoms(pattern):
                text = render_formula(canonicalize(pattern))
                ids = []
                hit = self.store.by_text.get(text)
                if hit is not None and lo <= hit < hi:
                    ids.append(hit)
                ids.extend(self.store.kind_slice("schema", lo, hi))
                ids.sort()
            else:
                ids = self.store.candidates_for(top_kind(pattern), lo, hi)
        records = self.store.records
        return [i for i in ids if _slot_ok(ctx, 1, records[i], self.caps)]

    def _wide_unit(self, ctx: _RuleContext, new_slot: int, driver: TheoremRecord) -> list[_Candidate]:
        """Tuples for rules of arity > 2: the driver fills ``new_slot``,
        earlier slots use pre-level records only, later slots use anything."""
        arity = len(ctx.premises)
        end = self.store.next_id
        out: list[_Candidate] = []

        def extend(chosen: list[TheoremRecord], slot: int) -> None:
            if slot == arity:
                if self.require_ancestry and not any(r.premise_ancestry for r in chosen):
                    return
                cand = self._build(ctx, tuple(chosen))
                if cand is not None:
                    out.append(cand)
                return
            if slot == new_slot:
                extend(chosen + [driver], slot + 1)
                return
            hi = self.boundary if slot < new_slot else end
            for pid in self._slot_ids(ctx, slot, 0, hi):
                extend(chosen + [self.store.records[pid]], slot + 1)

        extend([], 0)
        return out

    def _build(self, ctx: _RuleContext, parents: tuple[TheoremRecord, ...]) -> _Candidate | None:
        if ctx.all_bare:
            return self._build_bare(ctx, parents)
        combined = _combine(ctx, parents)
        if combined is None:
            return None
        formula, subst = combined
        degrees = degree_vector(formula)
        if not _within_caps(degrees, self.caps):
            return None
        size = formula_size(formula)
        if size > self.limits.max_formula_size:
            return None
        return self._candidate(ctx.rule.name, formula, degrees, size, parents, subst)

    def _build_bare(self, ctx: _RuleContext, parents: tuple[TheoremRecord, ...]) -> _Candidate | None:
        slot_degrees: dict[str, DegreeVector] = {}
        slot_sizes: dict[str, int] = {}
        schema_bindings: dict[str, Formula] = {}
        for i, (name, parent) in enumerate(zip(ctx.bare_names, parents)):
            assert name is not None
            pf = parent.formula
            if parent.has_schema:
                pf = tag_schema_atoms(pf, _parent_tag(i))
            schema_bindings[name] = pf
            slot_degrees[name] = parent.degrees
            slot_sizes[name] = parent.size
        degrees, size = _template_metrics(ctx.conclusion, slot_degrees, slot_sizes)
        if not _within_caps(degrees, self.caps):
            return None
        if size > self.limits.max_formula_size:
            return None
        subst = Substitution(schema_bindings, {})
        raw = apply_substitution(ctx.conclusion, subst)
        if any(p.has_schema for p in parents) or ctx.conclusion_has_quantifier or any(
            p.has_quantifier for p in parents
        ):
            formula = canonicalize(raw)
        else:
            formula = raw
        return self._candidate(ctx.rule.name, formula, degrees, size, parents, subst)

    def _candidate(
        self,
        rule_name: str,
        formula: Formula,
        degrees: DegreeVector,
        size: int,
        parents: tuple[TheoremRecord, ...],
        subst: Substitution,
    ) -> _Candidate | None:
        text = render_formula(formula)
        if text in self.store.by_text:
            return None
        depth = 1 + max(p.depth for p in parents)
        route = max([degrees.get(ENTAIL, 0)] + [p.route_degree for p in parents])
        return _Candidate(
            text=text,
            formula=formula,
            degrees=degrees,
            size=size,
            rule_name=rule_name,
            parents=tuple(p.id for p in parents),
            subst=subst,
            route_degree=route,
            depth=depth,
            has_schema=has_schema_atoms(formula),
            has_quant=has_quantifier(formula),
        )

    def _instantiate_unit(self, driver_id: int) -> list[_Candidate]:
        driver = self.store.records[driver_id]
        if self.require_ancestry and not driver.premise_ancestry:
            return []
        assert isinstance(driver.formula, Quantified)
        out = []
        for term in self.universe:
            subst = Substitution({}, {driver.formula.var: term})
            body = apply_substitution(driver.formula.body, subst)
            formula = canonicalize(body)
            degrees = driver.degrees  # term substitution never changes degrees
            if not _within_caps(degrees, self.caps):
                continue
            size = formula_size(formula)
            if size > self.limits.max_formula_size:
                continue
            text = render_formula(formula)
            if text in self.store.by_text:
                continue
            out.append(
                _Candidate(
                    text=text,
                    formula=formula,
                    degrees=dict(degrees),
                    size=size,
                    rule_name=FORALL_ELIM,
                    parents=(driver.id,),
                    subst=subst,
                    route_degree=max(degrees.get(ENTAIL, 0), driver.route_degree),
                    depth=driver.depth + 1,
                    has_schema=driver.has_schema,
                    has_quant=has_quantifier(formula),
                )
            )
        return out


# ---------------------------------------------------------------------------
# Worker pool plumbing

_WORKER_GENERATION: _Generation | None = None


def _worker_init(generation: _Generation) -> None:
    global _WORKER_GENERATION
    _WORKER_GENERATION = generation


def _worker_run(units: list[tuple[int, int, int]]) -> list[list[_Candidate]]:
    assert _WORKER_GENERATION is not None
    return [_WORKER_GENERATION.run_unit(u) for u in units]


def _generate_level(generation: _Generation, workers: int, pool_cap: int) -> tuple[dict[str, _Candidate], int, bool]:
    """Run all units, merge their candidate streams in unit order, and cut
    the stream once ``pool_cap`` distinct new texts have been collected."""
    units = generation.units()
    merged: dict[str, _Candidate] = {}
    seen = 0
    cut = False

    def feed(batch: list[_Candidate]) -> bool:
        nonlocal seen, cut
        for cand in batch:
            seen += 1
            if cand.text not in merged:
                if len(merged) >= pool_cap:
                    cut = True
                    return False
                merged[cand.text] = cand
        return True

    if workers <= 1 or len(units) < 64:
        for unit in units:
            if not feed(generation.run_unit(unit)):
                break
        return merged, seen, cut

    chunk_size = max(1, (len(units) + workers * 4 - 1) // (workers * 4))
    chunks = [units[i : i + chunk_size] for i in range(0, len(units), chunk_size)]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=workers, initializer=_worker_init, initargs=(generation,)) as pool:
        for chunk_result in pool.imap(_worker_run, chunks):
            stop = False
            for batch in chunk_result:
                if not feed(batch):
                    stop = True
                    break
            if stop:
                break
    return merged, seen, cut


# ---------------------------------------------------------------------------
# Saturation


@dataclass(frozen=True)
class _Seed:
    formula: Formula  # canonical
    derivation: Derivation
    is_premise: bool
    capped: bool  # enforce degree caps on this seed (stage-1 axioms)
    premise_ancestry: bool


class _FragmentIndex:
    """Fragment schemata prepared for fast instance checks."""

    def __init__(self, records: tuple[TheoremRecord, ...]) -> None:
        self.entries = [
            (r.formula, r.degrees, r.top_kind, r.text) for r in records
        ]

    def is_instance(self, record_text: str, formula: Formula, degrees: DegreeVector, kind: str) -> bool:
        for schema, sdeg, skind, stext in self.entries:
            if stext == record_text:
                return True
            if skind != "schema" and skind != kind:
                continue
            if any(sdeg.get(c, 0) > degrees.get(c, 0) for c in sdeg):
                continue
            if is_instance_of(schema, formula):
                return True
        return False


def _saturate(
    logic: LogicSystem,
    seeds: list[_Seed],
    caps: DegreeVector,
    limits: DerivationLimits,
    *,
    subsume_mode: str,  # "full" | "pure" | "off"
    require_ancestry: bool,
    instantiate: bool = False,
    universe: tuple[Term, ...] = (),
    workers: int = 1,
    fragment_index: _FragmentIndex | None = None,
) -> tuple[_Store, SaturationUsage, bool]:
    start = time.monotonic()
    store = _Store()
    counters = {
        "candidates": 0,
        "duplicates": 0,
        "over_caps": 0,
        "over_size": 0,
        "subsumed": 0,
        "back_subsumed": 0,
    }
    truncated: str | None = None

    def flags_for(formula: Formula, text: str, degrees: DegreeVector, kind: str) -> bool:
        if fragment_index is None:
            return True  # stage 1: every record is a logic theorem
        return fragment_index.is_instance(text, formula, degrees, kind)

    current: list[int] = []
    for seed in seeds:
        if len(store) >= limits.max_records:
            truncated = "max_records"
            break
        text = render_formula(seed.formula)
        if text in store.by_text:
            counters["duplicates"] += 1
            continue
        degrees = degree_vector(seed.formula)
        size = formula_size(seed.formula)
        if seed.capped:
            if not _within_caps(degrees, caps):
                counters["over_caps"] += 1
                continue
            if size > limits.max_formula_size:
                counters["over_size"] += 1
                continue
        record = _make_record(
            store.next_id,
            seed.formula,
            text,
            seed.derivation,
            depth=0,
            degrees=degrees,
            size=size,
            is_premise=seed.is_premise,
            logical_instance=flags_for(seed.formula, text, degrees, top_kind(seed.formula)),
            route_degree=0,
            premise_ancestry=seed.premise_ancestry,
        )
        store.next_id += 1
        store.add(record)
        current.append(record.id)

    rule_ctxs = tuple(_rule_context(rule) for rule in logic.rules)
    level = 0
    while current and truncated is None:
        if level >= limits.max_depth:
            truncated = "max_depth"
            break
        if time.monotonic() - start > limits.time_budget:
            truncated = "time_budget"
            break
        boundary = min(current)
        generation = _Generation(
            rule_ctxs,
            store,
            boundary,
            caps,
            limits,
            require_ancestry,
            instantiate,
            universe,
        )
        remaining = limits.max_records - len(store)
        pool_cap = remaining * 2 + 10_000
        merged, seen, cut = _generate_level(generation, workers, pool_cap)
        counters["candidates"] += seen
        admitted: list[int] = []
        new_schema_ids: list[int] = []
        for i, text in enumerate(sorted(merged)):
            if len(store) >= limits.max_records:
                truncated = "max_records"
                break
            if i % 4096 == 0 and time.monotonic() - start > limits.time_budget:
                truncated = "time_budget"
                break
            cand = merged[text]
            if subsume_mode != "off" and cand.has_schema and _is_subsumed(store, cand, subsume_mode):
                counters["subsumed"] += 1
                continue
            record = _make_record(
                store.next_id,
                cand.formula,
                cand.text,
                Derivation("rule", cand.rule_name, cand.parents, cand.subst),
                depth=cand.depth,
                degrees=cand.degrees,
                size=cand.size,
                is_premise=False,
                logical_instance=flags_for(cand.formula, cand.text, cand.degrees, top_kind(cand.formula)),
                route_degree=cand.route_degree,
                premise_ancestry=(not require_ancestry)
                or any(store.records[p].premise_ancestry for p in cand.parents),
            )
            store.next_id += 1
            store.add(record)
            admitted.append(record.id)
            if record.has_schema:
                new_schema_ids.append(record.id)
        if truncated is None and cut:
            truncated = "max_records"
        if subsume_mode == "full" and truncated is None:
            removed = _back_subsume(store, new_schema_ids)
            counters["back_subsumed"] += len(removed)
            if removed:
                admitted = [i for i in admitted if i in store.records]
        current = admitted
        level += 1

    complete = truncated is None and not current
    usage = SaturationUsage(
        levels=level,
        candidates_seen=counters["candidates"],
        duplicates=counters["duplicates"],
        over_caps=counters["over_caps"],
        over_size=counters["over_size"],
        subsumed=counters["subsumed"],
        back_subsumed=counters["back_subsumed"],
        truncated_by=truncated,
        elapsed=time.monotonic() - start,
    )
    return store, usage, complete


def _is_subsumed(store: _Store, cand: _Candidate, mode: str) -> bool:
    """Is the candidate an instance of an existing schematic record?

    ``full`` checks every schematic record (fragment generation, where the
    store stays small); ``pure`` only checks records built entirely from
    schema atoms, which keeps the check O(1)-ish on schema-heavy empirical
    floods at the cost of keeping some specialized mixed schemata.
    """
    general_ids = store.schema_ids if mode == "full" else store.pure_schema_ids
    cand_kind = top_kind(cand.formula)
    for sid in general_ids:
        general = store.records[sid]
        if any(general.degrees.get(c, 0) > cand.degrees.get(c, 0) for c in general.degrees):
            continue
        if general.top_kind != "schema" and general.top_kind != cand_kind:
            continue
        if general.size > cand.size:
            continue
        if is_instance_of(general.formula, cand.formula):
            return True
    return False


def _back_subsume(store: _Store, new_schema_ids: list[int]) -> list[int]:
    """Drop childless records that a newly admitted schema strictly
    generalizes.  Records with children stay: their ids appear in other
    derivations and removal would break replay."""
    removed: list[int] = []
    for gid in new_schema_ids:
        if gid not in store.records:
            continue
        general = store.records[gid]
        victims = []
        target_kinds = (
            list(store.by_kind)
            if general.top_kind == "schema"
            else [general.top_kind, "schema"]
        )
        for kind in target_kinds:
            for rid in store.by_kind.get(kind, ()):
                if rid == gid:
                    continue
                record = store.records[rid]
                if store.children.get(rid, 0) > 0:
                    continue
                if any(
                    general.degrees.get(c, 0) > record.degrees.get(c, 0)
                    for c in general.degrees
                ):
                    continue
                if is_instance_of(general.formula, record.formula):
                    victims.append(rid)
        for rid in victims:
            store.remove(store.records[rid])
            removed.append(rid)
    return removed


# ---------------------------------------------------------------------------
# Stage 1: logic fragments


def check_caps(caps: DegreeVector, logic: LogicSystem) -> None:
    missing = [conn for conn in logic.signature if conn not in caps]
    if missing:
        raise EngineError(
            f"degree caps must cover every signature connective; missing {missing}"
        )
    for conn, value in caps.items():
        if value < 0:
            raise EngineError(f"cap for {conn!r} must be >= 0")


def generate_fragment(
    logic: LogicSystem,
    caps: DegreeVector,
    limits: DerivationLimits | None = None,
    *,
    subsumption: bool = True,
    workers: int = 1,
) -> Fragment:
    """Saturate the logic's axioms under its rules within ``caps``.

    Axioms whose degrees exceed the caps are excluded by clause rather than
    error.  ``complete`` is True when a fixpoint was reached before any limit.
    """
    limits = limits if limits is not None else DerivationLimits()
    check_caps(caps, logic)
    seeds = [
        _Seed(
            formula=canonicalize(axiom.formula),
            derivation=Derivation("axiom", axiom.name),
            is_premise=False,
            capped=True,
            premise_ancestry=False,
        )
        for axiom in logic.axioms
    ]
    store, usage, complete = _saturate(
        logic,
        seeds,
        caps,
        limits,
        subsume_mode="full" if subsumption else "off",
        require_ancestry=False,
        workers=workers,
    )
    return Fragment(
        logic_name=logic.name,
        caps=dict(caps),
        limits=limits,
        complete=complete,
        records=store.sorted_records(),
        usage=usage,
    )


# ---------------------------------------------------------------------------
# Stage 2: empirical derivation


def build_term_universe(premises: PremiseSet, depth: int) -> tuple[Term, ...]:
    """Ground terms occurring in the premises, closed under the premise
    functions up to ``depth`` nested applications, deterministically ordered."""
    occurring: set[Term] = set()
    functions: set[tuple[str, int]] = set()
    for premise in premises:
        occurring |= ground_terms(premise.formula)
        functions |= function_symbols(premise.formula)
    constants = sorted(
        (name for name, arity in functions if arity == 0)
    )
    builders = sorted((n, a) for n, a in functions if a > 0)
    layers: list[set[Term]] = [set(Fun(c) for c in constants)]
    for _ in range(depth):
        previous: set[Term] = set().union(*layers)
        new_layer: set[Term] = set()
        for name, arity in builders:
            if arity == 1:
                for t in previous:
                    new_layer.add(Fun(name, (t,)))
            else:
                # Multi-argument closure is restricted to the newest layer to
                # keep the universe from exploding combinatorially.
                for t in layers[-1]:
                    new_layer.add(Fun(name, tuple([t] * arity)))
        new_layer -= previous
        if not new_layer:
            break
        layers.append(new_layer)
    universe = occurring.union(*layers)
    return tuple(sorted(universe, key=lambda t: (term_depth(t), render_term(t))))


def term_depth(t: Term) -> int:
    if isinstance(t, Fun) and t.args:
        return 1 + max(term_depth(a) for a in t.args)
    return 0


def derive_from_premises(
    logic: LogicSystem,
    fragment: Fragment,
    premises: PremiseSet,
    caps: DegreeVector,
    limits: DerivationLimits | None = None,
    *,
    instantiate: bool = True,
    instantiation_depth: int = 2,
    subsumption: bool = True,
    workers: int = 1,
) -> DerivationResult:
    """Saturate ``premises`` against the fragment under the logic's rules.

    Premises and fragment members are seeded uncapped; every rule result is
    degree-capped.  Universally quantified records are instantiated over the
    premise term universe when ``instantiate`` is set; existential premises
    are accepted but never expanded.
    """
    limits = limits if limits is not None else DerivationLimits()
    check_caps(caps, logic)
    if fragment.logic_name != logic.name:
        raise EngineError(
            f"fragment was generated for logic {fragment.logic_name!r}, "
            f"not {logic.name!r}"
        )
    for premise in premises:
        outside = connectives_used(premise.formula) - set(logic.signature)
        if outside:
            raise EngineError(
                f"premise {premise.label!r} uses connective(s) {sorted(outside)} "
                f"outside the logic signature"
            )
    seeds: list[_Seed] = []
    for premise in premises:
        seeds.append(
            _Seed(
                formula=canonicalize(premise.formula),
                derivation=Derivation("premise", premise.label),
                is_premise=True,
                capped=False,
                premise_ancestry=True,
            )
        )
    for record in fragment.records:
        seeds.append(
            _Seed(
                formula=record.formula,
                derivation=Derivation("fragment", str(record.id)),
                is_premise=False,
                capped=False,
                premise_ancestry=False,
            )
        )
    universe: tuple[Term, ...] = ()
    if instantiate:
        universe = build_term_universe(premises, instantiation_depth)
    index = _FragmentIndex(fragment.records)
    store, usage, complete = _saturate(
        logic,
        seeds,
        caps,
        limits,
        subsume_mode="pure" if subsumption else "off",
        require_ancestry=True,
        instantiate=instantiate,
        universe=universe,
        workers=workers,
        fragment_index=index,
    )
    return DerivationResult(
        logic_name=logic.name,
        caps=dict(caps),
        limits=limits,
        complete=complete,
        records=store.sorted_records(),
        term_universe=universe,
        usage=usage,
    )


# ---------------------------------------------------------------------------
# Deducibility degree


def deducibility_degree(
    target: Formula,
    premises: PremiseSet,
    fragment: Fragment,
    logic: LogicSystem,
    limits: DerivationLimits | None = None,
    *,
    max_j: int = 8,
    instantiate: bool = True,
    instantiation_depth: int = 2,
) -> int | None:
    """Minimal ``j`` such that ``target`` is derivable from the premises with
    every rule-application result capped at conditional degree ``j``.

    Returns ``None`` when no ``j <= max_j`` reaches the target within the
    limits.  Connectives other than the conditional are left uncapped.
    """
    uncapped = 10**9
    for j in range(max_j + 1):
        caps = {conn: uncapped for conn in (ENTAIL, AND, OR, NOT)}
        caps[ENTAIL] = j
        result = derive_from_premises(
            logic,
            fragment,
            premises,
            caps,
            limits,
            instantiate=instantiate,
            instantiation_depth=instantiation_depth,
            subsumption=True,
        )
        if result.contains(target) is not None:
            return j
    return None


# ---------------------------------------------------------------------------
# Replay verification


class ReplayError(ValueError):
    """A stored derivation does not reproduce its formula."""

    def __init__(self, record_id: int, message: str):
        super().__init__(f"record {record_id}: {message}")
        self.record_id = record_id


def replay_record(
    record: TheoremRecord,
    by_id: dict[int, TheoremRecord],
    logic: LogicSystem,
    fragment: Fragment | None = None,
    premises: PremiseSet | None = None,
) -> None:
    """Re-derive ``record`` from its stored provenance; raise on mismatch."""
    der = record.derivation
    if der.kind == "axiom":
        axiom = logic.axiom(der.name)
        if canonicalize(axiom.formula) != record.formula:
            raise ReplayError(record.id, f"axiom {der.name!r} does not match")
        return
    if der.kind == "premise":
        if premises is None:
            raise ReplayError(record.id, "premise context not supplied")
        for premise in premises:
            if premise.label == der.name:
                if canonicalize(premise.formula) != record.formula:
                    raise ReplayError(record.id, f"premise {der.name!r} does not match")
                return
        raise ReplayError(record.id, f"premise label {der.name!r} not found")
    if der.kind == "fragment":
        if fragment is None:
            raise ReplayError(record.id, "fragment context not supplied")
        for frag_record in fragment.records:
            if frag_record.id == int(der.name):
                if frag_record.formula != record.formula:
                    raise ReplayError(record.id, f"fragment record {der.name} does not match")
                return
        raise ReplayError(record.id, f"fragment record {der.name} not found")
    assert der.kind == "rule"
    try:
        parents = tuple(by_id[p] for p in der.parents)
    except KeyError as exc:
        raise ReplayError(record.id, f"missing parent {exc}") from exc
    if any(p.id >= record.id for p in parents):
        raise ReplayError(record.id, "parent ids must precede the record id")
    if der.name == FORALL_ELIM:
        (parent,) = parents
        if not isinstance(parent.formula, Quantified) or parent.formula.quantifier != FORALL:
            raise ReplayError(record.id, "instantiation parent is not universally quantified")
        if der.subst is None:
            raise ReplayError(record.id, "instantiation lost its substitution")
        replayed = canonicalize(apply_substitution(parent.formula.body, der.subst))
        if replayed != record.formula:
            raise ReplayError(record.id, "instantiation does not reproduce the formula")
        return
    try:
        rule = logic.rule(der.name)
    except KeyError as exc:
        raise ReplayError(record.id, str(exc)) from exc
    results = apply_rule(rule, parents)
    if not results:
        raise ReplayError(record.id, f"rule {der.name!r} no longer applies to its parents")
    formula, _subst = results[0]
    if formula != record.formula:
        raise ReplayError(
            record.id,
            f"rule {der.name!r} reproduces {render_formula(formula)!r}, "
            f"not {record.text!r}",
        )
    if der.subst is not None:
        ctx = _rule_context(rule)
        via_stored = canonicalize(apply_substitution(ctx.conclusion, der.subst))
        if via_stored != record.formula:
            raise ReplayError(
                record.id, "stored substitution does not reproduce the formula"
            )


def verify_derivations(
    records: tuple[TheoremRecord, ...],
    logic: LogicSystem,
    fragment: Fragment | None = None,
    premises: PremiseSet | None = None,
) -> list[str]:
    """Replay every record; return failure messages (empty = all replay)."""
    by_id = {r.id: r for r in records}
    failures = []
    for record in records:
        try:
            replay_record(record, by_id, logic, fragment, premises)
        except ReplayError as exc:
            failures.append(str(exc))
    return failures
