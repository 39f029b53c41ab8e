"""Formal theories over a premise set: logical/empirical partition,
direct and derived inconsistency checks, and the explosion probe.

Membership of the logical part is approximated by "matches a schema of the
generated fragment"; that under-approximates the full set of logic theorems,
so the empirical part may contain instances of theorems the fragment's caps
excluded.  Every report carries this caveat.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import canonicalize
from .engine import (
    Derivation,
    DerivationLimits,
    DerivationResult,
    Fragment,
    SaturationUsage,
    TheoremRecord,
    _Seed,
    _saturate,
    check_caps,
)
from .formulas import Formula, Not, render_formula
from .logic import LogicSystem
from .premises import PremiseSet

LOGICAL_PART_CAVEAT = (
    "logical-part membership is approximated by matching fragment schemata; "
    "records outside every schema may still be logic theorems beyond the caps"
)

DIRECTLY_INCONSISTENT = "directly-inconsistent"
INDIRECTLY_INCONSISTENT = "indirectly-inconsistent"
NO_INCONSISTENCY_FOUND = "no-inconsistency-found"


@dataclass(frozen=True)
class ConsistencyVerdict:
    status: str
    witness: Formula | None = None  # A such that A and ~A are both present
    positive_id: int | None = None  # record holding A (derived scan only)
    negative_id: int | None = None  # record holding ~A
    bounds: str = ""

    @property
    def witness_text(self) -> str | None:
        return render_formula(self.witness) if self.witness is not None else None


@dataclass(frozen=True)
class FormalTheory:
    logic_name: str
    fragment_caps: dict[str, int]
    premise_labels: tuple[str, ...]
    empirical: tuple[TheoremRecord, ...]
    logical_instances: tuple[TheoremRecord, ...]
    consistency: ConsistencyVerdict
    caveat: str = LOGICAL_PART_CAVEAT


def check_direct_inconsistency(premises: PremiseSet) -> Formula | None:
    """Some formula A with both A and ~A in the premise set, else None."""
    texts = {render_formula(canonicalize(p.formula)) for p in premises}
    for premise in premises:
        formula = canonicalize(premise.formula)
        if isinstance(formula, Not) and render_formula(formula.child) in texts:
            return formula.child
    return None


def check_derived_inconsistency(
    records: tuple[TheoremRecord, ...], premises: PremiseSet
) -> ConsistencyVerdict:
    """Three-way verdict; direct inconsistency takes precedence, and the
    no-inconsistency answer is bounded by what the run searched."""
    direct = check_direct_inconsistency(premises)
    if direct is not None:
        return ConsistencyVerdict(DIRECTLY_INCONSISTENT, witness=direct)
    by_text = {r.text: r for r in records}
    for record in sorted(records, key=lambda r: r.id):
        if isinstance(record.formula, Not):
            partner = by_text.get(render_formula(record.formula.child))
            if partner is not None:
                return ConsistencyVerdict(
                    INDIRECTLY_INCONSISTENT,
                    witness=record.formula.child,
                    positive_id=partner.id,
                    negative_id=record.id,
                )
    max_depth = max((r.depth for r in records), default=0)
    return ConsistencyVerdict(
        NO_INCONSISTENCY_FOUND,
        bounds=f"{len(records)} records searched up to depth {max_depth}",
    )


def partition_theory(
    fragment: Fragment,
    result: DerivationResult,
    premises: PremiseSet,
) -> FormalTheory:
    """Split the derived records into the empirical part and the
    logical-instance part; the parts are disjoint and cover everything."""
    empirical = tuple(r for r in result.records if not r.logical_instance)
    logical = tuple(r for r in result.records if r.logical_instance)
    return FormalTheory(
        logic_name=result.logic_name,
        fragment_caps=dict(fragment.caps),
        premise_labels=tuple(p.label for p in premises),
        empirical=empirical,
        logical_instances=logical,
        consistency=check_derived_inconsistency(result.records, premises),
    )


# ---------------------------------------------------------------------------
# Explosion probe


@dataclass(frozen=True)
class ProbeOutcome:
    probe: Formula
    derived: bool
    record_id: int | None


@dataclass(frozen=True)
class ExplosionReport:
    outcomes: tuple[ProbeOutcome, ...]
    bounds: str
    usage: SaturationUsage

    @property
    def paraconsistent_evidence(self) -> bool:
        return not any(o.derived for o in self.outcomes)


def explosion_probe(
    logic: LogicSystem,
    premises: PremiseSet,
    probes: tuple[Formula, ...],
    limits: DerivationLimits | None = None,
) -> ExplosionReport:
    """Saturate the (deliberately inconsistent) premises against the logic's
    axiom schemata with no degree caps and check whether any probe atom comes
    out.

    Probes that share symbols with the premises are rejected: a probe only
    measures explosion when nothing connects it to the premise set.  A probe
    counts as derived when it appears as a record or instantiates a derived
    schematic record.

    The default limits bound the search by formula size rather than record
    count, which usually lets the saturation reach a fixpoint quickly; widen
    them for a deeper probe.
    """
    limits = (
        limits
        if limits is not None
        else DerivationLimits(
            max_depth=8, max_records=50_000, max_formula_size=12, time_budget=30.0
        )
    )
    premise_idents: set[str] = set()
    for premise in premises:
        premise_idents |= _identifiers(premise.formula)
    for probe in probes:
        shared = _identifiers(probe) & premise_idents
        if shared:
            raise ValueError(
                f"probe {render_formula(probe)!r} occurs in the premises "
                f"(shared symbols: {sorted(shared)})"
            )
    uncapped = 10**9
    caps = {conn: uncapped for conn in ("=>", "&", "|", "~")}
    check_caps(caps, logic)
    seeds = [
        _Seed(
            formula=canonicalize(premise.formula),
            derivation=Derivation("premise", premise.label),
            is_premise=True,
            capped=False,
            premise_ancestry=True,
        )
        for premise in premises
    ]
    seeds.extend(
        _Seed(
            formula=canonicalize(axiom.formula),
            derivation=Derivation("axiom", axiom.name),
            is_premise=False,
            capped=False,
            premise_ancestry=False,
        )
        for axiom in logic.axioms
    )
    store, usage, _complete = _saturate(
        logic,
        seeds,
        caps,
        limits,
        subsume_mode="pure",
        require_ancestry=True,
    )
    result = DerivationResult(
        logic_name=logic.name,
        caps=caps,
        limits=limits,
        complete=_complete,
        records=store.sorted_records(),
        term_universe=(),
        usage=usage,
    )
    outcomes = []
    for probe in probes:
        hit = result.contains(probe)
        outcomes.append(ProbeOutcome(probe, hit is not None, hit.id if hit else None))
    return ExplosionReport(
        outcomes=tuple(outcomes),
        bounds=f"depth <= {limits.max_depth}, {len(result.records)} records",
        usage=usage,
    )


def _identifiers(f: Formula) -> set[str]:
    """Every predicate/function/schema name in ``f`` (for probe overlap)."""
    from .formulas import Pred, SchemaAtom, iter_subformulas

    names: set[str] = set()
    for node in iter_subformulas(f):
        if isinstance(node, (Pred, SchemaAtom)):
            names.add(node.name)
        if isinstance(node, Pred):
            stack = list(node.args)
            while stack:
                t = stack.pop()
                names.add(t.name)
                if hasattr(t, "args"):
                    stack.extend(t.args)
    return names
