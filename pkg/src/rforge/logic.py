"""Data-driven logic systems: named axiom schemata plus inference rules.

A logic lives in a JSON document with the shape::

    {
      "name": "srl-entailment-mini",
      "signature": ["=>", "&", "|", "~"],
      "axioms": [{"name": "Id", "formula": "A => A"}, ...],
      "rules": [{"name": "MP", "premises": ["A => B", "A"],
                 "conclusion": "B"}, ...]
    }

Unknown fields are rejected.  An axiom without schema atoms must carry
``"concrete": true``.  Every schema atom of a rule conclusion must occur in
one of its premises.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .analysis import (
    DegreeVector,
    NotAConditionalError,
    degree_vector,
    strong_relevance_holds,
    variable_sharing_holds,
)
from .formulas import CONNECTIVES, Formula, connectives_used, has_schema_atoms, schema_atom_names
from .parser import SignatureContext, parse_formula

RESERVED_RULE_NAMES = ("forall-elim",)

_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")


class LogicError(ValueError):
    """Structural problem in a logic definition."""


@dataclass(frozen=True)
class AxiomSchema:
    name: str
    formula: Formula
    concrete: bool = False


@dataclass(frozen=True)
class InferenceRule:
    name: str
    premises: tuple[Formula, ...]
    conclusion: Formula


@dataclass(frozen=True)
class LogicSystem:
    name: str
    axioms: tuple[AxiomSchema, ...]
    rules: tuple[InferenceRule, ...]
    signature: tuple[str, ...]

    def axiom(self, name: str) -> AxiomSchema:
        for axiom in self.axioms:
            if axiom.name == name:
                return axiom
        raise KeyError(f"no axiom named {name!r} in logic {self.name!r}")

    def rule(self, name: str) -> InferenceRule:
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(f"no rule named {name!r} in logic {self.name!r}")


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise LogicError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise LogicError(f"{where}: missing field(s) {sorted(missing)}")


def _check_name(name: object, where: str) -> str:
    if not isinstance(name, str) or not name:
        raise LogicError(f"{where}: name must be a nonempty string")
    if not set(name) <= _NAME_CHARS or ":" in name:
        raise LogicError(f"{where}: invalid name {name!r}")
    return name


def _check_signature(logic_name: str, signature: object) -> tuple[str, ...]:
    if not isinstance(signature, list) or not signature:
        raise LogicError(f"logic {logic_name!r}: signature must be a nonempty list")
    for conn in signature:
        if conn not in CONNECTIVES:
            raise LogicError(
                f"logic {logic_name!r}: unknown connective {conn!r} in signature"
            )
    if len(set(signature)) != len(signature):
        raise LogicError(f"logic {logic_name!r}: duplicate connective in signature")
    return tuple(signature)


def _check_connectives(f: Formula, signature: tuple[str, ...], where: str) -> None:
    outside = connectives_used(f) - set(signature)
    if outside:
        raise LogicError(f"{where}: uses connective(s) {sorted(outside)} outside the signature")


def load_logic_dict(document: dict) -> LogicSystem:
    """Build a validated :class:`LogicSystem` from a parsed JSON document."""
    if not isinstance(document, dict):
        raise LogicError("logic document must be a JSON object")
    _require_keys(
        document,
        allowed={"name", "signature", "axioms", "rules"},
        required={"name", "signature", "axioms", "rules"},
        where="logic document",
    )
    name = _check_name(document["name"], "logic document")
    signature = _check_signature(name, document["signature"])
    context = SignatureContext()

    axioms: list[AxiomSchema] = []
    seen_names: set[str] = set()
    if not isinstance(document["axioms"], list):
        raise LogicError(f"logic {name!r}: axioms must be a list")
    for i, entry in enumerate(document["axioms"]):
        where = f"axiom #{i + 1}"
        if not isinstance(entry, dict):
            raise LogicError(f"{where}: must be an object")
        _require_keys(entry, {"name", "formula", "concrete"}, {"name", "formula"}, where)
        axiom_name = _check_name(entry["name"], where)
        if axiom_name in seen_names:
            raise LogicError(f"{where}: duplicate name {axiom_name!r}")
        seen_names.add(axiom_name)
        concrete = bool(entry.get("concrete", False))
        try:
            formula = parse_formula(entry["formula"], context)
        except ValueError as exc:
            raise LogicError(f"axiom {axiom_name!r}: {exc}") from exc
        _check_connectives(formula, signature, f"axiom {axiom_name!r}")
        if not has_schema_atoms(formula) and not concrete:
            raise LogicError(
                f"axiom {axiom_name!r}: no schema atoms; add \"concrete\": true "
                f"if this is intended as a concrete axiom"
            )
        axioms.append(AxiomSchema(axiom_name, formula, concrete))

    rules: list[InferenceRule] = []
    if not isinstance(document["rules"], list):
        raise LogicError(f"logic {name!r}: rules must be a list")
    for i, entry in enumerate(document["rules"]):
        where = f"rule #{i + 1}"
        if not isinstance(entry, dict):
            raise LogicError(f"{where}: must be an object")
        _require_keys(entry, {"name", "premises", "conclusion"}, {"name", "premises", "conclusion"}, where)
        rule_name = _check_name(entry["name"], where)
        if rule_name in seen_names:
            raise LogicError(f"{where}: duplicate name {rule_name!r}")
        if rule_name in RESERVED_RULE_NAMES:
            raise LogicError(f"{where}: rule name {rule_name!r} is reserved")
        seen_names.add(rule_name)
        if not isinstance(entry["premises"], list) or not entry["premises"]:
            raise LogicError(f"rule {rule_name!r}: premises must be a nonempty list")
        try:
            premises = tuple(parse_formula(p, context) for p in entry["premises"])
            conclusion = parse_formula(entry["conclusion"], context)
        except ValueError as exc:
            raise LogicError(f"rule {rule_name!r}: {exc}") from exc
        for formula in (*premises, conclusion):
            _check_connectives(formula, signature, f"rule {rule_name!r}")
        premise_atoms: set[str] = set()
        for p in premises:
            premise_atoms |= schema_atom_names(p)
        invented = schema_atom_names(conclusion) - premise_atoms
        if invented:
            raise LogicError(
                f"rule {rule_name!r}: conclusion schema atom(s) {sorted(invented)} "
                f"do not occur in any premise"
            )
        rules.append(InferenceRule(rule_name, premises, conclusion))

    return LogicSystem(name, tuple(axioms), tuple(rules), signature)


def load_logic(path: str | Path) -> LogicSystem:
    """Load and validate a logic system from a JSON file."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LogicError(f"{path}: not valid JSON: {exc}") from exc
    return load_logic_dict(document)


# ---------------------------------------------------------------------------
# Validation report


@dataclass(frozen=True)
class AxiomAudit:
    name: str
    degrees: DegreeVector
    strong_relevance: bool
    variable_sharing: bool | None
    flagged: bool


@dataclass(frozen=True)
class LogicReport:
    logic_name: str
    entries: tuple[AxiomAudit, ...]

    @property
    def flagged(self) -> tuple[AxiomAudit, ...]:
        return tuple(e for e in self.entries if e.flagged)

    @property
    def clean(self) -> bool:
        return not self.flagged


def validate_logic(logic: LogicSystem) -> LogicReport:
    """Audit every axiom: degree vector, strong relevance, variable sharing.

    Failing strong relevance is a warning, not an error; non-relevant systems
    are legitimate, they just will not keep the relevance guarantees.
    """
    entries = []
    for axiom in logic.axioms:
        try:
            sharing: bool | None = variable_sharing_holds(axiom.formula)
        except NotAConditionalError:
            sharing = None
        strong = strong_relevance_holds(axiom.formula)
        entries.append(
            AxiomAudit(
                name=axiom.name,
                degrees=degree_vector(axiom.formula),
                strong_relevance=strong,
                variable_sharing=sharing,
                flagged=not strong,
            )
        )
    return LogicReport(logic.name, tuple(entries))


# ---------------------------------------------------------------------------
# Bundled presets


def available_presets() -> list[str]:
    root = resources.files("rforge") / "presets"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> LogicSystem:
    """Load a bundled logic preset by name (see :func:`available_presets`)."""
    root = resources.files("rforge") / "presets"
    candidate = root / f"{name}.json"
    if not candidate.is_file():
        raise LogicError(f"no preset named {name!r}; available: {available_presets()}")
    return load_logic_dict(json.loads(candidate.read_text(encoding="utf-8")))


def preset_path(name: str) -> Path:
    """Filesystem path of a bundled preset (logics: ``<name>.json``)."""
    root = resources.files("rforge") / "presets"
    candidate = root / f"{name}.json"
    if not candidate.is_file():
        raise LogicError(f"no preset named {name!r}; available: {available_presets()}")
    return Path(str(candidate))
