"""Labeled premise sets: the empirical inputs of a derivation run.

Premise files hold one ``label: formula`` pair per line; blank lines and
``#`` comments are skipped.  Premises must be closed (every individual
variable bound) and concrete (no schema atoms).
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .formulas import Formula, has_schema_atoms, is_closed, render_formula
from .parser import ParseError, SignatureContext, parse_formula


class PremiseError(ValueError):
    """Invalid premise set: empty, open formulas, schema atoms, bad labels."""


@dataclass(frozen=True)
class Premise:
    label: str
    formula: Formula
    source: str = "<memory>"
    line: int = 0


@dataclass(frozen=True)
class PremiseSet:
    """Nonempty collection of uniquely labeled closed formulas."""

    premises: tuple[Premise, ...]

    def __post_init__(self) -> None:
        if not self.premises:
            raise PremiseError("premise set must be nonempty")
        seen: set[str] = set()
        for p in self.premises:
            if p.label in seen:
                raise PremiseError(f"duplicate premise label {p.label!r}")
            seen.add(p.label)
            if has_schema_atoms(p.formula):
                raise PremiseError(
                    f"premise {p.label!r}: schema atoms are not allowed in premises "
                    f"({render_formula(p.formula)})"
                )
            if not is_closed(p.formula):
                raise PremiseError(
                    f"premise {p.label!r}: formula is not closed "
                    f"({render_formula(p.formula)})"
                )

    def __len__(self) -> int:
        return len(self.premises)

    def __iter__(self):
        return iter(self.premises)

    def formulas(self) -> tuple[Formula, ...]:
        return tuple(p.formula for p in self.premises)


def premise_set_from_texts(pairs: list[tuple[str, str]]) -> PremiseSet:
    """Build a premise set from (label, formula-text) pairs, one shared
    arity context across all lines."""
    context = SignatureContext()
    premises = []
    for label, text in pairs:
        premises.append(Premise(label, parse_formula(text, context)))
    return PremiseSet(tuple(premises))


def load_premises(path: str | Path) -> PremiseSet:
    """Load a ``label: formula`` premise file."""
    path = Path(path)
    context = SignatureContext()
    premises: list[Premise] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        label, sep, text = line.partition(":")
        label = label.strip()
        if not sep or not label:
            raise PremiseError(f"{path}:{lineno}: expected 'label: formula'")
        try:
            formula = parse_formula(text, context)
        except ParseError as exc:
            raise PremiseError(f"{path}:{lineno}: {exc}") from exc
        premises.append(Premise(label, formula, str(path), lineno))
    if not premises:
        raise PremiseError(f"{path}: premise set must be nonempty")
    return PremiseSet(tuple(premises))


def premise_pack_path(name: str) -> Path:
    """Filesystem path of a bundled premise pack (``<name>.premises``)."""
    root = resources.files("rforge") / "presets" / "premises"
    candidate = root / f"{name}.premises"
    if not candidate.is_file():
        available = sorted(
            p.name[: -len(".premises")] for p in root.iterdir() if p.name.endswith(".premises")
        )
        raise PremiseError(f"no premise pack named {name!r}; available: {available}")
    return Path(str(candidate))
