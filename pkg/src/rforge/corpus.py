"""Corpus export and statistics.

A corpus is one JSON object per line, sorted by record id::

    {"id": 17, "formula": "q & r", "degrees": {"=>": 0, "&": 1, "|": 0,
     "~": 0}, "depth": 2, "rule": "Adjunction", "parents": [5, 9],
     "j_degree": 1, "flags": {"is_premise": false, "strong_relevance": false,
     "variable_sharing": null, "logical_instance": false}}

``rule`` is ``premise:<label>`` / ``fragment:<id>`` / ``axiom:<name>`` for
seeds and the rule name for derived records.  ``j_degree`` is the
conditional-degree bound witnessed by the recorded derivation route (the
deducibility-degree operation computes the true minimum on demand).
``variable_sharing`` is null when the formula is not a conditional.

The text format keeps only the canonical formula, one per line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .engine import TheoremRecord
from .formulas import CONNECTIVES, ENTAIL


@dataclass(frozen=True)
class CorpusEntry:
    id: int
    formula: str
    degrees: dict[str, int]
    depth: int
    rule: str
    parents: tuple[int, ...]
    j_degree: int | None
    is_premise: bool
    strong_relevance: bool
    variable_sharing: bool | None
    logical_instance: bool

    def to_json(self) -> str:
        payload = {
            "id": self.id,
            "formula": self.formula,
            "degrees": {conn: self.degrees.get(conn, 0) for conn in CONNECTIVES},
            "depth": self.depth,
            "rule": self.rule,
            "parents": list(self.parents),
            "j_degree": self.j_degree,
            "flags": {
                "is_premise": self.is_premise,
                "strong_relevance": self.strong_relevance,
                "variable_sharing": self.variable_sharing,
                "logical_instance": self.logical_instance,
            },
        }
        return json.dumps(payload, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "CorpusEntry":
        payload = json.loads(line)
        flags = payload["flags"]
        return cls(
            id=payload["id"],
            formula=payload["formula"],
            degrees={str(k): int(v) for k, v in payload["degrees"].items()},
            depth=payload["depth"],
            rule=payload["rule"],
            parents=tuple(payload["parents"]),
            j_degree=payload["j_degree"],
            is_premise=flags["is_premise"],
            strong_relevance=flags["strong_relevance"],
            variable_sharing=flags["variable_sharing"],
            logical_instance=flags["logical_instance"],
        )


def entry_from_record(record: TheoremRecord) -> CorpusEntry:
    return CorpusEntry(
        id=record.id,
        formula=record.text,
        degrees=dict(record.degrees),
        depth=record.depth,
        rule=record.derivation.ref,
        parents=record.derivation.parents,
        j_degree=record.route_degree,
        is_premise=record.is_premise,
        strong_relevance=record.strong_relevance,
        variable_sharing=record.variable_sharing,
        logical_instance=record.logical_instance,
    )


def export_corpus(
    records: "tuple[TheoremRecord, ...] | list[TheoremRecord]",
    path: str | Path,
    fmt: str = "jsonl",
) -> Path:
    """Write the records to ``path`` sorted by id; UTF-8, LF endings.

    ``jsonl`` keeps full entries; ``text`` keeps one canonical formula per
    line (the bare corpus).
    """
    if fmt not in ("jsonl", "text"):
        raise ValueError(f"unknown corpus format {fmt!r}; expected 'jsonl' or 'text'")
    path = Path(path)
    ordered = sorted(records, key=lambda r: r.id)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            if fmt == "jsonl":
                for record in ordered:
                    handle.write(entry_from_record(record).to_json())
                    handle.write("\n")
            else:
                for record in ordered:
                    handle.write(record.text)
                    handle.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write corpus to {path}: {exc}") from exc
    return path


class CorpusFormatError(ValueError):
    """Malformed corpus line, carrying the 1-based line number."""

    def __init__(self, path: Path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


@dataclass
class CorpusStats:
    path: str
    total: int = 0
    premises: int = 0
    derived: int = 0
    logical_instances: int = 0
    strong_relevance: int = 0
    variable_sharing: int = 0
    duplicates: int = 0
    degree_histogram: dict[int, int] = field(default_factory=dict)
    depth_histogram: dict[int, int] = field(default_factory=dict)
    rule_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "total": self.total,
            "premises": self.premises,
            "derived": self.derived,
            "logical_instances": self.logical_instances,
            "strong_relevance": self.strong_relevance,
            "variable_sharing": self.variable_sharing,
            "duplicates": self.duplicates,
            "degree_histogram": {str(k): v for k, v in sorted(self.degree_histogram.items())},
            "depth_histogram": {str(k): v for k, v in sorted(self.depth_histogram.items())},
            "rule_counts": dict(sorted(self.rule_counts.items())),
        }

    def lines(self) -> list[str]:
        out = [
            f"corpus: {self.path}",
            f"  total entries:      {self.total}",
            f"  premises:           {self.premises}",
            f"  derived:            {self.derived}",
            f"  logical instances:  {self.logical_instances}",
            f"  strong relevance:   {self.strong_relevance}",
            f"  variable sharing:   {self.variable_sharing}",
            f"  duplicates:         {self.duplicates}",
        ]
        if self.degree_histogram:
            hist = ", ".join(f"{k}: {v}" for k, v in sorted(self.degree_histogram.items()))
            out.append(f"  conditional-degree histogram: {hist}")
        if self.depth_histogram:
            hist = ", ".join(f"{k}: {v}" for k, v in sorted(self.depth_histogram.items()))
            out.append(f"  depth histogram: {hist}")
        for rule, count in sorted(self.rule_counts.items()):
            out.append(f"  rule {rule}: {count}")
        return out


def corpus_stats(path: str | Path) -> CorpusStats:
    """Tally a JSONL corpus: totals, histograms, per-rule counts, and the
    duplicate check (duplicates must be zero for a well-formed corpus)."""
    path = Path(path)
    stats = CorpusStats(path=str(path))
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entry = CorpusEntry.from_json(line)
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusFormatError(path, lineno, f"malformed entry: {exc}") from exc
            stats.total += 1
            if entry.formula in seen:
                stats.duplicates += 1
            seen.add(entry.formula)
            if entry.is_premise:
                stats.premises += 1
            if entry.rule.partition(":")[0] not in ("premise", "fragment", "axiom"):
                stats.derived += 1
                stats.rule_counts[entry.rule] = stats.rule_counts.get(entry.rule, 0) + 1
            if entry.logical_instance:
                stats.logical_instances += 1
            if entry.strong_relevance:
                stats.strong_relevance += 1
            if entry.variable_sharing:
                stats.variable_sharing += 1
            degree = entry.degrees.get(ENTAIL, 0)
            stats.degree_histogram[degree] = stats.degree_histogram.get(degree, 0) + 1
            stats.depth_histogram[entry.depth] = stats.depth_histogram.get(entry.depth, 0) + 1
    return stats
