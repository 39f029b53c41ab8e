"""Fragment cache files: save a generated fragment, reload it with full
replay verification so a tampered or stale cache is refused.

Format: a fixed header followed by one record per line::

    rforge-fragment v1
    logic: <name>
    caps: =>:2,&:1,|:0,~:0
    limits: depth=10,records=1000000,size=80,time=300.0
    complete: true
    records: <count>
    <id> TAB <depth> TAB axiom:<name>|rule:<name> TAB parent-ids|- TAB <formula>

Lines are sorted by id; ids may have gaps (subsumption-removed records are
not part of a fragment).  UTF-8, LF line endings.
"""

from __future__ import annotations

from pathlib import Path

from .analysis import degree_vector
from .engine import (
    Derivation,
    DerivationLimits,
    Fragment,
    SaturationUsage,
    TheoremRecord,
    _make_record,
    apply_rule,
    replay_record,
)
from .formulas import CONNECTIVES, formula_size, render_formula
from .logic import LogicSystem
from .parser import parse_formula

MAGIC = "rforge-fragment v1"


class CacheFormatError(ValueError):
    """Malformed fragment cache file."""


class CacheReplayError(ValueError):
    """A cache line fails to replay from its recorded provenance."""

    def __init__(self, record_id: int, message: str):
        super().__init__(f"fragment cache record {record_id}: {message}")
        self.record_id = record_id


def format_caps(caps: dict[str, int]) -> str:
    return ",".join(f"{conn}:{caps[conn]}" for conn in CONNECTIVES if conn in caps)


def parse_caps(text: str) -> dict[str, int]:
    """Parse a ``=>:2,&:1`` cap string into a degree-vector dict."""
    caps: dict[str, int] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        conn, sep, value = part.rpartition(":")
        if not sep or conn not in CONNECTIVES:
            raise CacheFormatError(f"bad cap entry {part!r}; expected '<connective>:<n>'")
        try:
            caps[conn] = int(value)
        except ValueError as exc:
            raise CacheFormatError(f"bad cap value in {part!r}") from exc
        if caps[conn] < 0:
            raise CacheFormatError(f"negative cap in {part!r}")
    if not caps:
        raise CacheFormatError(f"no caps in {text!r}")
    return caps


def _format_limits(limits: DerivationLimits) -> str:
    return (
        f"depth={limits.max_depth},records={limits.max_records},"
        f"size={limits.max_formula_size},time={limits.time_budget!r}"
    )


def _parse_limits(text: str) -> DerivationLimits:
    fields: dict[str, str] = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise CacheFormatError(f"bad limits entry {part!r}")
        fields[key.strip()] = value.strip()
    try:
        return DerivationLimits(
            max_depth=int(fields["depth"]),
            max_records=int(fields["records"]),
            max_formula_size=int(fields["size"]),
            time_budget=float(fields["time"]),
        )
    except (KeyError, ValueError) as exc:
        raise CacheFormatError(f"bad limits line {text!r}: {exc}") from exc


def save_fragment(fragment: Fragment, path: str | Path) -> Path:
    path = Path(path)
    lines = [
        MAGIC,
        f"logic: {fragment.logic_name}",
        f"caps: {format_caps(fragment.caps)}",
        f"limits: {_format_limits(fragment.limits)}",
        f"complete: {'true' if fragment.complete else 'false'}",
        f"records: {len(fragment.records)}",
    ]
    for record in fragment.records:
        der = record.derivation
        parents = ",".join(str(p) for p in der.parents) if der.parents else "-"
        lines.append(
            f"{record.id}\t{record.depth}\t{der.kind}:{der.name}\t{parents}\t{record.text}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def _header_value(line: str, key: str, lineno: int) -> str:
    prefix = f"{key}: "
    if not line.startswith(prefix):
        raise CacheFormatError(f"line {lineno}: expected '{key}: ...', got {line!r}")
    return line[len(prefix) :]


def load_fragment(path: str | Path, logic: LogicSystem) -> Fragment:
    """Load a fragment cache; every derivation is replayed against ``logic``
    and the file is refused on any mismatch."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MAGIC:
        raise CacheFormatError(f"{path}: not a fragment cache (missing {MAGIC!r} header)")
    if len(lines) < 6:
        raise CacheFormatError(f"{path}: truncated header")
    logic_name = _header_value(lines[1], "logic", 2)
    if logic_name != logic.name:
        raise CacheFormatError(
            f"{path}: fragment was generated for logic {logic_name!r}, "
            f"not {logic.name!r}"
        )
    caps = parse_caps(_header_value(lines[2], "caps", 3))
    limits = _parse_limits(_header_value(lines[3], "limits", 4))
    complete_text = _header_value(lines[4], "complete", 5)
    if complete_text not in ("true", "false"):
        raise CacheFormatError(f"{path}: bad complete flag {complete_text!r}")
    complete = complete_text == "true"
    try:
        count = int(_header_value(lines[5], "records", 6))
    except ValueError as exc:
        raise CacheFormatError(f"{path}: bad record count") from exc

    records: dict[int, TheoremRecord] = {}
    last_id = -1
    body = lines[6:]
    if len([ln for ln in body if ln.strip()]) != count:
        raise CacheFormatError(
            f"{path}: header declares {count} records, file has "
            f"{len([ln for ln in body if ln.strip()])}"
        )
    for offset, line in enumerate(body, start=7):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise CacheFormatError(f"{path}:{offset}: expected 5 tab-separated fields")
        id_text, depth_text, kind_name, parent_text, formula_text = parts
        try:
            record_id = int(id_text)
            depth = int(depth_text)
        except ValueError as exc:
            raise CacheFormatError(f"{path}:{offset}: bad id/depth") from exc
        if record_id <= last_id:
            raise CacheFormatError(f"{path}:{offset}: ids must be strictly increasing")
        last_id = record_id
        kind, sep, name = kind_name.partition(":")
        if not sep or kind not in ("axiom", "rule"):
            raise CacheFormatError(f"{path}:{offset}: bad derivation {kind_name!r}")
        if parent_text == "-":
            parents: tuple[int, ...] = ()
        else:
            try:
                parents = tuple(int(p) for p in parent_text.split(","))
            except ValueError as exc:
                raise CacheFormatError(f"{path}:{offset}: bad parent ids") from exc
        try:
            formula = parse_formula(formula_text)
        except ValueError as exc:
            raise CacheReplayError(record_id, f"formula does not parse: {exc}") from exc
        if render_formula(formula) != formula_text:
            raise CacheReplayError(record_id, "formula text is not canonical")
        record = _rebuild(record_id, formula, formula_text, kind, name, parents, depth, logic, records)
        records[record_id] = record

    fragment = Fragment(
        logic_name=logic_name,
        caps=caps,
        limits=limits,
        complete=complete,
        records=tuple(records[i] for i in sorted(records)),
        usage=SaturationUsage(),
    )
    seen: set[str] = set()
    for record in fragment.records:
        if record.text in seen:
            raise CacheReplayError(record.id, "duplicate record (variants must be unique)")
        seen.add(record.text)
        for conn, cap in caps.items():
            if record.degrees.get(conn, 0) > cap:
                raise CacheReplayError(record.id, f"degree of {conn!r} exceeds cap {cap}")
    return fragment


def _rebuild(
    record_id: int,
    formula,
    text: str,
    kind: str,
    name: str,
    parents: tuple[int, ...],
    depth: int,
    logic: LogicSystem,
    records: dict[int, TheoremRecord],
) -> TheoremRecord:
    if kind == "axiom":
        derivation = Derivation("axiom", name)
        if depth != 0:
            raise CacheReplayError(record_id, "axiom records must have depth 0")
    else:
        try:
            rule = logic.rule(name)
        except KeyError as exc:
            raise CacheReplayError(record_id, str(exc)) from exc
        if len(parents) != len(rule.premises):
            raise CacheReplayError(record_id, f"rule {name!r} arity mismatch")
        try:
            parent_records = tuple(records[p] for p in parents)
        except KeyError as exc:
            raise CacheReplayError(record_id, f"missing parent {exc}") from exc
        results = apply_rule(rule, parent_records)
        if not results or results[0][0] != formula:
            raise CacheReplayError(record_id, f"rule {name!r} does not reproduce the formula")
        derivation = Derivation("rule", name, parents, results[0][1])
        if depth != 1 + max(r.depth for r in parent_records):
            raise CacheReplayError(record_id, "depth is not 1 + max parent depth")
    record = _make_record(
        record_id,
        formula,
        text,
        derivation,
        depth=depth,
        degrees=degree_vector(formula),
        size=formula_size(formula),
        is_premise=False,
        logical_instance=True,
        route_degree=0,
        premise_ancestry=False,
    )
    if kind == "axiom":
        replay_record(record, records, logic)
    return record
