"""One-shot pipeline: fragment generation (or cache reuse), empirical
derivation, filtering, corpus export, and a stats report.

Exit codes: 0 success, 2 parse/format failure in an input file, 3 limit
truncation (a partial corpus is still written and marked), 4 precondition
failure (empty premises, missing caps, mismatched cache, bad paths).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .cache import CacheFormatError, CacheReplayError, load_fragment, save_fragment
from .corpus import corpus_stats, export_corpus
from .engine import (
    DerivationLimits,
    DerivationResult,
    EngineError,
    Fragment,
    TheoremRecord,
    derive_from_premises,
    generate_fragment,
)
from .formulas import CONNECTIVES
from .logic import LogicError, LogicSystem, load_logic
from .premises import PremiseError, PremiseSet, load_premises
from .theory import FormalTheory, partition_theory

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_TRUNCATED = 3
EXIT_PRECONDITION = 4


class PipelineError(Exception):
    """Pipeline failure carrying the process exit code."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass(frozen=True)
class FilterConfig:
    strong_relevance: bool = False
    variable_sharing: bool = False
    exclude_logical_instances: bool = False


@dataclass(frozen=True)
class InstantiationConfig:
    enabled: bool = True
    term_depth: int = 2


@dataclass(frozen=True)
class PipelineManifest:
    logic_path: Path
    fragment_caps: dict[str, int]
    fragment_limits: DerivationLimits
    premises_path: Path
    empirical_caps: dict[str, int]
    empirical_limits: DerivationLimits
    filters: FilterConfig = FilterConfig()
    output_path: Path = Path("corpus.jsonl")
    deterministic: bool = True  # reserved; runs are always seed-independent
    fragment_cache: Path | None = None
    instantiation: InstantiationConfig = InstantiationConfig()
    workers: int = 1


_MANIFEST_KEYS = {
    "logic",
    "fragment_caps",
    "fragment_limits",
    "premises",
    "empirical_caps",
    "empirical_limits",
    "filters",
    "output",
    "deterministic",
    "fragment_cache",
    "instantiation",
    "workers",
}
_REQUIRED_KEYS = {
    "logic",
    "fragment_caps",
    "fragment_limits",
    "premises",
    "empirical_caps",
    "empirical_limits",
    "output",
}


def _caps_from(obj: object, where: str) -> dict[str, int]:
    if not isinstance(obj, dict) or not obj:
        raise PipelineError(f"{where}: caps must be a nonempty object", EXIT_PARSE)
    caps: dict[str, int] = {}
    for conn, value in obj.items():
        if conn not in CONNECTIVES:
            raise PipelineError(f"{where}: unknown connective {conn!r}", EXIT_PARSE)
        if not isinstance(value, int) or value < 0:
            raise PipelineError(f"{where}: cap for {conn!r} must be a natural number", EXIT_PARSE)
        caps[conn] = value
    return caps


def _limits_from(obj: object, where: str) -> DerivationLimits:
    if not isinstance(obj, dict):
        raise PipelineError(f"{where}: limits must be an object", EXIT_PARSE)
    allowed = {"max_depth", "max_records", "max_formula_size", "time_budget"}
    unknown = set(obj) - allowed
    if unknown:
        raise PipelineError(f"{where}: unknown limit field(s) {sorted(unknown)}", EXIT_PARSE)
    defaults = DerivationLimits()
    try:
        return DerivationLimits(
            max_depth=int(obj.get("max_depth", defaults.max_depth)),
            max_records=int(obj.get("max_records", defaults.max_records)),
            max_formula_size=int(obj.get("max_formula_size", defaults.max_formula_size)),
            time_budget=float(obj.get("time_budget", defaults.time_budget)),
        )
    except (TypeError, ValueError, EngineError) as exc:
        raise PipelineError(f"{where}: {exc}", EXIT_PARSE) from exc


def load_manifest(path: str | Path) -> PipelineManifest:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise PipelineError(f"cannot read manifest {path}: {exc}", EXIT_PRECONDITION) from exc
    except json.JSONDecodeError as exc:
        raise PipelineError(f"{path}: not valid JSON: {exc}", EXIT_PARSE) from exc
    if not isinstance(payload, dict):
        raise PipelineError(f"{path}: manifest must be a JSON object", EXIT_PARSE)
    unknown = set(payload) - _MANIFEST_KEYS
    if unknown:
        raise PipelineError(f"{path}: unknown manifest field(s) {sorted(unknown)}", EXIT_PARSE)
    missing = _REQUIRED_KEYS - set(payload)
    if missing:
        raise PipelineError(f"{path}: missing manifest field(s) {sorted(missing)}", EXIT_PARSE)
    base = path.parent

    def resolve(p: object, where: str) -> Path:
        if not isinstance(p, str) or not p:
            raise PipelineError(f"{path}: {where} must be a path string", EXIT_PARSE)
        candidate = Path(p)
        return candidate if candidate.is_absolute() else (base / candidate)

    filters_obj = payload.get("filters", {})
    if not isinstance(filters_obj, dict):
        raise PipelineError(f"{path}: filters must be an object", EXIT_PARSE)
    unknown = set(filters_obj) - {"strong_relevance", "variable_sharing", "exclude_logical_instances"}
    if unknown:
        raise PipelineError(f"{path}: unknown filter field(s) {sorted(unknown)}", EXIT_PARSE)
    filters = FilterConfig(
        strong_relevance=bool(filters_obj.get("strong_relevance", False)),
        variable_sharing=bool(filters_obj.get("variable_sharing", False)),
        exclude_logical_instances=bool(filters_obj.get("exclude_logical_instances", False)),
    )

    inst_obj = payload.get("instantiation", {})
    if not isinstance(inst_obj, dict):
        raise PipelineError(f"{path}: instantiation must be an object", EXIT_PARSE)
    unknown = set(inst_obj) - {"enabled", "term_depth"}
    if unknown:
        raise PipelineError(f"{path}: unknown instantiation field(s) {sorted(unknown)}", EXIT_PARSE)
    instantiation = InstantiationConfig(
        enabled=bool(inst_obj.get("enabled", True)),
        term_depth=int(inst_obj.get("term_depth", 2)),
    )
    workers = payload.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise PipelineError(f"{path}: workers must be a positive integer", EXIT_PARSE)

    cache = payload.get("fragment_cache")
    return PipelineManifest(
        logic_path=resolve(payload["logic"], "logic"),
        fragment_caps=_caps_from(payload["fragment_caps"], f"{path}: fragment_caps"),
        fragment_limits=_limits_from(payload["fragment_limits"], f"{path}: fragment_limits"),
        premises_path=resolve(payload["premises"], "premises"),
        empirical_caps=_caps_from(payload["empirical_caps"], f"{path}: empirical_caps"),
        empirical_limits=_limits_from(payload["empirical_limits"], f"{path}: empirical_limits"),
        filters=filters,
        output_path=resolve(payload["output"], "output"),
        deterministic=bool(payload.get("deterministic", True)),
        fragment_cache=resolve(cache, "fragment_cache") if cache is not None else None,
        instantiation=instantiation,
        workers=workers,
    )


@dataclass
class RunReport:
    manifest: PipelineManifest
    fragment: Fragment
    result: DerivationResult
    theory: FormalTheory
    kept: tuple[TheoremRecord, ...]
    rejections: dict[str, int]
    corpus_path: Path
    stats_path: Path
    stats: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK
    elapsed: float = 0.0


def apply_filters(
    records: tuple[TheoremRecord, ...], filters: FilterConfig
) -> tuple[tuple[TheoremRecord, ...], dict[str, int]]:
    """Drop records failing the enabled filters; returns (kept, rejections).

    The variable-sharing filter only drops conditionals that fail sharing;
    non-conditionals pass (the principle does not apply to them).
    """
    rejections = {"strong_relevance": 0, "variable_sharing": 0, "logical_instance": 0}
    kept = []
    for record in records:
        if filters.strong_relevance and not record.strong_relevance:
            rejections["strong_relevance"] += 1
            continue
        if filters.variable_sharing and record.variable_sharing is False:
            rejections["variable_sharing"] += 1
            continue
        if filters.exclude_logical_instances and record.logical_instance:
            rejections["logical_instance"] += 1
            continue
        kept.append(record)
    return tuple(kept), rejections


def _load_inputs(manifest: PipelineManifest) -> tuple[LogicSystem, PremiseSet]:
    try:
        logic = load_logic(manifest.logic_path)
    except FileNotFoundError as exc:
        raise PipelineError(str(exc), EXIT_PRECONDITION) from exc
    except LogicError as exc:
        raise PipelineError(f"logic file: {exc}", EXIT_PARSE) from exc
    try:
        premises = load_premises(manifest.premises_path)
    except FileNotFoundError as exc:
        raise PipelineError(str(exc), EXIT_PRECONDITION) from exc
    except PremiseError as exc:
        message = str(exc)
        code = EXIT_PRECONDITION if "nonempty" in message else EXIT_PARSE
        raise PipelineError(f"premise file: {message}", code) from exc
    return logic, premises


def _stage_fragment(manifest: PipelineManifest, logic: LogicSystem) -> Fragment:
    cache = manifest.fragment_cache
    if cache is not None and cache.exists():
        try:
            fragment = load_fragment(cache, logic)
        except (CacheFormatError, CacheReplayError) as exc:
            raise PipelineError(f"fragment cache: {exc}", EXIT_PRECONDITION) from exc
        if fragment.caps != manifest.fragment_caps:
            raise PipelineError(
                f"fragment cache caps {fragment.caps} do not match the manifest "
                f"fragment_caps {manifest.fragment_caps}",
                EXIT_PRECONDITION,
            )
        return fragment
    try:
        fragment = generate_fragment(
            logic,
            manifest.fragment_caps,
            manifest.fragment_limits,
            workers=manifest.workers,
        )
    except EngineError as exc:
        raise PipelineError(str(exc), EXIT_PRECONDITION) from exc
    if cache is not None:
        save_fragment(fragment, cache)
    return fragment


def run_pipeline(manifest: PipelineManifest) -> RunReport:
    """Execute both stages, filter, export, and report.

    The corpus file is byte-deterministic for fixed input files; the stats
    file additionally carries wall-clock time.
    """
    started = time.monotonic()
    logic, premises = _load_inputs(manifest)
    fragment = _stage_fragment(manifest, logic)
    try:
        result = derive_from_premises(
            logic,
            fragment,
            premises,
            manifest.empirical_caps,
            manifest.empirical_limits,
            instantiate=manifest.instantiation.enabled,
            instantiation_depth=manifest.instantiation.term_depth,
            workers=manifest.workers,
        )
    except EngineError as exc:
        raise PipelineError(str(exc), EXIT_PRECONDITION) from exc
    theory = partition_theory(fragment, result, premises)
    kept, rejections = apply_filters(result.records, manifest.filters)
    corpus_path = export_corpus(kept, manifest.output_path, "jsonl")
    file_stats = corpus_stats(corpus_path)
    truncated = (not fragment.complete) or (not result.complete)
    elapsed = time.monotonic() - started
    stats = {
        "logic": logic.name,
        "premises": len(premises),
        "fragment": {
            "records": len(fragment.records),
            "caps": {c: fragment.caps[c] for c in sorted(fragment.caps)},
            "complete": fragment.complete,
            "truncated_by": fragment.usage.truncated_by,
        },
        "derivation": {
            "records": len(result.records),
            "caps": {c: result.caps[c] for c in sorted(result.caps)},
            "complete": result.complete,
            "truncated_by": result.usage.truncated_by,
            "candidates_seen": result.usage.candidates_seen,
            "levels": result.usage.levels,
        },
        "theory": {
            "empirical": len(theory.empirical),
            "logical_instances": len(theory.logical_instances),
            "consistency": theory.consistency.status,
            "witness": theory.consistency.witness_text,
            "caveat": theory.caveat,
        },
        "filters": {
            "enabled": {
                "strong_relevance": manifest.filters.strong_relevance,
                "variable_sharing": manifest.filters.variable_sharing,
                "exclude_logical_instances": manifest.filters.exclude_logical_instances,
            },
            "rejected": rejections,
        },
        "corpus": file_stats.to_dict(),
        "truncated": truncated,
        "wall_time_seconds": round(elapsed, 3),
    }
    stats_path = corpus_path.with_name(corpus_path.name + ".stats.json")
    stats_path.write_text(
        json.dumps(stats, indent=2, ensure_ascii=False) + "\n", encoding="utf-8", newline="\n"
    )
    return RunReport(
        manifest=manifest,
        fragment=fragment,
        result=result,
        theory=theory,
        kept=kept,
        rejections=rejections,
        corpus_path=corpus_path,
        stats_path=stats_path,
        stats=stats,
        exit_code=EXIT_TRUNCATED if truncated else EXIT_OK,
        elapsed=elapsed,
    )
