"""Command-line interface.

Subcommands mirror the two-stage pipeline plus one-off checks::

    rforge logic validate <logic.json>
    rforge frag gen --logic L --cap "=>:2,&:1,|:0,~:0" --out frag.rf
    rforge derive --logic L --frag frag.rf --premises P --cap "..." --out c.jsonl
    rforge degree "<formula>"
    rforge check --strong-relevance "<formula>"
    rforge pipeline run <manifest.json>
    rforge stats <corpus.jsonl> [--plots DIR]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import (
    NotAConditionalError,
    classify_formula,
    degree_vector,
    strong_relevance_holds,
    variable_sharing_holds,
)
from .cache import CacheFormatError, CacheReplayError, load_fragment, parse_caps, save_fragment
from .corpus import CorpusFormatError, corpus_stats, export_corpus
from .engine import DerivationLimits, EngineError, derive_from_premises, generate_fragment
from .logic import LogicError, load_logic, validate_logic
from .parser import ParseError, parse_formula
from .pipeline import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_PRECONDITION,
    PipelineError,
    apply_filters,
    FilterConfig,
    load_manifest,
    run_pipeline,
)
from .premises import PremiseError, load_premises


def _limit_arguments(parser: argparse.ArgumentParser) -> None:
    defaults = DerivationLimits()
    parser.add_argument("--max-depth", type=int, default=defaults.max_depth)
    parser.add_argument("--max-records", type=int, default=defaults.max_records)
    parser.add_argument("--max-size", type=int, default=defaults.max_formula_size,
                        help="maximum formula size in nodes")
    parser.add_argument("--time-budget", type=float, default=defaults.time_budget,
                        help="seconds before the run truncates")
    parser.add_argument("--no-subsumption", action="store_true",
                        help="keep candidates that instantiate existing records")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel candidate generation; output is identical for any count")


def _limits_from_args(args: argparse.Namespace) -> DerivationLimits:
    return DerivationLimits(
        max_depth=args.max_depth,
        max_records=args.max_records,
        max_formula_size=args.max_size,
        time_budget=args.time_budget,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rforge",
        description="Degree-bounded forward reasoning over user-defined Hilbert-style logics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    logic_cmd = sub.add_parser("logic", help="logic-file operations")
    logic_sub = logic_cmd.add_subparsers(dest="logic_command", required=True)
    validate_cmd = logic_sub.add_parser("validate", help="audit a logic file")
    validate_cmd.add_argument("logic_file")

    frag_cmd = sub.add_parser("frag", help="fragment operations")
    frag_sub = frag_cmd.add_subparsers(dest="frag_command", required=True)
    gen_cmd = frag_sub.add_parser("gen", help="generate a degree-bounded fragment")
    gen_cmd.add_argument("--logic", required=True)
    gen_cmd.add_argument("--cap", required=True, help='per-connective caps, e.g. "=>:2,&:1,|:0,~:0"')
    gen_cmd.add_argument("--out", required=True)
    _limit_arguments(gen_cmd)

    derive_cmd = sub.add_parser("derive", help="derive empirical theorems from premises")
    derive_cmd.add_argument("--logic", required=True)
    derive_cmd.add_argument("--frag", required=True, help="fragment cache from 'frag gen'")
    derive_cmd.add_argument("--premises", required=True)
    derive_cmd.add_argument("--cap", required=True)
    derive_cmd.add_argument("--out", required=True)
    derive_cmd.add_argument("--filter", action="append", default=[],
                            choices=["strong-relevance", "variable-sharing"],
                            help="drop records failing a relevance validator")
    derive_cmd.add_argument("--exclude-logical-instances", action="store_true")
    derive_cmd.add_argument("--text-out", help="also write the bare text corpus here")
    derive_cmd.add_argument("--ui-depth", type=int, default=2,
                            help="term-universe closure depth for forall instantiation")
    derive_cmd.add_argument("--no-instantiate", action="store_true",
                            help="disable the built-in forall instantiation rule")
    _limit_arguments(derive_cmd)

    degree_cmd = sub.add_parser("degree", help="degree vector and classification of a formula")
    degree_cmd.add_argument("formula")

    check_cmd = sub.add_parser("check", help="relevance validators for a formula")
    check_cmd.add_argument("formula")
    check_cmd.add_argument("--strong-relevance", action="store_true")
    check_cmd.add_argument("--variable-sharing", action="store_true")

    pipeline_cmd = sub.add_parser("pipeline", help="manifest-driven runs")
    pipeline_sub = pipeline_cmd.add_subparsers(dest="pipeline_command", required=True)
    run_cmd = pipeline_sub.add_parser("run", help="run a pipeline manifest")
    run_cmd.add_argument("manifest")

    stats_cmd = sub.add_parser("stats", help="corpus statistics report")
    stats_cmd.add_argument("corpus")
    stats_cmd.add_argument("--report", help="write the stats as JSON here")
    stats_cmd.add_argument("--plots", help="render PNG figures into this directory")

    return parser


def _cmd_logic_validate(args: argparse.Namespace) -> int:
    try:
        logic = load_logic(args.logic_file)
    except (LogicError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    report = validate_logic(logic)
    print(f"logic {logic.name}: {len(logic.axioms)} axiom(s), {len(logic.rules)} rule(s)")
    for entry in report.entries:
        caps = ",".join(f"{c}:{entry.degrees[c]}" for c in ("=>", "&", "|", "~"))
        sharing = {True: "yes", False: "NO", None: "n/a"}[entry.variable_sharing]
        marker = "  [warn: fails strong relevance]" if entry.flagged else ""
        print(
            f"  axiom {entry.name}: degrees {caps}; strong relevance "
            f"{'yes' if entry.strong_relevance else 'NO'}; variable sharing {sharing}{marker}"
        )
    if report.clean:
        print("no strong-relevance warnings")
    else:
        print(f"{len(report.flagged)} axiom(s) fail strong relevance")
    return EXIT_OK


def _cmd_frag_gen(args: argparse.Namespace) -> int:
    try:
        logic = load_logic(args.logic)
        caps = parse_caps(args.cap)
        limits = _limits_from_args(args)
        fragment = generate_fragment(
            logic, caps, limits,
            subsumption=not args.no_subsumption,
            workers=args.workers,
        )
    except (LogicError, CacheFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    save_fragment(fragment, args.out)
    status = "complete" if fragment.complete else f"truncated ({fragment.usage.truncated_by})"
    print(f"fragment: {len(fragment.records)} record(s), {status}, -> {args.out}")
    return EXIT_OK if fragment.complete else 3


def _cmd_derive(args: argparse.Namespace) -> int:
    try:
        logic = load_logic(args.logic)
        caps = parse_caps(args.cap)
        premises = load_premises(args.premises)
        fragment = load_fragment(args.frag, logic)
    except (LogicError, CacheFormatError, CacheReplayError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PremiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION if "nonempty" in str(exc) else EXIT_PARSE
    try:
        result = derive_from_premises(
            logic, fragment, premises, caps, _limits_from_args(args),
            instantiate=not args.no_instantiate,
            instantiation_depth=args.ui_depth,
            subsumption=not args.no_subsumption,
            workers=args.workers,
        )
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    filters = FilterConfig(
        strong_relevance="strong-relevance" in args.filter,
        variable_sharing="variable-sharing" in args.filter,
        exclude_logical_instances=args.exclude_logical_instances,
    )
    kept, rejections = apply_filters(result.records, filters)
    export_corpus(kept, args.out, "jsonl")
    if args.text_out:
        export_corpus(kept, args.text_out, "text")
    status = "complete" if result.complete else f"truncated ({result.usage.truncated_by})"
    rejected = sum(rejections.values())
    print(
        f"derived {len(result.records)} record(s) ({status}); kept {len(kept)}"
        f" after filters (rejected {rejected}) -> {args.out}"
    )
    return EXIT_OK if result.complete else 3


def _cmd_degree(args: argparse.Namespace) -> int:
    try:
        formula = parse_formula(args.formula)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    degrees = degree_vector(formula)
    label = classify_formula(formula)
    for conn in ("=>", "&", "|", "~"):
        print(f"degree {conn}: {degrees[conn]}")
    print(f"classification: {label.kind}" + (f" (k={label.degree})" if label.kind == "kth-degree" else ""))
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        formula = parse_formula(args.formula)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if not args.strong_relevance and not args.variable_sharing:
        print("error: choose --strong-relevance and/or --variable-sharing", file=sys.stderr)
        return EXIT_PRECONDITION
    ok = True
    if args.strong_relevance:
        holds = strong_relevance_holds(formula)
        ok = ok and holds
        print(f"strong relevance: {'holds' if holds else 'fails'}")
    if args.variable_sharing:
        try:
            holds = variable_sharing_holds(formula)
        except NotAConditionalError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
        ok = ok and holds
        print(f"variable sharing: {'holds' if holds else 'fails'}")
    return EXIT_OK if ok else 1


def _cmd_pipeline_run(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
        report = run_pipeline(manifest)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"corpus:  {report.corpus_path} ({len(report.kept)} entries)")
    print(f"stats:   {report.stats_path}")
    print(f"fragment records: {len(report.fragment.records)} (complete: {report.fragment.complete})")
    print(f"derived records:  {len(report.result.records)} (complete: {report.result.complete})")
    theory = report.stats["theory"]
    print(f"theory: empirical {theory['empirical']}, logical instances {theory['logical_instances']}")
    print(f"consistency: {theory['consistency']}"
          + (f" (witness: {theory['witness']})" if theory["witness"] else ""))
    if report.exit_code != EXIT_OK:
        print("run truncated by limits; partial corpus written", file=sys.stderr)
    return report.exit_code


def _cmd_stats(args: argparse.Namespace) -> int:
    try:
        stats = corpus_stats(args.corpus)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except CorpusFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    for line in stats.lines():
        print(line)
    if args.report:
        Path(args.report).write_text(
            json.dumps(stats.to_dict(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8", newline="\n",
        )
        print(f"report -> {args.report}")
    if args.plots:
        from .plots import render_stats_figures

        for path in render_stats_figures(stats, args.plots):
            print(f"figure -> {path}")
    if stats.duplicates:
        print(f"error: corpus contains {stats.duplicates} duplicate(s)", file=sys.stderr)
        return 1
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "logic":
        return _cmd_logic_validate(args)
    if args.command == "frag":
        return _cmd_frag_gen(args)
    if args.command == "derive":
        return _cmd_derive(args)
    if args.command == "degree":
        return _cmd_degree(args)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "pipeline":
        return _cmd_pipeline_run(args)
    if args.command == "stats":
        return _cmd_stats(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
