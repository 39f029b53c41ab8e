"""rforge: degree-bounded forward reasoning over user-defined Hilbert-style
logic systems, with relevance validators and a deterministic corpus pipeline.
"""

from .analysis import (
    DegreeVector,
    FormulaClass,
    NotAConditionalError,
    OccurrenceFlags,
    canonicalize,
    classify_formula,
    connective_degree,
    degree_vector,
    is_variant,
    occurrence_report,
    proposition_symbols,
    strong_relevance_holds,
    variable_sharing_holds,
)
from .cache import CacheFormatError, CacheReplayError, load_fragment, save_fragment
from .corpus import CorpusEntry, CorpusStats, corpus_stats, export_corpus
from .engine import (
    Derivation,
    DerivationLimits,
    DerivationResult,
    EngineError,
    Fragment,
    ReplayError,
    TheoremRecord,
    apply_rule,
    build_term_universe,
    deducibility_degree,
    derive_from_premises,
    generate_fragment,
    replay_record,
    verify_derivations,
)
from .formulas import (
    And,
    Entail,
    Formula,
    Fun,
    Not,
    Or,
    Pred,
    Quantified,
    SchemaAtom,
    Term,
    Var,
    formula_size,
    render_formula,
)
from .logic import (
    AxiomSchema,
    InferenceRule,
    LogicError,
    LogicSystem,
    available_presets,
    load_logic,
    load_logic_dict,
    load_preset,
    preset_path,
    validate_logic,
)
from .parser import ParseError, SignatureContext, parse_formula
from .pipeline import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_PRECONDITION,
    EXIT_TRUNCATED,
    FilterConfig,
    InstantiationConfig,
    PipelineError,
    PipelineManifest,
    RunReport,
    apply_filters,
    load_manifest,
    run_pipeline,
)
from .premises import (
    Premise,
    PremiseError,
    PremiseSet,
    load_premises,
    premise_pack_path,
    premise_set_from_texts,
)
from .substitution import (
    Substitution,
    apply_substitution,
    is_instance_of,
    match_schema,
    unify,
)
from .theory import (
    ConsistencyVerdict,
    ExplosionReport,
    FormalTheory,
    check_derived_inconsistency,
    check_direct_inconsistency,
    explosion_probe,
    partition_theory,
)

__version__ = "0.1.0"

__all__ = [
    "AxiomSchema",
    "And",
    "CacheFormatError",
    "CacheReplayError",
    "ConsistencyVerdict",
    "CorpusEntry",
    "CorpusStats",
    "DegreeVector",
    "Derivation",
    "DerivationLimits",
    "DerivationResult",
    "EngineError",
    "Entail",
    "ExplosionReport",
    "EXIT_OK",
    "EXIT_PARSE",
    "EXIT_PRECONDITION",
    "EXIT_TRUNCATED",
    "FilterConfig",
    "FormalTheory",
    "Formula",
    "FormulaClass",
    "Fragment",
    "Fun",
    "InferenceRule",
    "InstantiationConfig",
    "LogicError",
    "LogicSystem",
    "Not",
    "NotAConditionalError",
    "OccurrenceFlags",
    "Or",
    "ParseError",
    "PipelineError",
    "PipelineManifest",
    "Pred",
    "Premise",
    "PremiseError",
    "PremiseSet",
    "Quantified",
    "ReplayError",
    "RunReport",
    "SchemaAtom",
    "SignatureContext",
    "Substitution",
    "Term",
    "TheoremRecord",
    "Var",
    "apply_filters",
    "apply_rule",
    "apply_substitution",
    "available_presets",
    "build_term_universe",
    "canonicalize",
    "check_derived_inconsistency",
    "check_direct_inconsistency",
    "classify_formula",
    "connective_degree",
    "corpus_stats",
    "deducibility_degree",
    "degree_vector",
    "derive_from_premises",
    "explosion_probe",
    "export_corpus",
    "formula_size",
    "generate_fragment",
    "is_instance_of",
    "is_variant",
    "load_fragment",
    "load_logic",
    "load_logic_dict",
    "load_manifest",
    "load_premises",
    "load_preset",
    "match_schema",
    "occurrence_report",
    "parse_formula",
    "partition_theory",
    "premise_pack_path",
    "premise_set_from_texts",
    "preset_path",
    "proposition_symbols",
    "render_formula",
    "replay_record",
    "run_pipeline",
    "save_fragment",
    "strong_relevance_holds",
    "unify",
    "validate_logic",
    "variable_sharing_holds",
    "verify_derivations",
]
