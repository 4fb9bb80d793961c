"""drugmatch: record linkage and approval-number cleanup for drug products.

Matches drug-product records from two heterogeneous sources using parsed
dosage strength, package quantity, and fuzzy name similarity, then corrects
Z-vs-non-Z approval-number conflicts on matched pairs with a multinomial
naive Bayes drug-type classifier trained on tokenized names.
"""

__version__ = "0.1.0"

from .bayes import (
    LabeledName,
    NBModel,
    Vocabulary,
    build_vocabulary,
    derive_training_labels,
    fit,
    load_model,
    predict,
    save_model,
    top_tokens,
    train_test_split,
)
from .correction import (
    CorrectionAction,
    CorrectionResult,
    InconsistencyKind,
    NotAMatchError,
    PipelineReport,
    correct,
    detect_inconsistency,
    run_pipeline,
)
from .dosage import (
    PackageFactor,
    PackageQuantity,
    ParsedDosage,
    Strength,
    Unit,
    normalize_strength,
    package_equal,
    parse_dosage,
    strength_equal,
)
from .druginfo import DrugIndex, InfoReport, build_index, query
from .fuzzy import ManufacturerClusters, dedup_manufacturers, levenshtein, similarity_ratio
from .matcher import (
    MatchDecision,
    MatcherConfig,
    MatchReason,
    Metrics,
    evaluate,
    evaluate_binary,
    predict_batch,
    predict_label,
)
from .records import (
    ApprovalNumber,
    BadHeaderError,
    DrugRecord,
    DrugType,
    LoadResult,
    MalformedApprovalNumber,
    MatchLabel,
    RecordPair,
    drug_type_of,
    load_dataset,
    parse_approval_number,
)
from .synth import GeneratorConfig, SyntheticCorpus, generate, write_corpus_csv, write_truth_csv
from .textnorm import CleanName, EmptyResultError, TokenSeq, clean_name, load_brand_lexicon, tokenize

__all__ = [
    "__version__",
    # records
    "ApprovalNumber", "BadHeaderError", "DrugRecord", "DrugType", "LoadResult",
    "MalformedApprovalNumber", "MatchLabel", "RecordPair", "drug_type_of",
    "load_dataset", "parse_approval_number",
    # textnorm
    "CleanName", "EmptyResultError", "TokenSeq", "clean_name", "load_brand_lexicon", "tokenize",
    # fuzzy
    "ManufacturerClusters", "dedup_manufacturers", "levenshtein", "similarity_ratio",
    # dosage
    "PackageFactor", "PackageQuantity", "ParsedDosage", "Strength", "Unit",
    "normalize_strength", "package_equal", "parse_dosage", "strength_equal",
    # matcher
    "MatchDecision", "MatcherConfig", "MatchReason", "Metrics",
    "evaluate", "evaluate_binary", "predict_batch", "predict_label",
    # bayes
    "LabeledName", "NBModel", "Vocabulary", "build_vocabulary", "derive_training_labels",
    "fit", "load_model", "predict", "save_model", "top_tokens", "train_test_split",
    # correction
    "CorrectionAction", "CorrectionResult", "InconsistencyKind", "NotAMatchError",
    "PipelineReport", "correct", "detect_inconsistency", "run_pipeline",
    # druginfo
    "DrugIndex", "InfoReport", "build_index", "query",
    # synth
    "GeneratorConfig", "SyntheticCorpus", "generate", "write_corpus_csv", "write_truth_csv",
]
