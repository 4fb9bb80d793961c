"""Rule-based match prediction for record pairs, plus evaluation metrics.

A pair matches when the cleaned names are similar and the quantitative
evidence agrees: equal strengths and equal package totals, or — when one
axis is missing — agreement on the other (the missing-dosage fallback).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Iterable, Sequence, TypeVar

from .dosage import Strength, normalize_strength, package_equal, parse_dosage, strength_equal
from .fuzzy import similarity_ratio
from .records import MatchLabel, RecordPair
from .textnorm import EmptyResultError, clean_name


class MatchReason(Enum):
    ALL_RULES_PASS = "all_rules_pass"
    DOSAGE_FALLBACK_PASS = "dosage_fallback_pass"
    STRENGTH_MISMATCH = "strength_mismatch"
    PACKAGE_MISMATCH = "package_mismatch"
    NAME_DISSIMILAR = "name_dissimilar"
    INSUFFICIENT_EVIDENCE = "insufficient_evidence"


_MATCH_REASONS = frozenset({MatchReason.ALL_RULES_PASS, MatchReason.DOSAGE_FALLBACK_PASS})


@dataclass(frozen=True)
class MatcherConfig:
    """Tunables for the rule matcher."""

    name_threshold: int = 90
    require_quantity_evidence: bool = True
    strength_rel_tol: Decimal = Decimal("1e-9")

    def __post_init__(self):
        if not 0 <= self.name_threshold <= 100:
            raise ValueError(f"name_threshold must be in [0, 100], got {self.name_threshold}")


@dataclass(frozen=True)
class MatchEvidence:
    """What the matcher saw: cleaned names, name ratio, normalized quantities."""

    name1: str | None = None
    name2: str | None = None
    name_ratio: int | None = None
    strength1: Strength | None = None
    strength2: Strength | None = None
    total1: int | None = None
    total2: int | None = None


@dataclass(frozen=True)
class MatchDecision:
    """A per-pair verdict with its reason code and supporting evidence."""

    label: MatchLabel
    reason: MatchReason
    evidence: MatchEvidence = field(default_factory=MatchEvidence)

    def __post_init__(self):
        if (self.label is MatchLabel.MATCH) != (self.reason in _MATCH_REASONS):
            raise ValueError(f"label {self.label} inconsistent with reason {self.reason}")


def predict_label(
    pair: RecordPair,
    cfg: MatcherConfig = MatcherConfig(),
    brand_lexicon: Iterable[str] = (),
) -> MatchDecision:
    """Apply the matching rules to one pair.

    Rule order: name similarity gates first, then strength equality, then
    package equality.  With both quantities present and equal the pair is a
    full-rule match; with one axis missing, agreement on the other axis is
    accepted (fallback); with neither axis available the verdict follows
    ``cfg.require_quantity_evidence``.
    """
    lexicon = tuple(brand_lexicon)
    try:
        name1 = clean_name(pair.source1.name, lexicon).text
    except EmptyResultError:
        name1 = None
    try:
        name2 = clean_name(pair.source2.name, lexicon).text
    except EmptyResultError:
        name2 = None
    if name1 is None or name2 is None:
        return MatchDecision(
            MatchLabel.NO_MATCH,
            MatchReason.NAME_DISSIMILAR,
            MatchEvidence(name1=name1, name2=name2),
        )

    ratio = similarity_ratio(name1, name2)
    d1 = parse_dosage(pair.source1.dosage_raw)
    d2 = parse_dosage(pair.source2.dosage_raw)
    evidence = MatchEvidence(
        name1=name1,
        name2=name2,
        name_ratio=ratio,
        strength1=normalize_strength(d1.strength) if d1.strength else None,
        strength2=normalize_strength(d2.strength) if d2.strength else None,
        total1=d1.package.total if d1.package else None,
        total2=d2.package.total if d2.package else None,
    )

    if ratio < cfg.name_threshold:
        return MatchDecision(MatchLabel.NO_MATCH, MatchReason.NAME_DISSIMILAR, evidence)

    strengths_present = d1.strength is not None and d2.strength is not None
    if strengths_present and not strength_equal(d1.strength, d2.strength, cfg.strength_rel_tol):
        return MatchDecision(MatchLabel.NO_MATCH, MatchReason.STRENGTH_MISMATCH, evidence)

    packages_present = d1.package is not None and d2.package is not None
    if packages_present and not package_equal(d1.package, d2.package):
        return MatchDecision(MatchLabel.NO_MATCH, MatchReason.PACKAGE_MISMATCH, evidence)

    if strengths_present and packages_present:
        return MatchDecision(MatchLabel.MATCH, MatchReason.ALL_RULES_PASS, evidence)
    if packages_present or strengths_present:
        return MatchDecision(MatchLabel.MATCH, MatchReason.DOSAGE_FALLBACK_PASS, evidence)
    if cfg.require_quantity_evidence:
        return MatchDecision(MatchLabel.NO_MATCH, MatchReason.INSUFFICIENT_EVIDENCE, evidence)
    return MatchDecision(MatchLabel.MATCH, MatchReason.DOSAGE_FALLBACK_PASS, evidence)


def predict_batch(
    pairs: Sequence[RecordPair],
    cfg: MatcherConfig = MatcherConfig(),
    brand_lexicon: Iterable[str] = (),
) -> list[MatchDecision]:
    """Element-wise :func:`predict_label`, order preserved."""
    lexicon = tuple(brand_lexicon)
    return [predict_label(pair, cfg, lexicon) for pair in pairs]


@dataclass(frozen=True)
class Metrics:
    """Binary classification metrics with their confusion counts.

    ``precision``/``recall`` are ``None`` when their denominator is zero.
    """

    accuracy: float
    precision: float | None
    recall: float | None
    tp: int
    fp: int
    fn: int
    tn: int


T = TypeVar("T")


def evaluate_binary(pred: Sequence[T], gold: Sequence[T], positive: T) -> Metrics:
    """Confusion counts and derived metrics for any two-valued label type."""
    if len(pred) != len(gold):
        raise ValueError(f"length mismatch: {len(pred)} predictions vs {len(gold)} golds")
    if not pred:
        raise ValueError("cannot evaluate an empty prediction list")
    tp = fp = fn = tn = 0
    for p, g in zip(pred, gold):
        if p == positive:
            if g == positive:
                tp += 1
            else:
                fp += 1
        elif g == positive:
            fn += 1
        else:
            tn += 1
    return Metrics(
        accuracy=(tp + tn) / len(pred),
        precision=tp / (tp + fp) if tp + fp else None,
        recall=tp / (tp + fn) if tp + fn else None,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
    )


def evaluate(pred: Sequence[MatchLabel], gold: Sequence[MatchLabel]) -> Metrics:
    """Corpus metrics with Match as the positive class."""
    return evaluate_binary(pred, gold, MatchLabel.MATCH)
