"""Approval-number inconsistency detection and correction on matched pairs.

A matched pair whose two approval letters disagree on Z vs non-Z can be
adjudicated by the drug-type classifier: the approval whose letter agrees
with the predicted type is kept.  Digit-level and other-letter conflicts
cannot be adjudicated automatically and are routed to manual review, as are
pairs with unparseable approval strings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .bayes import NBModel, predict
from .matcher import MatchDecision, MatcherConfig, predict_batch
from .records import (
    ApprovalNumber,
    DrugType,
    MalformedApprovalNumber,
    MatchLabel,
    RecordPair,
    parse_approval_number,
)
from .textnorm import EmptyResultError, clean_name, tokenize


class InconsistencyKind(Enum):
    ZNZ = "znz"
    SAME_LETTER_DIGIT_MISMATCH = "same_letter_digit_mismatch"
    OTHER_LETTER_MISMATCH = "other_letter_mismatch"
    UNPARSEABLE = "unparseable"


class CorrectionAction(Enum):
    AUTO_CORRECTED = "auto_corrected"
    MANUAL_REVIEW = "manual_review"


class NotAMatchError(ValueError):
    """Inconsistency detection was asked about a pair that is not a match."""


@dataclass(frozen=True)
class CorrectionResult:
    """Outcome for one inconsistent matched pair.

    ``chosen`` is always one of the pair's own approval numbers — the
    corrector never fabricates identifiers — and is only present on
    auto-corrections, which happen solely for Z-vs-non-Z conflicts.
    """

    kind: InconsistencyKind
    action: CorrectionAction
    chosen: ApprovalNumber | None = None
    confidence: float = 0.0
    predicted_type: DrugType | None = None

    def __post_init__(self):
        if self.action is CorrectionAction.AUTO_CORRECTED:
            if self.kind is not InconsistencyKind.ZNZ or self.chosen is None:
                raise ValueError("auto-correction requires a Z-vs-non-Z conflict and a chosen approval")


def _parse_or_none(raw: str) -> ApprovalNumber | None:
    try:
        return parse_approval_number(raw)
    except MalformedApprovalNumber:
        return None


def _inconsistency_kind(pair: RecordPair) -> InconsistencyKind | None:
    a1 = _parse_or_none(pair.source1.approval_raw)
    a2 = _parse_or_none(pair.source2.approval_raw)
    if a1 is None or a2 is None:
        return InconsistencyKind.UNPARSEABLE
    if a1 == a2:
        return None
    if (a1.letter == "Z") != (a2.letter == "Z"):
        return InconsistencyKind.ZNZ
    if a1.letter == a2.letter:
        return InconsistencyKind.SAME_LETTER_DIGIT_MISMATCH
    return InconsistencyKind.OTHER_LETTER_MISMATCH


def detect_inconsistency(
    pair: RecordPair,
    label: MatchLabel | None = None,
) -> InconsistencyKind | None:
    """Classify the approval disagreement of a matched pair, if any.

    ``label`` is the predicted label when the caller has one; it defaults
    to the pair's gold label.  Calling this on anything other than a match
    is a contract violation (only matches can carry an approval
    inconsistency) and raises :class:`NotAMatchError`.
    """
    effective = label if label is not None else pair.gold_label
    if effective is not MatchLabel.MATCH:
        raise NotAMatchError("inconsistency detection applies to matched pairs only")
    return _inconsistency_kind(pair)


def correct(
    pair: RecordPair,
    model: NBModel,
    min_confidence: float = 0.5,
    brand_lexicon: Iterable[str] = (),
) -> CorrectionResult:
    """Resolve a detected inconsistency.

    Z-vs-non-Z conflicts: classify the drug name (source 1's, falling back
    to source 2's when cleaning consumes it) and keep the approval whose
    letter agrees with the prediction, auto-correcting when the posterior
    clears ``min_confidence``.  Every other kind goes to manual review.
    """
    kind = _inconsistency_kind(pair)
    if kind is None:
        raise ValueError("pair has no approval inconsistency to correct")
    if kind is not InconsistencyKind.ZNZ:
        return CorrectionResult(kind=kind, action=CorrectionAction.MANUAL_REVIEW)

    lexicon = tuple(brand_lexicon)
    cleaned = None
    for record in (pair.source1, pair.source2):
        try:
            cleaned = clean_name(record.name, lexicon)
            break
        except EmptyResultError:
            continue
    if cleaned is None:
        return CorrectionResult(kind=kind, action=CorrectionAction.MANUAL_REVIEW)

    predicted_type, posterior = predict(model, tokenize(cleaned, model.token_mode))
    a1 = parse_approval_number(pair.source1.approval_raw)
    a2 = parse_approval_number(pair.source2.approval_raw)
    z_side, nz_side = (a1, a2) if a1.letter == "Z" else (a2, a1)
    chosen = z_side if predicted_type is DrugType.TRADITIONAL_CHINESE else nz_side
    confidence = posterior[predicted_type]
    if confidence >= min_confidence:
        return CorrectionResult(
            kind=kind,
            action=CorrectionAction.AUTO_CORRECTED,
            chosen=chosen,
            confidence=confidence,
            predicted_type=predicted_type,
        )
    return CorrectionResult(
        kind=kind,
        action=CorrectionAction.MANUAL_REVIEW,
        confidence=confidence,
        predicted_type=predicted_type,
    )


@dataclass(frozen=True)
class PipelineRow:
    """One pair's trip through the pipeline: decision plus optional correction."""

    index: int
    decision: MatchDecision
    correction: CorrectionResult | None = None


@dataclass(frozen=True)
class PipelineSummary:
    pairs: int
    matches: int
    inconsistencies: dict[InconsistencyKind, int]
    auto_corrected: int
    manual_review: int

    @property
    def inconsistency_total(self) -> int:
        return sum(self.inconsistencies.values())


@dataclass(frozen=True)
class PipelineReport:
    rows: list[PipelineRow]
    summary: PipelineSummary


def run_pipeline(
    pairs: Sequence[RecordPair],
    model: NBModel,
    matcher_cfg: MatcherConfig = MatcherConfig(),
    min_confidence: float = 0.5,
    brand_lexicon: Iterable[str] = (),
) -> PipelineReport:
    """Match every pair, then examine and correct the predicted matches.

    Only pairs the matcher labels as matches are checked for approval
    inconsistencies; each inconsistency yields either an auto-correction or
    a manual-review routing, tallied in the summary.
    """
    lexicon = tuple(brand_lexicon)
    decisions = predict_batch(pairs, matcher_cfg, lexicon)
    rows: list[PipelineRow] = []
    matches = 0
    by_kind = {kind: 0 for kind in InconsistencyKind}
    auto = review = 0
    for i, (pair, decision) in enumerate(zip(pairs, decisions)):
        correction = None
        if decision.label is MatchLabel.MATCH:
            matches += 1
            kind = detect_inconsistency(pair, label=decision.label)
            if kind is not None:
                correction = correct(pair, model, min_confidence, lexicon)
                by_kind[correction.kind] += 1
                if correction.action is CorrectionAction.AUTO_CORRECTED:
                    auto += 1
                else:
                    review += 1
        rows.append(PipelineRow(index=i, decision=decision, correction=correction))
    summary = PipelineSummary(
        pairs=len(rows),
        matches=matches,
        inconsistencies=by_kind,
        auto_corrected=auto,
        manual_review=review,
    )
    return PipelineReport(rows=rows, summary=summary)
