import dataclasses
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drugmatch.matcher import (
    MatchDecision,
    MatcherConfig,
    MatchEvidence,
    MatchReason,
    Metrics,
    evaluate,
    evaluate_binary,
    predict_batch,
    predict_label,
)
from drugmatch.records import DrugType, MatchLabel
from drugmatch.synth import GeneratorConfig, generate

from conftest import make_pair

M, N = MatchLabel.MATCH, MatchLabel.NO_MATCH


class TestPredictLabel:
    def test_all_rules_pass(self):
        pair = make_pair(name1="XX片", dosage1="0.3g*12粒*2板", name2="XX片", dosage2="300mg*24s")
        d = predict_label(pair)
        assert (d.label, d.reason) == (M, MatchReason.ALL_RULES_PASS)
        assert d.evidence.name_ratio == 100
        assert d.evidence.strength1 == d.evidence.strength2
        assert d.evidence.total1 == d.evidence.total2 == 24

    def test_missing_dosage_fallback(self):
        pair = make_pair(name1="XX片", dosage1="0.35g*45s", name2="XX片", dosage2="45s")
        d = predict_label(pair)
        assert (d.label, d.reason) == (M, MatchReason.DOSAGE_FALLBACK_PASS)

    def test_package_mismatch(self):
        pair = make_pair(name1="XX片", dosage1="300mg*24s", name2="XX片", dosage2="300mg*12s")
        d = predict_label(pair)
        assert (d.label, d.reason) == (N, MatchReason.PACKAGE_MISMATCH)

    def test_name_dissimilar(self):
        pair = make_pair(name1="阿莫西林胶囊", dosage1="300mg*24s", name2="复方丹参片", dosage2="300mg*24s")
        d = predict_label(pair)
        assert (d.label, d.reason) == (N, MatchReason.NAME_DISSIMILAR)

    def test_strength_mismatch(self):
        pair = make_pair(name1="XX片", dosage1="4g*31tablet", name2="XX片", dosage2="400mg*31tablet")
        d = predict_label(pair)
        assert (d.label, d.reason) == (N, MatchReason.STRENGTH_MISMATCH)

    def test_strength_equal_package_missing_fallback(self):
        pair = make_pair(name1="XX片", dosage1="0.3g", name2="XX片", dosage2="300mg*24s")
        d = predict_label(pair)
        assert (d.label, d.reason) == (M, MatchReason.DOSAGE_FALLBACK_PASS)

    def test_no_quantitative_evidence_default_no_match(self):
        pair = make_pair(name1="XX片", dosage1="", name2="XX片", dosage2="")
        d = predict_label(pair)
        assert (d.label, d.reason) == (N, MatchReason.INSUFFICIENT_EVIDENCE)

    def test_no_quantitative_evidence_configurable(self):
        pair = make_pair(name1="XX片", dosage1="", name2="XX片", dosage2="")
        cfg = MatcherConfig(require_quantity_evidence=False)
        d = predict_label(pair, cfg)
        assert (d.label, d.reason) == (M, MatchReason.DOSAGE_FALLBACK_PASS)

    def test_uncleanable_name_is_dissimilar(self):
        pair = make_pair(name1="（盒）", dosage1="300mg*24s", name2="XX片", dosage2="300mg*24s")
        d = predict_label(pair)
        assert (d.label, d.reason) == (N, MatchReason.NAME_DISSIMILAR)
        assert d.evidence.name1 is None

    def test_brand_and_brackets_cleaned_before_comparison(self):
        pair = make_pair(name1="联环 叶酸片", dosage1="45s", name2="叶酸片(盒)", dosage2="45s")
        d = predict_label(pair)
        assert d.label is M
        assert d.evidence.name1 == d.evidence.name2 == "叶酸片"

    def test_name_threshold_gates(self):
        pair = make_pair(name1="叶酸片", dosage1="45s", name2="叶酸丸", dosage2="45s")
        ratio = predict_label(pair).evidence.name_ratio
        assert predict_label(pair, MatcherConfig(name_threshold=ratio)).label is M
        assert predict_label(pair, MatcherConfig(name_threshold=ratio + 1)).label is N

    def test_strength_checked_before_package_when_both_differ(self):
        pair = make_pair(name1="XX片", dosage1="100mg*24s", name2="XX片", dosage2="200mg*12s")
        assert predict_label(pair).reason is MatchReason.STRENGTH_MISMATCH


class TestMatchDecisionInvariant:
    def test_inconsistent_label_reason_rejected(self):
        with pytest.raises(ValueError):
            MatchDecision(M, MatchReason.PACKAGE_MISMATCH, MatchEvidence())
        with pytest.raises(ValueError):
            MatchDecision(N, MatchReason.ALL_RULES_PASS, MatchEvidence())

    def test_config_threshold_validated(self):
        with pytest.raises(ValueError):
            MatcherConfig(name_threshold=101)


def _pairs_strategy():
    name = st.sampled_from(["叶酸片", "联环 叶酸片", "复方丹参片", "阿莫西林", "（盒）叶酸片"])
    dosage = st.sampled_from(["", "0.3g*12粒*2板", "300mg*24s", "45s", "0.35g*45s", "300mg", "junk"])
    return st.builds(
        lambda n1, d1, n2, d2: make_pair(name1=n1, dosage1=d1, name2=n2, dosage2=d2),
        name, dosage, name, dosage,
    )


class TestMatcherProperties:
    @given(_pairs_strategy())
    def test_source_swap_symmetry(self, pair):
        swapped = dataclasses.replace(pair, source1=pair.source2, source2=pair.source1)
        assert predict_label(pair).label == predict_label(swapped).label

    @given(_pairs_strategy(), st.integers(0, 100), st.integers(0, 100))
    def test_threshold_monotonicity(self, pair, t_low, t_high):
        lo, hi = sorted((t_low, t_high))
        if predict_label(pair, MatcherConfig(name_threshold=hi)).label is M:
            assert predict_label(pair, MatcherConfig(name_threshold=lo)).label is M

    @settings(max_examples=10)
    @given(st.integers(0, 2**31))
    def test_batch_determinism(self, seed):
        corpus = generate(GeneratorConfig(n_pairs=20, seed=seed))
        assert predict_batch(corpus.pairs) == predict_batch(corpus.pairs)

    @given(_pairs_strategy())
    def test_reason_consistent_with_label(self, pair):
        d = predict_label(pair)  # constructor enforces; this exercises all paths
        assert isinstance(d.reason, MatchReason)


class TestEvaluate:
    def test_all_match_perfect(self):
        m = evaluate([M, M], [M, M])
        assert (m.accuracy, m.precision, m.recall) == (1.0, 1.0, 1.0)

    def test_hand_counted_example(self):
        m = evaluate([M, N, M, M], [M, M, M, N])
        assert (m.tp, m.fp, m.fn, m.tn) == (2, 1, 1, 0)
        assert m.accuracy == 0.5
        assert m.precision == pytest.approx(2 / 3)
        assert m.recall == pytest.approx(2 / 3)

    def test_precision_absent_when_no_positive_predictions(self):
        m = evaluate([N, N], [M, N])
        assert m.precision is None
        assert m.recall == 0.0

    def test_recall_absent_when_no_positive_golds(self):
        m = evaluate([M, N], [N, N])
        assert m.recall is None

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate([M], [M, N])

    def test_empty(self):
        with pytest.raises(ValueError):
            evaluate([], [])

    def test_metrics_identity(self):
        m = evaluate([M, N, M, M], [M, M, M, N])
        total = m.tp + m.fp + m.fn + m.tn
        assert m.accuracy == (m.tp + m.tn) / total

    def test_generic_binary_over_drug_types(self):
        t, w = DrugType.TRADITIONAL_CHINESE, DrugType.WESTERN
        m = evaluate_binary([t, w, t], [t, t, t], positive=t)
        assert (m.tp, m.fn) == (2, 1)
