import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drugmatch.bayes import (
    CLASSES,
    LabeledName,
    MissingClassError,
    ModelFormatError,
    TooSmallError,
    build_vocabulary,
    count_vector,
    derive_training_labels,
    fit,
    load_model,
    predict,
    save_model,
    top_tokens,
    train_test_split,
)
from drugmatch.records import DrugType, MatchLabel
from drugmatch.textnorm import TokenSeq

from conftest import make_pair

TCM, WESTERN = DrugType.TRADITIONAL_CHINESE, DrugType.WESTERN


def ln(tokens, klass):
    return LabeledName(tokens=TokenSeq(tuple(tokens)), klass=klass)


TWO_DOC = [ln(["a"], TCM), ln(["b"], WESTERN)]


class TestDeriveTrainingLabels:
    def test_both_sources_contribute(self):
        pair = make_pair(name1="叶酸片", approval1="H20044917", name2="阿莫西林", approval2="H20044918")
        data = derive_training_labels([pair])
        assert len(data) == 2
        assert all(item.klass is WESTERN for item in data)

    def test_matched_znz_disagreement_excluded(self):
        pair = make_pair(
            name1="复方丹参片", approval1="Z20173008",
            name2="复方丹参片", approval2="H20046611",
            label=MatchLabel.MATCH,
        )
        assert derive_training_labels([pair]) == []

    def test_unlabeled_znz_disagreement_not_excluded(self):
        pair = make_pair(name1="复方丹参片", approval1="Z20173008", name2="阿莫西林", approval2="H20046611")
        data = derive_training_labels([pair])
        assert [item.klass for item in data] == [TCM, WESTERN]

    def test_no_match_pair_not_excluded(self):
        pair = make_pair(
            name1="复方丹参片", approval1="Z20173008",
            name2="阿莫西林", approval2="H20046611",
            label=MatchLabel.NO_MATCH,
        )
        assert len(derive_training_labels([pair])) == 2

    def test_unparseable_approvals_skipped(self):
        pair = make_pair(approval1="oops", approval2="H20044917")
        data = derive_training_labels([pair])
        assert len(data) == 1

    def test_exact_duplicates_removed(self):
        pair = make_pair(name1="叶酸片", name2="叶酸片", approval1="H20044917", approval2="H20044918")
        assert len(derive_training_labels([pair])) == 1

    def test_uncleanable_names_skipped(self):
        pair = make_pair(name1="（盒）", name2="叶酸片")
        assert len(derive_training_labels([pair])) == 1

    def test_empty_input(self):
        assert derive_training_labels([]) == []

    def test_token_mode_respected(self):
        pair = make_pair(name1="叶酸片", name2="阿莫西林")
        data = derive_training_labels([pair], token_mode="char_bigram")
        assert data[0].tokens.tokens == ("叶酸", "酸片")


class TestVocabulary:
    def test_build(self):
        vocab = build_vocabulary([ln(["a", "b"], TCM), ln(["b", "c"], WESTERN)])
        assert vocab.index == {"a": 0, "b": 1, "c": 2}
        assert vocab.size == 3

    def test_single(self):
        assert build_vocabulary([ln(["x"], TCM)]).size == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_vocabulary([])

    def test_count_vector_ignores_unknown(self):
        vocab = build_vocabulary(TWO_DOC)
        assert count_vector(vocab, TokenSeq(("a", "a", "zz"))) == {vocab.index["a"]: 2}


class TestFit:
    def test_two_doc_hand_oracle(self):
        vocab = build_vocabulary(TWO_DOC)
        model = fit(TWO_DOC, vocab, alpha=1.0)
        assert math.exp(model.log_prior[TCM]) == pytest.approx(0.5)
        # P(a | tcm) = (1 + 1) / (1 + 2) = 2/3; P(b | tcm) = 1/3
        assert math.exp(model.log_likelihood[TCM][vocab.index["a"]]) == pytest.approx(2 / 3)
        assert math.exp(model.log_likelihood[TCM][vocab.index["b"]]) == pytest.approx(1 / 3)

    def test_large_alpha_approaches_uniform(self):
        data = [ln(["a", "a", "a"], TCM), ln(["b"], WESTERN)]
        vocab = build_vocabulary(data)
        model = fit(data, vocab, alpha=1e9)
        for fid in range(vocab.size):
            assert math.exp(model.log_likelihood[TCM][fid]) == pytest.approx(0.5, rel=1e-6)

    def test_duplicated_corpus_keeps_ratios(self):
        # Priors are count ratios, so duplication never moves them.  Smoothed
        # likelihoods shift with absolute counts by construction; they agree
        # with the single corpus in the small-alpha limit.
        vocab = build_vocabulary(TWO_DOC)
        assert fit(TWO_DOC, vocab).log_prior == fit(TWO_DOC * 2, vocab).log_prior
        single = fit(TWO_DOC, vocab, alpha=1e-9)
        double = fit(TWO_DOC * 2, vocab, alpha=1e-9)
        for c in CLASSES:
            for x, y in zip(single.log_likelihood[c], double.log_likelihood[c]):
                assert math.exp(x) == pytest.approx(math.exp(y), abs=1e-6)

    def test_missing_class_rejected(self):
        data = [ln(["a"], TCM)]
        with pytest.raises(MissingClassError):
            fit(data, build_vocabulary(data))

    def test_normalization_invariants(self):
        data = [ln(["a", "b", "a"], TCM), ln(["c"], WESTERN), ln(["b"], TCM)]
        model = fit(data, build_vocabulary(data), alpha=0.5)
        assert abs(sum(math.exp(p) for p in model.log_prior.values()) - 1.0) < 1e-12
        for c in CLASSES:
            assert abs(sum(math.exp(x) for x in model.log_likelihood[c]) - 1.0) < 1e-9

    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            fit(TWO_DOC, build_vocabulary(TWO_DOC), alpha=0.0)


class TestPredict:
    def test_two_doc_posterior(self):
        model = fit(TWO_DOC, build_vocabulary(TWO_DOC))
        klass, posterior = predict(model, TokenSeq(("a",)))
        assert klass is TCM
        assert posterior[TCM] == pytest.approx(2 / 3)
        assert posterior[WESTERN] == pytest.approx(1 / 3)

    def test_unknown_tokens_fall_back_to_prior(self):
        data = [ln(["a"], TCM), ln(["b"], WESTERN), ln(["c"], WESTERN)]
        model = fit(data, build_vocabulary(data))
        klass, posterior = predict(model, TokenSeq(("zzz",)))
        assert klass is WESTERN
        assert posterior[WESTERN] == pytest.approx(2 / 3)

    def test_training_docs_recovered_on_separable_corpus(self):
        data = [ln(list("参苓芪"), TCM), ln(list("阿莫西"), WESTERN), ln(list("丹参"), TCM)]
        model = fit(data, build_vocabulary(data))
        for item in data:
            assert predict(model, item.tokens)[0] is item.klass

    def test_tie_breaks_to_traditional_chinese(self):
        data = [ln(["x"], TCM), ln(["x"], WESTERN)]
        model = fit(data, build_vocabulary(data))
        assert predict(model, TokenSeq(("x",)))[0] is TCM

    def test_posterior_matches_fraction_oracle(self):
        data = [ln(["a", "b"], TCM), ln(["b", "b", "c"], WESTERN), ln(["a"], TCM)]
        vocab = build_vocabulary(data)
        model = fit(data, vocab, alpha=1.0)
        query = TokenSeq(("a", "b", "zz"))
        _, posterior = predict(model, query)
        exact = _fraction_posterior(data, ["a", "b", "zz"], Fraction(1))
        for c in CLASSES:
            assert abs(posterior[c] - float(exact[c])) < 1e-12


def _fraction_posterior(data, query_tokens, alpha):
    vocab = sorted({t for item in data for t in item.tokens})
    n = len(data)
    unnorm = {}
    for c in CLASSES:
        docs = [item for item in data if item.klass is c]
        counts = {}
        for item in docs:
            for t in item.tokens:
                counts[t] = counts.get(t, 0) + 1
        total = sum(counts.values())
        value = Fraction(len(docs), n)
        for t in query_tokens:
            if t in vocab:
                value *= (counts.get(t, 0) + alpha) / (total + alpha * len(vocab))
        unnorm[c] = value
    z = sum(unnorm.values())
    return {c: unnorm[c] / z for c in CLASSES}


class TestTrainTestSplit:
    def test_ten_items(self):
        data = [ln([f"t{i}"], TCM) for i in range(10)]
        train, test = train_test_split(data, 0.1, seed=3)
        assert (len(train), len(test)) == (9, 1)

    def test_same_seed_same_split(self):
        data = [ln([f"t{i}"], TCM) for i in range(30)]
        assert train_test_split(data, 0.2, seed=5) == train_test_split(data, 0.2, seed=5)

    def test_rounding_half_away_from_zero(self):
        data = [ln([f"t{i}"], TCM) for i in range(5085)]
        _, test = train_test_split(data, 0.1, seed=0)
        assert len(test) == 509

    def test_too_small(self):
        with pytest.raises(TooSmallError):
            train_test_split([ln(["a"], TCM)], 0.1, seed=0)

    def test_fraction_validated(self):
        data = [ln(["a"], TCM), ln(["b"], TCM)]
        with pytest.raises(ValueError):
            train_test_split(data, 1.0, seed=0)

    @given(st.integers(2, 60), st.floats(0.05, 0.95), st.integers())
    @settings(max_examples=60)
    def test_partition(self, n, fraction, seed):
        data = [ln([f"t{i}"], TCM) for i in range(n)]
        train, test = train_test_split(data, fraction, seed)
        assert len(train) + len(test) == n
        assert len(test) >= 1 and len(train) >= 1
        combined = sorted(d.tokens.tokens[0] for d in train + test)
        assert combined == sorted(f"t{i}" for i in range(n))


class TestTopTokens:
    def test_single_doc(self):
        assert top_tokens([ln(["a", "a", "b"], TCM), ln(["x"], WESTERN)], 1)[TCM] == [("a", 2)]

    def test_k_larger_than_vocab(self):
        got = top_tokens([ln(["a", "b"], TCM), ln(["x"], WESTERN)], 10)
        assert got[TCM] == [("a", 1), ("b", 1)]

    def test_two_class_hand_count(self):
        data = [ln(["a", "b", "a"], TCM), ln(["b"], TCM), ln(["c", "c", "b"], WESTERN)]
        got = top_tokens(data, 2)
        assert got[TCM] == [("a", 2), ("b", 2)]
        assert got[WESTERN] == [("c", 2), ("b", 1)]

    def test_k_validated(self):
        with pytest.raises(ValueError):
            top_tokens(TWO_DOC, 0)


class TestPersistence:
    def _model(self):
        data = [ln(["叶", "酸", "片"], WESTERN), ln(["参", "苓", "片"], TCM), ln(["丹", "参"], TCM)]
        return fit(data, build_vocabulary(data), alpha=0.5, token_mode="char_unigram")

    def test_round_trip_counts_bit_exact(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.token_counts == model.token_counts
        assert loaded.doc_counts == model.doc_counts
        assert loaded.alpha == model.alpha
        assert loaded.vocab == model.vocab
        assert loaded.log_likelihood == model.log_likelihood

    def test_save_load_save_stable_bytes(self, tmp_path):
        model = self._model()
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        save_model(model, p1)
        save_model(load_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_invariants_hold_after_load(self, tmp_path):
        path = tmp_path / "model.json"
        save_model(self._model(), path)
        loaded = load_model(path)
        assert abs(sum(math.exp(p) for p in loaded.log_prior.values()) - 1.0) < 1e-12
        for c in CLASSES:
            assert abs(sum(math.exp(x) for x in loaded.log_likelihood[c]) - 1.0) < 1e-9

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "something-else"}', encoding="utf-8")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "drugmatch/nb-model", "version": 99}', encoding="utf-8")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json", encoding="utf-8")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ModelFormatError):
            load_model(tmp_path / "nope.json")
