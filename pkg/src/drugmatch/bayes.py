"""Multinomial naive Bayes over tokenized drug names.

Classifies a name as traditional Chinese vs western, with the training
labels derived from approval-number letters.  Everything is computed in log
space; the model persists as versioned JSON holding raw counts, so loading
recomputes the (normalized) likelihoods exactly.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .records import DrugType, MalformedApprovalNumber, MatchLabel, RecordPair, drug_type_of, parse_approval_number
from .textnorm import EmptyResultError, TokenSeq, clean_name, tokenize

CLASSES = (DrugType.TRADITIONAL_CHINESE, DrugType.WESTERN)

MODEL_FORMAT = "drugmatch/nb-model"
MODEL_VERSION = 1


class MissingClassError(ValueError):
    """Raised when the training data lacks one of the two classes."""


class TooSmallError(ValueError):
    """Raised when a dataset is too small to split."""


class ModelFormatError(ValueError):
    """Raised when a model file is not a readable model of a known version."""


@dataclass(frozen=True)
class Vocabulary:
    """Token -> dense feature id, ids exactly 0..size-1, tokens sorted."""

    index: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.index)

    def tokens(self) -> list[str]:
        return sorted(self.index, key=self.index.get)


@dataclass(frozen=True)
class LabeledName:
    """A tokenized drug name with its derived class."""

    tokens: TokenSeq
    klass: DrugType


def derive_training_labels(
    pairs: Iterable[RecordPair],
    brand_lexicon: Iterable[str] = (),
    token_mode: str = "char_unigram",
) -> list[LabeledName]:
    """Turn record pairs into (tokens, class) examples via approval letters.

    Both sources contribute.  Records whose approval number does not parse
    are skipped, matched (label=1) pairs whose letters disagree on Z vs
    non-Z are excluded entirely (their class is exactly what is in doubt),
    and exact duplicates are removed.
    """
    lexicon = tuple(brand_lexicon)
    out: list[LabeledName] = []
    seen: set[tuple[tuple[str, ...], DrugType]] = set()
    for pair in pairs:
        approvals = []
        for record in (pair.source1, pair.source2):
            try:
                approvals.append(parse_approval_number(record.approval_raw))
            except MalformedApprovalNumber:
                approvals.append(None)
        if (
            pair.gold_label is MatchLabel.MATCH
            and approvals[0] is not None
            and approvals[1] is not None
            and (approvals[0].letter == "Z") != (approvals[1].letter == "Z")
        ):
            continue
        for record, approval in zip((pair.source1, pair.source2), approvals):
            if approval is None:
                continue
            try:
                tokens = tokenize(clean_name(record.name, lexicon), token_mode)
            except EmptyResultError:
                continue
            klass = drug_type_of(approval)
            key = (tokens.tokens, klass)
            if key not in seen:
                seen.add(key)
                out.append(LabeledName(tokens=tokens, klass=klass))
    return out


def build_vocabulary(data: Sequence[LabeledName]) -> Vocabulary:
    """All distinct tokens in the data, sorted, densely numbered."""
    if not data:
        raise ValueError("cannot build a vocabulary from no data")
    tokens = sorted({t for item in data for t in item.tokens})
    return Vocabulary(index={t: i for i, t in enumerate(tokens)})


def count_vector(vocab: Vocabulary, tokens: TokenSeq) -> dict[int, int]:
    """Sparse per-feature counts; tokens outside the vocabulary are ignored."""
    counts: dict[int, int] = {}
    index = vocab.index
    for t in tokens:
        fid = index.get(t)
        if fid is not None:
            counts[fid] = counts.get(fid, 0) + 1
    return counts


@dataclass(frozen=True)
class NBModel:
    """A fitted multinomial naive Bayes model.

    Raw counts are the source of truth; log priors and Laplace-smoothed log
    likelihoods are derived from them, so per class exp(log_likelihood)
    sums to one over the vocabulary and exp(log_prior) sums to one over
    classes.  Immutable, safe to share.
    """

    vocab: Vocabulary
    alpha: float
    token_mode: str
    doc_counts: dict[DrugType, int]
    token_counts: dict[DrugType, list[int]]
    log_prior: dict[DrugType, float]
    log_likelihood: dict[DrugType, list[float]]

    @classmethod
    def from_counts(
        cls,
        vocab: Vocabulary,
        alpha: float,
        token_mode: str,
        doc_counts: dict[DrugType, int],
        token_counts: dict[DrugType, list[int]],
    ) -> "NBModel":
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        missing = [c for c in CLASSES if doc_counts.get(c, 0) == 0]
        if missing:
            raise MissingClassError(f"no documents for class(es): {[c.value for c in missing]}")
        total_docs = sum(doc_counts[c] for c in CLASSES)
        log_prior = {c: math.log(doc_counts[c] / total_docs) for c in CLASSES}
        log_likelihood: dict[DrugType, list[float]] = {}
        for c in CLASSES:
            counts = token_counts[c]
            denom = sum(counts) + alpha * vocab.size
            log_likelihood[c] = [math.log((n + alpha) / denom) for n in counts]
        return cls(
            vocab=vocab,
            alpha=alpha,
            token_mode=token_mode,
            doc_counts=dict(doc_counts),
            token_counts={c: list(v) for c, v in token_counts.items()},
            log_prior=log_prior,
            log_likelihood=log_likelihood,
        )


def fit(
    data: Sequence[LabeledName],
    vocab: Vocabulary,
    alpha: float = 1.0,
    token_mode: str = "char_unigram",
) -> NBModel:
    """Fit priors and Laplace-smoothed token likelihoods by counting."""
    if not data:
        raise ValueError("cannot fit on no data")
    doc_counts = {c: 0 for c in CLASSES}
    token_counts = {c: [0] * vocab.size for c in CLASSES}
    for item in data:
        doc_counts[item.klass] += 1
        counts = token_counts[item.klass]
        for fid, n in count_vector(vocab, item.tokens).items():
            counts[fid] += n
    return NBModel.from_counts(vocab, alpha, token_mode, doc_counts, token_counts)


def predict(model: NBModel, tokens: TokenSeq) -> tuple[DrugType, dict[DrugType, float]]:
    """Most probable class plus softmax-normalized posteriors.

    Unknown tokens contribute nothing; with no known tokens the prior alone
    decides.  Exact score ties resolve to traditional Chinese.
    """
    vec = count_vector(model.vocab, tokens)
    scores: dict[DrugType, float] = {}
    for c in CLASSES:
        ll = model.log_likelihood[c]
        scores[c] = model.log_prior[c] + sum(n * ll[fid] for fid, n in vec.items())
    top = max(scores.values())
    exps = {c: math.exp(s - top) for c, s in scores.items()}
    z = sum(exps.values())
    posterior = {c: exps[c] / z for c in CLASSES}
    best = CLASSES[0]
    for c in CLASSES[1:]:
        if scores[c] > scores[best]:
            best = c
    return best, posterior


def train_test_split(
    data: Sequence[LabeledName],
    test_fraction: float = 0.1,
    seed: int = 0,
) -> tuple[list[LabeledName], list[LabeledName]]:
    """Seeded shuffle split; the test side gets round(fraction * n), at least 1."""
    if len(data) < 2:
        raise TooSmallError(f"need at least 2 examples to split, got {len(data)}")
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    order = list(range(len(data)))
    random.Random(seed).shuffle(order)
    n_test = int(len(data) * test_fraction + 0.5)  # half away from zero
    n_test = max(1, min(len(data) - 1, n_test))
    test = [data[i] for i in order[:n_test]]
    train = [data[i] for i in order[n_test:]]
    return train, test


def top_tokens(data: Sequence[LabeledName], k: int) -> dict[DrugType, list[tuple[str, int]]]:
    """Per class, the k most frequent tokens (count desc, token asc)."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    counters = {c: Counter() for c in CLASSES}
    for item in data:
        counters[item.klass].update(item.tokens)
    out = {}
    for c in CLASSES:
        ranked = sorted(counters[c].items(), key=lambda kv: (-kv[1], kv[0]))
        out[c] = ranked[:k]
    return out


def save_model(model: NBModel, path: str | Path) -> None:
    """Write the model as versioned JSON (counts only; exact round-trip)."""
    vocab_tokens = model.vocab.tokens()
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "alpha": model.alpha,
        "token_mode": model.token_mode,
        "vocabulary": vocab_tokens,
        "classes": {
            c.value: {
                "documents": model.doc_counts[c],
                "token_counts": {
                    tok: n for tok, n in zip(vocab_tokens, model.token_counts[c]) if n
                },
            }
            for c in CLASSES
        },
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def load_model(path: str | Path) -> NBModel:
    """Read a model written by :func:`save_model`; likelihoods are recomputed."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path} is not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version: {payload.get('version')!r}")
    try:
        vocab_tokens = payload["vocabulary"]
        if len(set(vocab_tokens)) != len(vocab_tokens):
            raise ModelFormatError(f"duplicate vocabulary tokens in {path}")
        vocab = Vocabulary(index={t: i for i, t in enumerate(vocab_tokens)})
        doc_counts: dict[DrugType, int] = {}
        token_counts: dict[DrugType, list[int]] = {}
        for c in CLASSES:
            cls_payload = payload["classes"][c.value]
            doc_counts[c] = cls_payload["documents"]
            counts = [0] * vocab.size
            for tok, n in cls_payload["token_counts"].items():
                counts[vocab.index[tok]] = n
            token_counts[c] = counts
        return NBModel.from_counts(
            vocab, payload["alpha"], payload["token_mode"], doc_counts, token_counts
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (MissingClassError, ModelFormatError)):
            raise
        raise ModelFormatError(f"malformed model file {path}: {exc}") from exc
