"""Seeded synthetic-corpus generator.

Produces two-source record pairs with known gold labels and planted
approval-number corruptions, giving the matcher, the classifier, and the
corrector a desk-scale test substrate with exact ground truth.  Match pairs
describe one product twice, with side 2 perturbed only in ways the pipeline
is meant to see through (unit rescaling, package refactoring, brand
prefixes, cleanable symbols, missing strength).  No-match pairs violate
exactly one rule: strength value, package total, or name distance.

Drug names are drawn per class from disjoint character pools, mixed with a
small shared pool (``class_token_overlap``), so the name classifier has
learnable signal.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from random import Random

from .dosage import format_decimal
from .fuzzy import similarity_ratio
from .records import (
    REQUIRED_COLUMNS,
    ApprovalNumber,
    DrugRecord,
    DrugType,
    MatchLabel,
    RecordPair,
)

TCM_NAME_CHARS = "参苓芪归芍术草枣仁香附黄连翘金银花甘桂茯神曲楂丹杞菊地橘贝母夏藤蒲芎泽泻"
WESTERN_NAME_CHARS = "阿莫西林奥美拉唑氯雷他定布洛芬头孢克肟罗红霉素维坦尼福辛伐汀苯磺酸氨米替培南"
SHARED_NAME_CHARS = "片丸胶囊颗粒散膏露"

_NON_Z_LETTERS = "HJS"
_BRANDS = ("联益", "华雨", "宝芝林", "瑞禾", "天元")
_SYMBOL_DECORATIONS = ("(盒)", "（瓶）", "【新】", "*", "·")
_REGIONS = ("江苏", "广东", "山东", "浙江", "四川", "吉林")
_COMPANY_CORES = ("华康", "仁和堂", "同泰", "百信", "康宁", "瑞丰", "绿洲", "金鼎", "东盛")
_COMPANY_SUFFIXES = ("药业有限公司", "药业股份有限公司", "药业集团有限公司", "制药有限公司")

_STRENGTH_MG_MENU = (50, 100, 125, 150, 200, 250, 300, 400, 500, 600, 750)
_PACKAGE_MENU = (
    ((12, "粒"), (2, "板")),
    ((10, "片"), (3, "板")),
    ((6, "袋"), (4, "盒")),
    ((8, "粒"), (3, "板")),
    ((15, "片"), (2, "板")),
    ((24, "s"),),
    ((30, "片"),),
    ((20, "粒"),),
    ((45, "s"),),
    ((36, "粒"),),
)


class InvalidConfigError(ValueError):
    """Raised for out-of-range generator settings."""


@dataclass(frozen=True)
class GeneratorConfig:
    """Settings for one corpus.

    Noise toggles apply deterministically to every match pair they are
    relevant to; ``dosage_drop`` takes precedence over ``unit_rescale`` on
    side 2 (a dropped strength cannot be rescaled).  Flip fractions are
    taken of the match-pair count, and the two flip sets are disjoint.
    """

    n_pairs: int
    match_fraction: float = 0.5
    unit_rescale: bool = True
    package_refactor: bool = True
    brand_prefix: bool = True
    symbol_noise: bool = True
    dosage_drop: bool = True
    manufacturer_variants: bool = True
    znz_flip_fraction: float = 0.0
    digit_flip_fraction: float = 0.0
    seed: int = 0
    class_token_overlap: float = 0.1
    name_distance_threshold: int = 90

    def __post_init__(self):
        if self.n_pairs < 1:
            raise InvalidConfigError(f"n_pairs must be at least 1, got {self.n_pairs}")
        for name in ("match_fraction", "znz_flip_fraction", "digit_flip_fraction", "class_token_overlap"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise InvalidConfigError(f"{name} must be in [0, 1], got {value}")
        if not 0 <= self.name_distance_threshold <= 100:
            raise InvalidConfigError(
                f"name_distance_threshold must be in [0, 100], got {self.name_distance_threshold}"
            )


@dataclass(frozen=True)
class PlantedTruth:
    """Ground truth for one corrupted approval: corruption kind + the true value."""

    kind: str  # "znz" or "digit"
    true_approval: str


@dataclass
class SyntheticCorpus:
    pairs: list[RecordPair]
    planted: dict[int, PlantedTruth] = field(default_factory=dict)


@dataclass(frozen=True)
class _Product:
    name: str
    dtype: DrugType
    strength_mg: int
    package: tuple[tuple[int, str], ...]
    region: str
    core: str
    approval: ApprovalNumber


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def _make_name(rng: Random, dtype: DrugType, overlap: float) -> str:
    pool = TCM_NAME_CHARS if dtype is DrugType.TRADITIONAL_CHINESE else WESTERN_NAME_CHARS
    length = rng.randint(3, 6)
    return "".join(
        rng.choice(SHARED_NAME_CHARS if rng.random() < overlap else pool) for _ in range(length)
    )


def _make_approval(rng: Random, dtype: DrugType) -> ApprovalNumber:
    letter = "Z" if dtype is DrugType.TRADITIONAL_CHINESE else rng.choice(_NON_Z_LETTERS)
    return ApprovalNumber(letter=letter, digits=f"{rng.randrange(10**8):08d}")


def _make_product(rng: Random, cfg: GeneratorConfig) -> _Product:
    dtype = DrugType.TRADITIONAL_CHINESE if rng.random() < 0.5 else DrugType.WESTERN
    return _Product(
        name=_make_name(rng, dtype, cfg.class_token_overlap),
        dtype=dtype,
        strength_mg=rng.choice(_STRENGTH_MG_MENU),
        package=rng.choice(_PACKAGE_MENU),
        region=rng.choice(_REGIONS),
        core=rng.choice(_COMPANY_CORES),
        approval=_make_approval(rng, dtype),
    )


def _render_dosage(strength_mg: int | None, package: tuple[tuple[int, str], ...], grams: bool) -> str:
    parts = []
    if strength_mg is not None:
        if grams:
            parts.append(f"{format_decimal(Decimal(strength_mg) / 1000)}g")
        else:
            parts.append(f"{strength_mg}mg")
    parts.extend(f"{count}{word}" for count, word in package)
    return "*".join(parts)


def _manufacturer(product: _Product, suffix: str) -> str:
    return product.region + product.core + suffix


def _match_pair(rng: Random, cfg: GeneratorConfig) -> RecordPair:
    product = _make_product(rng, cfg)
    suffix1 = rng.choice(_COMPANY_SUFFIXES)
    suffix2 = rng.choice(_COMPANY_SUFFIXES) if cfg.manufacturer_variants else suffix1

    name2 = product.name
    if cfg.brand_prefix:
        name2 = rng.choice(_BRANDS) + " " + name2
    if cfg.symbol_noise:
        name2 = name2 + rng.choice(_SYMBOL_DECORATIONS)

    package2 = ((_package_total(product.package), "s"),) if cfg.package_refactor else product.package
    strength2 = None if cfg.dosage_drop else product.strength_mg
    approval = product.approval.render()
    return RecordPair(
        source1=DrugRecord(
            name=product.name,
            dosage_raw=_render_dosage(product.strength_mg, product.package, grams=cfg.unit_rescale),
            manufacturer=_manufacturer(product, suffix1),
            approval_raw=approval,
        ),
        source2=DrugRecord(
            name=name2,
            dosage_raw=_render_dosage(strength2, package2, grams=False),
            manufacturer=_manufacturer(product, suffix2),
            approval_raw=approval,
        ),
        gold_label=MatchLabel.MATCH,
    )


def _package_total(package: tuple[tuple[int, str], ...]) -> int:
    total = 1
    for count, _ in package:
        total *= count
    return total


def _no_match_pair(rng: Random, cfg: GeneratorConfig) -> RecordPair:
    axis = rng.choice(("strength", "package", "name"))
    p1 = _make_product(rng, cfg)

    if axis == "name":
        p2 = _make_product(rng, cfg)
        name2 = p2.name
        for _ in range(100):
            if similarity_ratio(p1.name, name2) < cfg.name_distance_threshold:
                break
            name2 = _make_name(rng, p2.dtype, cfg.class_token_overlap)
        else:
            while similarity_ratio(p1.name, name2) >= cfg.name_distance_threshold:
                name2 += rng.choice(WESTERN_NAME_CHARS + TCM_NAME_CHARS)
        p2 = dataclasses.replace(p2, name=name2)
    elif axis == "strength":
        other = rng.choice([mg for mg in _STRENGTH_MG_MENU if mg != p1.strength_mg])
        p2 = dataclasses.replace(
            p1, strength_mg=other, approval=_make_approval_same_letter(rng, p1.approval)
        )
    else:
        total1 = _package_total(p1.package)
        other = rng.choice([p for p in _PACKAGE_MENU if _package_total(p) != total1])
        p2 = dataclasses.replace(
            p1, package=other, approval=_make_approval_same_letter(rng, p1.approval)
        )

    name2 = p2.name
    if cfg.brand_prefix:
        name2 = rng.choice(_BRANDS) + " " + name2
    if cfg.symbol_noise:
        name2 = name2 + rng.choice(_SYMBOL_DECORATIONS)
    package2 = ((_package_total(p2.package), "s"),) if cfg.package_refactor else p2.package
    return RecordPair(
        source1=DrugRecord(
            name=p1.name,
            dosage_raw=_render_dosage(p1.strength_mg, p1.package, grams=cfg.unit_rescale),
            manufacturer=_manufacturer(p1, rng.choice(_COMPANY_SUFFIXES)),
            approval_raw=p1.approval.render(),
        ),
        source2=DrugRecord(
            name=name2,
            dosage_raw=_render_dosage(p2.strength_mg, package2, grams=False),
            manufacturer=_manufacturer(p2, rng.choice(_COMPANY_SUFFIXES)),
            approval_raw=p2.approval.render(),
        ),
        gold_label=MatchLabel.NO_MATCH,
    )


def _make_approval_same_letter(rng: Random, like: ApprovalNumber) -> ApprovalNumber:
    digits = f"{rng.randrange(10**8):08d}"
    while digits == like.digits:
        digits = f"{rng.randrange(10**8):08d}"
    return ApprovalNumber(letter=like.letter, digits=digits)


def _flip_letter(rng: Random, approval: ApprovalNumber) -> ApprovalNumber:
    letter = rng.choice(_NON_Z_LETTERS) if approval.letter == "Z" else "Z"
    return ApprovalNumber(letter=letter, digits=approval.digits)


def _flip_digit(rng: Random, approval: ApprovalNumber) -> ApprovalNumber:
    pos = rng.randrange(8)
    old = int(approval.digits[pos])
    new = (old + 1 + rng.randrange(9)) % 10
    digits = approval.digits[:pos] + str(new) + approval.digits[pos + 1 :]
    return ApprovalNumber(letter=approval.letter, digits=digits)


def _corrupt_side(pair: RecordPair, side: int, approval: ApprovalNumber) -> RecordPair:
    record = pair.source1 if side == 1 else pair.source2
    record = dataclasses.replace(record, approval_raw=approval.render())
    if side == 1:
        return dataclasses.replace(pair, source1=record)
    return dataclasses.replace(pair, source2=record)


def generate(cfg: GeneratorConfig) -> SyntheticCorpus:
    """Build a corpus; identical configs (and seeds) give identical corpora."""
    rng = Random(cfg.seed)
    n_match = _round_half_up(cfg.n_pairs * cfg.match_fraction)
    labels = [MatchLabel.MATCH] * n_match + [MatchLabel.NO_MATCH] * (cfg.n_pairs - n_match)
    rng.shuffle(labels)

    pairs = [
        _match_pair(rng, cfg) if label is MatchLabel.MATCH else _no_match_pair(rng, cfg)
        for label in labels
    ]

    match_indices = [i for i, label in enumerate(labels) if label is MatchLabel.MATCH]
    n_znz = min(_round_half_up(cfg.znz_flip_fraction * n_match), n_match)
    znz_indices = sorted(rng.sample(match_indices, n_znz))
    remaining = [i for i in match_indices if i not in set(znz_indices)]
    n_digit = min(_round_half_up(cfg.digit_flip_fraction * n_match), len(remaining))
    digit_indices = sorted(rng.sample(remaining, n_digit))

    planted: dict[int, PlantedTruth] = {}
    for i in znz_indices:
        truth = pairs[i].source1.approval_raw
        side = rng.choice((1, 2))
        flipped = _flip_letter(rng, ApprovalNumber(letter=truth[0], digits=truth[1:]))
        pairs[i] = _corrupt_side(pairs[i], side, flipped)
        planted[i] = PlantedTruth(kind="znz", true_approval=truth)
    for i in digit_indices:
        truth = pairs[i].source1.approval_raw
        side = rng.choice((1, 2))
        flipped = _flip_digit(rng, ApprovalNumber(letter=truth[0], digits=truth[1:]))
        pairs[i] = _corrupt_side(pairs[i], side, flipped)
        planted[i] = PlantedTruth(kind="digit", true_approval=truth)

    return SyntheticCorpus(pairs=pairs, planted=planted)


def write_corpus_csv(corpus: SyntheticCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(REQUIRED_COLUMNS) + ["label"])
        for pair in corpus.pairs:
            writer.writerow(
                [
                    pair.source1.name,
                    pair.source1.dosage_raw,
                    pair.source1.manufacturer,
                    pair.source1.approval_raw,
                    pair.source2.name,
                    pair.source2.dosage_raw,
                    pair.source2.manufacturer,
                    pair.source2.approval_raw,
                    pair.gold_label.value,
                ]
            )


def write_truth_csv(corpus: SyntheticCorpus, path: str | Path) -> None:
    """Sidecar ground truth for planted approval corruptions."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pair_index", "kind", "true_approval"])
        for index in sorted(corpus.planted):
            truth = corpus.planted[index]
            writer.writerow([index, truth.kind, truth.true_approval])
