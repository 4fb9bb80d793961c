"""Dosage-string parsing: strength (value + unit) and package quantity.

Raw dosage strings mix a per-unit strength with multiplicative pack factors,
e.g. ``0.3g*12粒*2板`` is 0.3 g per pill, 12 pills per board, 2 boards (24
sellable units).  Bracketed fragments carry no dosage information and are
stripped before splitting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from math import prod

from .textnorm import bracket_spans


class Dimension(Enum):
    MASS = "mass"
    VOLUME = "volume"
    ACTIVITY = "activity"
    FRACTION = "fraction"


class Unit(Enum):
    MG = "mg"
    G = "g"
    UG = "ug"
    KG = "kg"
    ML = "ml"
    L = "l"
    IU = "IU"
    PERCENT = "percent"


_DIMENSION_OF = {
    Unit.MG: Dimension.MASS,
    Unit.G: Dimension.MASS,
    Unit.UG: Dimension.MASS,
    Unit.KG: Dimension.MASS,
    Unit.ML: Dimension.VOLUME,
    Unit.L: Dimension.VOLUME,
    Unit.IU: Dimension.ACTIVITY,
    Unit.PERCENT: Dimension.FRACTION,
}

# Canonical unit per dimension and the exact factor into it.
_CANONICAL_UNIT = {
    Dimension.MASS: Unit.MG,
    Dimension.VOLUME: Unit.ML,
    Dimension.ACTIVITY: Unit.IU,
    Dimension.FRACTION: Unit.PERCENT,
}
_TO_CANONICAL = {
    Unit.MG: Decimal(1),
    Unit.G: Decimal(1000),
    Unit.KG: Decimal(1_000_000),
    Unit.UG: Decimal("0.001"),
    Unit.ML: Decimal(1),
    Unit.L: Decimal(1000),
    Unit.IU: Decimal(1),
    Unit.PERCENT: Decimal(1),
}

# Lower-cased suffix -> unit.  μg (Greek mu) and µg (micro sign) are ug.
_UNIT_ALIASES = {
    "mg": Unit.MG,
    "g": Unit.G,
    "ug": Unit.UG,
    "μg": Unit.UG,
    "µg": Unit.UG,
    "kg": Unit.KG,
    "ml": Unit.ML,
    "l": Unit.L,
    "iu": Unit.IU,
    "%": Unit.PERCENT,
}

_RENDER_SUFFIX = {
    Unit.MG: "mg",
    Unit.G: "g",
    Unit.UG: "ug",
    Unit.KG: "kg",
    Unit.ML: "ml",
    Unit.L: "l",
    Unit.IU: "IU",
    Unit.PERCENT: "%",
}

# Numbers accept decimal points and leading zeros; thousands separators and
# signs are rejected (tokens containing them land in the residue).
_NUMBER_TOKEN_RE = re.compile(r"\A([0-9]+(?:\.[0-9]+)?)(.*)\Z", re.DOTALL)
_SEPARATORS_RE = re.compile(r"[*×]")


@dataclass(frozen=True)
class Strength:
    """Per-unit dose: a positive decimal value with a unit of measurement."""

    value: Decimal
    unit: Unit

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError(f"strength value must be positive, got {self.value}")

    @property
    def dimension(self) -> Dimension:
        return _DIMENSION_OF[self.unit]

    def render(self) -> str:
        return format_decimal(self.value) + _RENDER_SUFFIX[self.unit]


@dataclass(frozen=True)
class PackageFactor:
    """One multiplicative pack factor: a count plus its (possibly empty) count word."""

    count: int
    word: str = ""

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError(f"factor count must be positive, got {self.count}")


@dataclass(frozen=True)
class PackageQuantity:
    """Total sellable unit count as a product of pack factors."""

    factors: tuple[PackageFactor, ...]
    total: int

    def __post_init__(self):
        if not self.factors:
            raise ValueError("package quantity needs at least one factor")
        if self.total != prod(f.count for f in self.factors):
            raise ValueError("total must equal the product of factor counts")

    @classmethod
    def from_factors(cls, factors) -> "PackageQuantity":
        factors = tuple(factors)
        return cls(factors=factors, total=prod(f.count for f in factors))

    def render(self) -> str:
        return "*".join(f"{f.count}{f.word}" for f in self.factors)


@dataclass(frozen=True)
class ParsedDosage:
    """Decomposition of a raw dosage string.

    Every token that survives bracket stripping is accounted for exactly
    once: as the strength, as a package factor, or in the residue.
    """

    strength: Strength | None
    package: PackageQuantity | None
    residue: tuple[str, ...] = ()


def _strip_brackets(raw: str) -> str:
    spans, strays = bracket_spans(raw)
    drop = set(strays)
    for start, end in spans:
        drop.update(range(start, end + 1))
    return "".join(ch for i, ch in enumerate(raw) if i not in drop)


def parse_dosage(raw: str) -> ParsedDosage:
    """Parse a raw dosage string; never raises.

    After bracket stripping the string is split on ``*`` and ``×``.  A
    ``<number><strength-unit>`` token becomes the strength (first one wins,
    later ones go to the residue); a ``<integer><anything-else-or-nothing>``
    token becomes a package factor whose trailing text is the count word;
    everything else is residue.
    """
    stripped = _strip_brackets(raw)
    tokens = []
    for piece in _SEPARATORS_RE.split(stripped):
        piece = "".join(piece.split())  # whitespace inside tokens is noise
        if piece:
            tokens.append(piece)

    strength: Strength | None = None
    factors: list[PackageFactor] = []
    residue: list[str] = []
    for token in tokens:
        m = _NUMBER_TOKEN_RE.match(token)
        if not m:
            residue.append(token)
            continue
        number, suffix = m.groups()
        unit = _UNIT_ALIASES.get(suffix.lower())
        if unit is not None:
            value = Decimal(number)
            if strength is None and value > 0:
                strength = Strength(value=value, unit=unit)
            else:
                residue.append(token)
            continue
        # Package factor: integer count, digit-free count word.  Unknown
        # suffixes are count words by design (the vocabulary is open-ended).
        if "." in number or any(ch.isdigit() for ch in suffix):
            residue.append(token)
            continue
        count = int(number)
        if count <= 0:
            residue.append(token)
            continue
        factors.append(PackageFactor(count=count, word=suffix))

    package = PackageQuantity.from_factors(factors) if factors else None
    return ParsedDosage(strength=strength, package=package, residue=tuple(residue))


def normalize_strength(s: Strength) -> Strength:
    """Rescale to the canonical unit of the strength's dimension (exactly).

    mass -> mg, volume -> ml, activity -> IU, fraction -> percent.
    """
    canonical = _CANONICAL_UNIT[s.dimension]
    if s.unit is canonical:
        return s
    return Strength(value=s.value * _TO_CANONICAL[s.unit], unit=canonical)


def strength_equal(a: Strength, b: Strength, rel_tol: Decimal | float | str = Decimal("1e-9")) -> bool:
    """Dimension-aware equality after unit normalization.

    Different dimensions never compare equal; same-dimension values compare
    within the given relative tolerance.
    """
    if a.dimension is not b.dimension:
        return False
    va = normalize_strength(a).value
    vb = normalize_strength(b).value
    tol = rel_tol if isinstance(rel_tol, Decimal) else Decimal(str(rel_tol))
    return abs(va - vb) <= tol * max(va, vb)


def package_equal(a: PackageQuantity, b: PackageQuantity) -> bool:
    """Totals decide equality; count words are packaging vocabulary, not quantity."""
    return a.total == b.total


def format_decimal(d: Decimal) -> str:
    """Plain decimal rendering without exponent or trailing zeros."""
    s = f"{d:f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s
