"""Drug information lookup: popularity and manufacturers per cleaned name."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .fuzzy import ManufacturerClusters, dedup_manufacturers
from .records import DrugRecord
from .textnorm import EmptyResultError, clean_name


@dataclass(frozen=True)
class DrugEntry:
    """Index entry for one cleaned name: appearance count plus clustered manufacturers."""

    count: int
    manufacturers: ManufacturerClusters


@dataclass(frozen=True)
class DrugIndex:
    """Immutable map from cleaned drug name to its entry; safe for concurrent queries."""

    entries: dict[str, DrugEntry]
    skipped: int  # records whose name cleaning left nothing


@dataclass(frozen=True)
class InfoReport:
    """Answer to a drug-name query.

    ``manufacturer_count`` counts clusters (companies); the raw distinct
    string count is reported separately since sources disagree on spelling.
    """

    name: str
    popularity: int
    manufacturer_count: int
    manufacturer_name_count: int
    duplicated_groups: tuple[tuple[str, ...], ...] = ()


def build_index(
    records: Iterable[DrugRecord],
    threshold: int = 90,
    brand_lexicon: Iterable[str] = (),
) -> DrugIndex:
    """Group records by cleaned name; cluster each group's manufacturers."""
    lexicon = tuple(brand_lexicon)
    counts: dict[str, int] = {}
    manufacturers: dict[str, set[str]] = {}
    skipped = 0
    for record in records:
        try:
            key = clean_name(record.name, lexicon).text
        except EmptyResultError:
            skipped += 1
            continue
        counts[key] = counts.get(key, 0) + 1
        manufacturers.setdefault(key, set()).add(record.manufacturer)
    entries = {
        key: DrugEntry(
            count=counts[key],
            manufacturers=dedup_manufacturers(manufacturers[key], threshold),
        )
        for key in sorted(counts)
    }
    return DrugIndex(entries=entries, skipped=skipped)


def query(
    index: DrugIndex,
    name: str,
    brand_lexicon: Iterable[str] = (),
) -> InfoReport:
    """Look up a drug name; queries get the same cleaning as indexed records."""
    try:
        key = clean_name(name, tuple(brand_lexicon)).text
    except EmptyResultError:
        key = name
    entry = index.entries.get(key)
    if entry is None:
        return InfoReport(name=key, popularity=0, manufacturer_count=0, manufacturer_name_count=0)
    clusters = entry.manufacturers
    return InfoReport(
        name=key,
        popularity=entry.count,
        manufacturer_count=len(clusters.clusters),
        manufacturer_name_count=sum(len(c) for c in clusters.clusters),
        duplicated_groups=clusters.duplicated_groups(),
    )
