"""Levenshtein distance, a 0-100 similarity ratio, and manufacturer dedup."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


def levenshtein(a: str, b: str) -> int:
    """Minimal single-character edits (insert/delete/substitute) from ``a`` to ``b``.

    Operates on code points, which is the right unit for CJK text.
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(b) > len(a):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        append = cur.append
        for j, cb in enumerate(b, 1):
            if ca == cb:
                append(prev[j - 1])
            else:
                append(1 + min(prev[j - 1], prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def similarity_ratio(a: str, b: str) -> int:
    """Normalized similarity in [0, 100]: 100 means (and only means) equal.

    Computed as round(100 * (1 - distance / max(len))), rounding half away
    from zero, with the both-empty case defined as 100.  Rounding is capped
    at 99 for unequal strings so the 100-iff-equal invariant holds even for
    long, nearly identical inputs.
    """
    if a == b:
        return 100
    longest = max(len(a), len(b))
    p = 100 * (longest - levenshtein(a, b))
    value = (2 * p + longest) // (2 * longest)
    return min(value, 99)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


@dataclass(frozen=True)
class ManufacturerClusters:
    """A partition of manufacturer names into same-company clusters.

    Clusters are sorted member tuples, ordered by their representative (the
    lexicographically smallest member), so output is stable regardless of
    input enumeration order.
    """

    clusters: tuple[tuple[str, ...], ...]

    @property
    def representatives(self) -> tuple[str, ...]:
        return tuple(cluster[0] for cluster in self.clusters)

    def duplicated_groups(self) -> tuple[tuple[str, ...], ...]:
        return tuple(c for c in self.clusters if len(c) >= 2)


def dedup_manufacturers(names: Iterable[str], threshold: int = 90) -> ManufacturerClusters:
    """Cluster manufacturer names whose pairwise similarity exceeds ``threshold``.

    Merging is strict (ratio must be greater than the threshold, not equal)
    and transitive via union-find, so chains of near-duplicates land in one
    cluster.
    """
    if not 0 <= threshold <= 100:
        raise ValueError(f"threshold must be in [0, 100], got {threshold}")
    ordered = sorted(set(names))
    uf = _UnionFind(len(ordered))
    for i in range(len(ordered)):
        for j in range(i + 1, len(ordered)):
            if similarity_ratio(ordered[i], ordered[j]) > threshold:
                uf.union(i, j)
    groups: dict[int, list[str]] = {}
    for i, name in enumerate(ordered):
        groups.setdefault(uf.find(i), []).append(name)
    clusters = sorted(tuple(sorted(members)) for members in groups.values())
    return ManufacturerClusters(clusters=tuple(clusters))
