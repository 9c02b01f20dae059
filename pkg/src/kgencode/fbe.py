"""Frequency-based encoding: the most frequent terms get the smallest IDs."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .ingest import Term
from .sketches import FrequencyEstimate, rank_key


@dataclass(frozen=True)
class FrequentDictionary:
    entries: tuple[tuple[Term, int], ...] = ()
    estimates: tuple[int, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: object) -> bool:
        return term in self.mapping

    @cached_property
    def mapping(self) -> dict[Term, int]:
        return dict(self.entries)

    @cached_property
    def terms(self) -> frozenset[Term]:
        return frozenset(t for t, _ in self.entries)

    @property
    def max_id(self) -> int | None:
        return len(self.entries) - 1 if self.entries else None

    @property
    def next_id(self) -> int:
        return len(self.entries)


def build_frequent_dictionary(estimates: Iterable[FrequencyEstimate], k: int) -> FrequentDictionary:
    """Keep the top ``k`` estimates and number them 0, 1, 2, ... in rank order."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    estimates = list(estimates)
    seen: set[Term] = set()
    for e in estimates:
        if e.term in seen:
            raise ValueError(f"duplicate term in estimates: {e.term.lexical!r}")
        seen.add(e.term)
    ranked = sorted(estimates, key=rank_key)[:k]
    return FrequentDictionary(
        tuple((e.term, i) for i, e in enumerate(ranked)),
        tuple(e.estimate for e in ranked),
    )
