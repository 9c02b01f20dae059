"""Space model, baseline encoders, and measured compression/locality.

The bit model compares a fixed-width ID assignment with a frequency-blocked
one: block ``i`` (1-based) holds the next ``2**i`` most frequent terms and
costs ``i`` bits plus ``ceil(log2 b)`` bits to tell the ``b`` blocks apart.
It is an analytical yardstick only; shipped files use byte-aligned varints.
"""

from __future__ import annotations

import hashlib
import logging
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dictionary import Dictionary
from .ingest import Term, Triple, iter_occurrences
from .varint import varint_lengths

logger = logging.getLogger(__name__)

ZIPF_LAWS = ("geometric", "power")


def ceil_log2(n: int) -> int:
    """Exact ceil(log2 n) for n >= 1."""
    if n < 1:
        raise ValueError(f"log2 undefined for {n}")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class FrequencyTable:
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c < 1 for c in self.counts):
            raise ValueError("frequencies must be >= 1")

    @classmethod
    def from_counts(cls, counts: Iterable[int] | Mapping[object, int]) -> "FrequencyTable":
        values = counts.values() if isinstance(counts, Mapping) else counts
        return cls(tuple(sorted((int(c) for c in values), reverse=True)))

    @classmethod
    def from_triples(cls, triples: Iterable[Triple]) -> "FrequencyTable":
        return cls.from_counts(Counter(iter_occurrences(triples)))

    @property
    def F(self) -> int:
        return sum(self.counts)

    @property
    def n_distinct(self) -> int:
        return len(self.counts)

    @property
    def degenerate(self) -> bool:
        """A single symbol needs no bits at all; both models report 0."""
        return self.n_distinct <= 1


def block_of_rank(rank: int) -> int:
    """Block index of a 1-based frequency rank: blocks hold 2, 4, 8, ... ranks."""
    if rank < 1:
        raise ValueError("ranks are 1-based")
    return (rank + 1).bit_length() - 1


def block_sizes(n: int) -> list[int]:
    """Number of ranks in each non-empty block for ``n`` distinct terms."""
    sizes: list[int] = []
    left, i = n, 1
    while left > 0:
        take = min(left, 1 << i)
        sizes.append(take)
        left -= take
        i += 1
    return sizes


def s_fix(table: FrequencyTable) -> int:
    if table.n_distinct == 0:
        return 0
    return table.F * ceil_log2(table.n_distinct)


def s_kog(table: FrequencyTable) -> int:
    n = table.n_distinct
    if n <= 1:
        if n == 1:
            logger.info("single-term table: space model degenerates to 0 bits")
        return 0
    b = ceil_log2(n)
    tag = ceil_log2(b)
    counts = np.asarray(table.counts, dtype=np.int64)
    total, pos = 0, 0
    for i, size in enumerate(block_sizes(n), start=1):
        total += (i + tag) * int(counts[pos:pos + size].sum())
        pos += size
    return total


@dataclass(frozen=True)
class ZipfParams:
    s: float
    n: int
    F: int


def s_kog_zipf(params: ZipfParams) -> float:
    """Closed-form approximation for geometric-Zipf frequencies ``F / s**k``."""
    if params.s < 2:
        warnings.warn(f"s={params.s} is outside the s >= 2 regime of the approximation", stacklevel=2)
    if params.n < 2:
        raise ValueError("need at least two distinct terms")
    b = ceil_log2(params.n)
    return params.F * (ceil_log2(b) + 1.0 / params.s**2)


def zipf_frequencies(n: int, s: float, F: int, law: str = "geometric") -> list[int]:
    """Integer frequencies for ranks 1..n summing exactly to ``max(F, n)``.

    ``geometric`` follows ``f_k ~ F / s**k``; ``power`` the classical
    ``f_k ~ 1 / k**s``. Every rank gets at least one occurrence and the rest
    of the mass is split by largest remainder.
    """
    if law not in ZIPF_LAWS:
        raise ValueError(f"unknown Zipf law {law!r}")
    if n < 1:
        return []
    k = np.arange(1, n + 1, dtype=np.float64)
    if law == "geometric":
        logw = -k * math.log(s)
    else:
        logw = -s * np.log(k)
    w = np.exp(logw - logw.max())
    p = w / w.sum()
    extra = max(F - n, 0)
    raw = p * extra
    base = np.floor(raw).astype(np.int64)
    short = extra - int(base.sum())
    if short > 0:
        order = np.lexsort((k, -(raw - base)))
        base[order[:short]] += 1
    return (base + 1).tolist()


# -- baseline encoders -------------------------------------------------------


def order_based_encode(triples: Iterable[Triple]) -> Dictionary:
    """IDs in order of first appearance."""
    ids: dict[Term, int] = {}
    for t in iter_occurrences(triples):
        if t not in ids:
            ids[t] = len(ids)
    return Dictionary(ids)


class HashedDictionary(Dictionary):
    collisions: int = 0


def term_hash(term: Term, seed: int = 0) -> int:
    key = (seed & ((1 << 64) - 1)).to_bytes(8, "little")
    return int.from_bytes(hashlib.blake2b(term.to_bytes(), digest_size=8, key=key).digest(), "little")


def hash_based_encode(triples: Iterable[Triple], seed: int = 0) -> HashedDictionary:
    """ID = seeded 64-bit hash; a taken ID probes linearly to the next free one.

    Terms are inserted in sorted order so the probe outcome is independent of
    input order.
    """
    distinct = sorted(set(iter_occurrences(triples)))
    used: dict[int, Term] = {}
    collisions = 0
    mask = (1 << 64) - 1
    for t in distinct:
        h = term_hash(t, seed)
        while h in used:
            collisions += 1
            h = (h + 1) & mask
        used[h] = t
    d = HashedDictionary({t: h for h, t in used.items()})
    d.collisions = collisions
    if collisions:
        logger.info("hash encoding resolved %d collisions", collisions)
    return d


def syntactic_encode(triples: Iterable[Triple]) -> Dictionary:
    """Distinct terms in lexical order, numbered consecutively."""
    distinct = sorted(set(iter_occurrences(triples)))
    return Dictionary({t: i for i, t in enumerate(distinct)})


# -- measured metrics --------------------------------------------------------


def to_ids(triples: Sequence[Triple], dictionary: Dictionary) -> np.ndarray:
    lookup = dictionary.term_to_id
    try:
        flat = [lookup[t] for t in iter_occurrences(triples)]
    except KeyError as exc:
        raise KeyError(f"term missing from dictionary: {exc.args[0]!r}") from None
    return np.array(flat, dtype=np.uint64).reshape(-1, 3)


def encoded_size(ids: np.ndarray) -> int:
    """Bytes needed to store the ID triples as varints (no header)."""
    ids = np.asarray(ids, dtype=np.uint64)
    return int(varint_lengths(ids).sum()) if ids.size else 0


def measure_compression(triples: Sequence[Triple], dictionary: Dictionary) -> int:
    return encoded_size(to_ids(triples, dictionary))


def index_span(index: np.ndarray, keys: np.ndarray) -> float:
    """Fraction of a sorted index lying between the first and last join hit."""
    if index.size == 0:
        return 0.0
    hits = np.flatnonzero(np.isin(index, keys))
    if hits.size == 0:
        return 0.0
    return float(hits[-1] - hits[0] + 1) / index.size


def measure_join_locality(ids: np.ndarray, predicates: tuple[int, int]) -> float:
    """Mean covered span of a subject-subject join over two predicate indexes.

    Each predicate's index is its sorted list of subject IDs. Lower is better.
    """
    ids = np.asarray(ids, dtype=np.uint64).reshape(-1, 3)
    indexes = []
    for p in predicates:
        subj = ids[ids[:, 1] == np.uint64(p), 0]
        if subj.size == 0:
            raise KeyError(f"predicate id {p} does not occur")
        indexes.append(np.sort(subj))
    keys = np.intersect1d(indexes[0], indexes[1])
    return float(np.mean([index_span(ix, keys) for ix in indexes]))
