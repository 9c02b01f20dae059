"""Streaming frequency estimation over RDF term occurrences.

Count-Min answers "how often" with one-sided (over-)error, Misra-Gries answers
"which terms could be heavy" in O(k) space. The hybrid keeps both per worker,
merges them, and uses the merged Count-Min arrays both to estimate each
Misra-Gries candidate and to derive the frequency threshold.
"""

from __future__ import annotations

import hashlib
import heapq
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .ingest import Term, TermKind, Triple, iter_occurrences

DEFAULT_HASHES = 3
DEFAULT_WIDTH = 1 << 20
DEFAULT_K = 50

_U64 = (1 << 64) - 1


class FrequencyEstimate(NamedTuple):
    term: Term
    estimate: int


def rank_key(item: FrequencyEstimate) -> tuple:
    """Sort key: estimate descending, then term lexical order ascending."""
    return (-item.estimate, item.term)


class HashFamily:
    """``n`` independently seeded 64-bit hashes over a term's bytes.

    Each member is keyed BLAKE2b with an 8-byte digest; the key is the
    member's seed, so members never share state.
    """

    def __init__(self, seeds: Sequence[int]):
        seeds = [int(s) & _U64 for s in seeds]
        if not seeds:
            raise ValueError("a hash family needs at least one seed")
        if len(set(seeds)) != len(seeds):
            raise ValueError("hash seeds must be distinct")
        self.seeds = tuple(seeds)
        self._keys = tuple(s.to_bytes(8, "little") for s in self.seeds)

    @classmethod
    def from_seed(cls, seed: int, n: int = DEFAULT_HASHES) -> "HashFamily":
        """Derive ``n`` distinct member seeds from one master seed."""
        if n < 1:
            raise ValueError(f"need at least one hash function, got {n}")
        ss = np.random.SeedSequence(seed & _U64)
        words = ss.generate_state(2 * n + 8, dtype=np.uint64)
        seeds: list[int] = []
        for w in words:
            if int(w) not in seeds:
                seeds.append(int(w))
            if len(seeds) == n:
                break
        return cls(seeds)

    @property
    def n(self) -> int:
        return len(self.seeds)

    def hash(self, term: Term, j: int) -> int:
        digest = hashlib.blake2b(term.to_bytes(), digest_size=8, key=self._keys[j]).digest()
        return int.from_bytes(digest, "little")

    def hashes(self, term: Term) -> list[int]:
        data = term.to_bytes()
        blake = hashlib.blake2b
        return [
            int.from_bytes(blake(data, digest_size=8, key=key).digest(), "little")
            for key in self._keys
        ]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, HashFamily) and self.seeds == other.seeds

    def __hash__(self) -> int:
        return hash(self.seeds)


class CountMinSketch:
    """``n`` rows of ``width`` unsigned 64-bit counters.

    Updates are batched: :meth:`update_many` counts a chunk exactly first and
    then hashes each distinct term once, which is counter-for-counter the same
    as feeding the occurrences one by one.
    """

    def __init__(self, hashes: HashFamily, width: int = DEFAULT_WIDTH):
        if width < 1:
            raise ValueError(f"width must be positive, got {width}")
        self.hashes = hashes
        self.width = int(width)
        self.arrays = np.zeros((hashes.n, self.width), dtype=np.uint64)

    @property
    def n(self) -> int:
        return self.hashes.n

    @property
    def total(self) -> int:
        return int(self.arrays[0].sum())

    def indexes(self, term: Term) -> list[int]:
        w = self.width
        return [h % w for h in self.hashes.hashes(term)]

    def update(self, term: Term, delta: int = 1) -> None:
        if delta < 1:
            raise ValueError(f"delta must be >= 1, got {delta}")
        for j, idx in enumerate(self.indexes(term)):
            self.arrays[j, idx] += np.uint64(delta)

    def _index_matrix(self, terms: Sequence[Term]) -> np.ndarray:
        idx = np.empty((self.n, len(terms)), dtype=np.int64)
        w = self.width
        family = self.hashes
        for col, term in enumerate(terms):
            idx[:, col] = [h % w for h in family.hashes(term)]
        return idx

    def update_counts(self, counts: Mapping[Term, int]) -> None:
        if not counts:
            return
        idx = self._index_matrix(list(counts))
        deltas = np.fromiter(counts.values(), dtype=np.uint64, count=len(counts))
        for j in range(self.n):
            np.add.at(self.arrays[j], idx[j], deltas)

    def update_many(self, terms: Iterable[Term]) -> None:
        self.update_counts(Counter(terms))

    def estimate(self, term: Term) -> int:
        arrays = self.arrays
        return int(min(arrays[j, idx] for j, idx in enumerate(self.indexes(term))))

    def estimate_many(self, terms: Sequence[Term]) -> np.ndarray:
        """Estimates for a batch of terms, hashing each one once."""
        if not len(terms):
            return np.zeros(0, dtype=np.uint64)
        idx = self._index_matrix(terms)
        rows = np.arange(self.n)[:, None]
        return self.arrays[rows, idx].min(axis=0)

    def copy(self) -> "CountMinSketch":
        other = CountMinSketch(self.hashes, self.width)
        other.arrays[...] = self.arrays
        return other


def cm_merge(sketches: Sequence[CountMinSketch]) -> CountMinSketch:
    """Elementwise sum of sketches sharing (n, width, seeds)."""
    if not sketches:
        raise ValueError("nothing to merge")
    first = sketches[0]
    for other in sketches[1:]:
        if other.hashes != first.hashes or other.width != first.width:
            raise ValueError("cannot merge Count-Min sketches with different shape or seeds")
    merged = CountMinSketch(first.hashes, first.width)
    for sk in sketches:
        merged.arrays += sk.arrays
    return merged


@dataclass
class MisraGries:
    """Classical Misra-Gries counter set holding at most ``k`` terms."""

    k: int
    counts: dict[Term, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"capacity must be positive, got {self.k}")

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, term: object) -> bool:
        return term in self.counts

    def update(self, term: Term) -> None:
        self.update_many((term,))

    def update_many(self, terms: Iterable[Term]) -> None:
        counts = self.counts
        k = self.k
        get = counts.get
        for t in terms:
            c = get(t)
            if c is not None:
                counts[t] = c + 1
            elif len(counts) < k:
                counts[t] = 1
            else:
                # decrement-all step; the incoming term is absorbed as well
                counts = {u: v - 1 for u, v in counts.items() if v > 1}
                get = counts.get
        self.counts = counts

    def items(self) -> list[tuple[Term, int]]:
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))


def mg_merge(summaries: Sequence[MisraGries], k: int | None = None) -> MisraGries:
    """Mergeable-summary combination of Misra-Gries counter sets.

    Counts are summed; if more than ``k`` terms remain, the (k+1)-th largest
    count is subtracted from every entry and non-positive entries dropped.
    """
    if not summaries and k is None:
        raise ValueError("nothing to merge")
    if k is None:
        k = summaries[0].k
    for s in summaries:
        if s.k != k:
            raise ValueError(f"capacity mismatch: {s.k} != {k}")
    total: Counter[Term] = Counter()
    for s in summaries:
        total.update(s.counts)
    if len(total) > k:
        cut = heapq.nlargest(k + 1, total.values())[-1]
        merged = {t: c - cut for t, c in total.items() if c > cut}
    else:
        merged = dict(total)
    return MisraGries(k, merged)


def cmmg_threshold(sketch: CountMinSketch, k: int) -> int:
    """k-th largest counter of the first array (0 when k == 0)."""
    if k > sketch.width:
        raise ValueError(f"k={k} exceeds sketch width {sketch.width}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return 0
    row = sketch.arrays[0]
    return int(np.partition(row, row.size - k)[row.size - k])


def cmmg_topk(summary: MisraGries, sketch: CountMinSketch, k: int) -> list[FrequencyEstimate]:
    """Candidates from the summary whose Count-Min estimate beats the threshold."""
    threshold = cmmg_threshold(sketch, k)
    out = []
    for term in summary.counts:
        est = sketch.estimate(term)
        if est > threshold:
            out.append(FrequencyEstimate(term, est))
    out.sort(key=rank_key)
    return out


@dataclass
class WorkerSketch:
    """Per-worker phase-one state: one Count-Min sketch and one summary."""

    cm: CountMinSketch
    mg: MisraGries

    @classmethod
    def empty(cls, hashes: HashFamily, width: int, k: int) -> "WorkerSketch":
        return cls(CountMinSketch(hashes, width), MisraGries(max(k, 1)))

    def consume(self, terms: Sequence[Term]) -> None:
        self.cm.update_many(terms)
        self.mg.update_many(terms)


@dataclass
class HybridSketchState:
    """Merged phase-two state of the hybrid top-k detector."""

    cm: CountMinSketch
    mg: MisraGries
    k: int

    @classmethod
    def merge(cls, workers: Sequence[WorkerSketch], k: int) -> "HybridSketchState":
        return cls(cm_merge([w.cm for w in workers]), mg_merge([w.mg for w in workers]), k)

    def topk(self) -> list[FrequencyEstimate]:
        return cmmg_topk(self.mg, self.cm, self.k)

    @property
    def threshold(self) -> int:
        return cmmg_threshold(self.cm, self.k)

    def save(self, fh: BinaryIO) -> None:
        write_sketch_state(fh, self)

    @classmethod
    def load(cls, fh: BinaryIO) -> "HybridSketchState":
        return read_sketch_state(fh)


def cmmg(
    partitions: Sequence[Sequence[Term]],
    k: int = DEFAULT_K,
    hashes: HashFamily | None = None,
    width: int = DEFAULT_WIDTH,
) -> list[FrequencyEstimate]:
    """Run the hybrid detector over pre-split occurrence streams, sequentially."""
    hashes = hashes or HashFamily.from_seed(0)
    workers = []
    for part in partitions:
        w = WorkerSketch.empty(hashes, width, k)
        w.consume(part)
        workers.append(w)
    return HybridSketchState.merge(workers, k).topk()


def exact_frequencies(triples: Iterable[Triple]) -> Counter[Term]:
    return Counter(iter_occurrences(triples))


def sample_frequencies(
    triples: Sequence[Triple], rate: float, seed: int = 0
) -> list[FrequencyEstimate]:
    """Bernoulli-sample triples at ``rate`` and scale the counts by ``1/rate``."""
    if not 0 < rate <= 1:
        raise ValueError(f"sampling rate must be in (0, 1], got {rate}")
    if rate == 1:
        chosen: Iterable[Triple] = triples
    else:
        keep = np.random.default_rng(seed).random(len(triples)) < rate
        chosen = (t for t, kept in zip(triples, keep) if kept)
    counts = Counter(iter_occurrences(chosen))
    out = [FrequencyEstimate(t, max(1, round(c / rate))) for t, c in counts.items()]
    out.sort(key=rank_key)
    return out


def countmin_topk(cm: CountMinSketch, candidates: Iterable[Term], k: int) -> list[FrequencyEstimate]:
    """Second-scan Count-Min top-k: estimate every distinct term, keep the k best."""
    distinct = list(set(candidates))
    est = (FrequencyEstimate(t, int(e)) for t, e in zip(distinct, cm.estimate_many(distinct)))
    return heapq.nsmallest(k, est, key=rank_key)


def misragries_topk(summary: MisraGries, k: int) -> list[FrequencyEstimate]:
    """Summary counts used directly as estimates."""
    return [FrequencyEstimate(t, c) for t, c in summary.items()[:k]]


# -- binary state file --------------------------------------------------------

SKETCH_MAGIC = b"KGSK"
SKETCH_VERSION = 1
_HEADER = struct.Struct("<4sHIQI")  # magic, version, n, width, k


def write_sketch_state(fh: BinaryIO, state: HybridSketchState) -> None:
    cm = state.cm
    fh.write(_HEADER.pack(SKETCH_MAGIC, SKETCH_VERSION, cm.n, cm.width, state.k))
    fh.write(struct.pack(f"<{cm.n}Q", *cm.hashes.seeds))
    fh.write(cm.arrays.astype("<u8", copy=False).tobytes())
    entries = state.mg.items()
    fh.write(struct.pack("<IQ", state.mg.k, len(entries)))
    for term, count in entries:
        raw = term.lexical.encode("utf-8")
        fh.write(struct.pack("<BIQ", term.kind, len(raw), count))
        fh.write(raw)


def _read_exact(fh: BinaryIO, size: int) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise ValueError("truncated sketch file")
    return data


def read_sketch_state(fh: BinaryIO) -> HybridSketchState:
    magic, version, n, width, k = _HEADER.unpack(_read_exact(fh, _HEADER.size))
    if magic != SKETCH_MAGIC:
        raise ValueError("not a sketch state file")
    if version != SKETCH_VERSION:
        raise ValueError(f"unsupported sketch file version {version}")
    seeds = struct.unpack(f"<{n}Q", _read_exact(fh, 8 * n))
    cm = CountMinSketch(HashFamily(seeds), width)
    cm.arrays[...] = np.frombuffer(_read_exact(fh, 8 * n * width), dtype="<u8").reshape(n, width)
    mg_k, n_entries = struct.unpack("<IQ", _read_exact(fh, 12))
    counts = {}
    for _ in range(n_entries):
        kind, size, count = struct.unpack("<BIQ", _read_exact(fh, 13))
        counts[Term(_read_exact(fh, size).decode("utf-8"), TermKind(kind))] = count
    return HybridSketchState(cm, MisraGries(mg_k, counts), k)
