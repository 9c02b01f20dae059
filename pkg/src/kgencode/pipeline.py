"""End-to-end encoding: frequent terms first, then taxonomy-ordered infrequent terms.

Pass 1 counts occurrences (hybrid sketch) and collects the schema, one task
per partition. Pass 2 annotates terms with their smallest class ID, again per
partition. The final numbering and the rewrite into ID triples are
sequential.

Partitions are the unit of determinism: for a fixed ``partitions`` value the
dictionary is identical whatever the number of worker processes, because the
per-partition states are merged in partition order.
"""

from __future__ import annotations

import logging
import multiprocessing
import os
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .dictionary import Dictionary
from .fbe import FrequentDictionary, build_frequent_dictionary
from .ingest import Term, TermKind, Triple, iter_occurrences
from .lbe import Annotation, assign_infrequent_ids, merge_min_class_maps, min_class_map
from .sketches import (
    DEFAULT_HASHES,
    DEFAULT_K,
    DEFAULT_WIDTH,
    FrequencyEstimate,
    HashFamily,
    HybridSketchState,
    WorkerSketch,
    countmin_topk,
    exact_frequencies,
    misragries_topk,
    rank_key,
    sample_frequencies,
)
from .taxonomy import ClassTaxonomy, SchemaIndex, assign_class_ids, build_taxonomy

logger = logging.getLogger(__name__)

FREQ_METHODS = ("cmmg", "countmin", "misragries", "sample", "exact")


def physical_cores() -> int:
    try:
        import psutil

        n = psutil.cpu_count(logical=False)
    except Exception:  # pragma: no cover - psutil missing or unsupported platform
        n = None
    return n or os.cpu_count() or 1


@dataclass
class Config:
    k: int = DEFAULT_K
    n_hash: int = DEFAULT_HASHES
    width: int = DEFAULT_WIDTH
    workers: int = field(default_factory=physical_cores)
    partitions: int | None = None
    seed: int = 0
    freq_method: str = "cmmg"
    sample_rate: float = 0.05

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.n_hash < 1:
            raise ValueError("need at least one hash function")
        if self.width < max(self.k, 1):
            raise ValueError("width must be >= k")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.partitions is not None and self.partitions < 1:
            raise ValueError("partitions must be >= 1")
        if self.freq_method not in FREQ_METHODS:
            raise ValueError(f"unknown frequency method {self.freq_method!r}")

    @property
    def n_partitions(self) -> int:
        return self.partitions or self.workers

    def hash_family(self) -> HashFamily:
        return HashFamily.from_seed(self.seed, self.n_hash)


class ConsistencyError(RuntimeError):
    """A term reached the rewrite step without an ID."""


class UnknownIdError(KeyError):
    def __init__(self, tid: int):
        self.tid = tid
        super().__init__(f"unknown id {tid}")


@dataclass
class EncodeResult:
    dictionary: Dictionary
    ids: np.ndarray
    frequent: FrequentDictionary
    taxonomy: ClassTaxonomy
    schema: SchemaIndex
    sketch: HybridSketchState | None
    stats: dict[str, Any]


# Globals inherited by forked workers, so partitions are never pickled.
_SHARED: dict[str, Any] = {}


def _forks(n_parts: int, workers: int) -> bool:
    return min(workers, n_parts) > 1 and "fork" in multiprocessing.get_all_start_methods()


def _run_partitions(func: Callable[[int], Any], n_parts: int, workers: int) -> list[Any]:
    if not _forks(n_parts, workers):
        return [func(r) for r in range(n_parts)]
    with multiprocessing.get_context("fork").Pool(min(workers, n_parts)) as pool:
        return pool.map(func, range(n_parts), chunksize=1)


def _partition(r: int) -> Sequence[Triple]:
    triples = _SHARED["triples"]
    return triples[r :: _SHARED["n_parts"]]


def _count_partition(r: int) -> tuple[WorkerSketch | None, SchemaIndex]:
    cfg: Config = _SHARED["config"]
    part = _partition(r)
    schema = SchemaIndex()
    add = schema.add
    for t in part:
        add(t)
    sketch = None
    if cfg.freq_method in ("cmmg", "countmin", "misragries"):
        sketch = WorkerSketch.empty(_SHARED["hashes"], cfg.width, cfg.k)
        sketch.consume(list(iter_occurrences(part)))
    return sketch, schema


def _annotate_partition(r: int) -> dict[Term, int]:
    return min_class_map(_partition(r), _SHARED["taxonomy"], _SHARED["schema"], _SHARED["frequent"])


def _annotate_partition_packed(r: int) -> tuple[list[str], bytes, np.ndarray]:
    # Term keys pickle slowly (one enum reduce per term); columns are ~20x cheaper
    found = _annotate_partition(r)
    return (
        [t.lexical for t in found],
        bytes(t.kind for t in found),
        np.fromiter(found.values(), dtype=np.int64, count=len(found)),
    )


def _merge_packed(parts: Sequence[tuple[list[str], bytes, np.ndarray]]) -> dict[Term, int]:
    kinds = list(TermKind)
    merged: dict[Term, int] = {}
    get = merged.get
    for lexicals, kind_bytes, classes in parts:
        for lex, kind, c in zip(lexicals, kind_bytes, classes.tolist()):
            term = Term(lex, kinds[kind])
            prev = get(term)
            if prev is None or c < prev:
                merged[term] = c
    return merged


def frequency_estimates(
    triples: Sequence[Triple], config: Config, sketches: Sequence[WorkerSketch | None]
) -> tuple[list[FrequencyEstimate], HybridSketchState | None]:
    method = config.freq_method
    if method == "exact":
        counts = exact_frequencies(triples)
        return sorted((FrequencyEstimate(t, c) for t, c in counts.items()), key=rank_key), None
    if method == "sample":
        return sample_frequencies(triples, config.sample_rate, config.seed), None
    state = HybridSketchState.merge([s for s in sketches if s is not None], config.k)
    if method == "cmmg":
        return state.topk(), state
    if method == "countmin":
        return countmin_topk(state.cm, iter_occurrences(triples), config.k), state
    return misragries_topk(state.mg, config.k), state


def count_partitions(
    triples: Sequence[Triple], config: Config
) -> tuple[list[WorkerSketch | None], SchemaIndex]:
    """Pass 1 on its own: per-partition sketches and the merged schema."""
    _SHARED.clear()
    _SHARED.update(triples=triples, n_parts=config.n_partitions, config=config, hashes=config.hash_family())
    try:
        results = _run_partitions(_count_partition, config.n_partitions, config.workers)
    finally:
        _SHARED.clear()
    schema = SchemaIndex()
    for _, part_schema in results:
        schema.update(part_schema)
    return [sk for sk, _ in results], schema


def encode(triples: Sequence[Triple], config: Config | None = None) -> EncodeResult:
    """Build the dictionary for ``triples`` and rewrite them as ID triples."""
    config = config or Config()
    triples = triples if isinstance(triples, (list, tuple)) else list(triples)
    n_parts = config.n_partitions
    stats: dict[str, Any] = {
        "triples": len(triples),
        "partitions": n_parts,
        "workers": min(config.workers, n_parts),
        "freq_method": config.freq_method,
    }

    t0 = time.perf_counter()
    sketches, schema = count_partitions(triples, config)
    estimates, state = frequency_estimates(triples, config, sketches)
    del sketches
    frequent = build_frequent_dictionary(estimates, config.k)
    taxonomy = assign_class_ids(build_taxonomy(schema))
    t1 = time.perf_counter()

    _SHARED.update(triples=triples, n_parts=n_parts, taxonomy=taxonomy, schema=schema, frequent=frequent.terms)
    try:
        if _forks(n_parts, config.workers):
            reduced = _merge_packed(_run_partitions(_annotate_partition_packed, n_parts, config.workers))
        else:
            reduced = merge_min_class_maps(_run_partitions(_annotate_partition, n_parts, config.workers))
        infrequent = assign_infrequent_ids(
            (Annotation(t, c) for t, c in reduced.items()), frequent.next_id
        )
        t2 = time.perf_counter()
    finally:
        _SHARED.clear()

    dictionary = Dictionary(list(frequent.entries) + list(infrequent.items()), n_frequent=len(frequent))
    ids = rewrite(triples, dictionary)
    t3 = time.perf_counter()

    stats.update(
        pass1_seconds=round(t1 - t0, 6),
        pass2_seconds=round(t2 - t1, 6),
        rewrite_seconds=round(t3 - t2, 6),
        frequent_terms=len(frequent),
        infrequent_terms=len(infrequent),
        classes=len(taxonomy),
        fallback_edges=taxonomy.fallback_edges,
        dropped_subclass_edges=taxonomy.dropped_edges,
        ignored_non_iri_classes=schema.ignored_non_iri,
        threshold=state.threshold if state is not None and config.freq_method == "cmmg" else None,
    )
    logger.info("encoded %d triples: |D1|=%d |D2|=%d", len(triples), len(frequent), len(infrequent))
    return EncodeResult(dictionary, ids, frequent, taxonomy, schema, state, stats)


def rewrite(triples: Sequence[Triple], dictionary: Dictionary) -> np.ndarray:
    lookup = dictionary.term_to_id
    try:
        flat = [lookup[t] for t in iter_occurrences(triples)]
    except KeyError as exc:
        raise ConsistencyError(f"term without id: {exc.args[0]!r}") from None
    return np.array(flat, dtype=np.uint64).reshape(-1, 3)


def decode(ids: np.ndarray, dictionary: Dictionary) -> list[Triple]:
    lookup = dictionary.id_to_term
    out = []
    for s, p, o in np.asarray(ids, dtype=np.uint64).reshape(-1, 3).tolist():
        try:
            out.append(Triple(lookup[s], lookup[p], lookup[o]))
        except KeyError as exc:
            raise UnknownIdError(exc.args[0]) from None
    return out
