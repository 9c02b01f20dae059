"""Deterministic synthetic knowledge graphs with skewed term frequencies.

The generated graph has

* a class taxonomy (``rdfs:subClassOf``) of bounded depth,
* properties with ``rdfs:domain`` and, for object properties, ``rdfs:range``,
* one ``rdf:type`` statement per entity, class sizes following the Zipf law,
* data statements whose predicates and object values follow the Zipf law.

Statements are emitted schema first, then grouped by subject in a shuffled
entity order, the way most dumps are laid out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, TextIO

import numpy as np

from .analysis import zipf_frequencies
from .ingest import (
    RDF_TYPE,
    RDFS_DOMAIN,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    Term,
    Triple,
)

ONTO = "http://example.org/onto#"
DATA = "http://example.org/data/"


@dataclass
class GenSpec:
    n_distinct: int = 10_000
    s: float = 2.0
    F: int = 30_000
    classes: int = 10
    seed: int = 0
    depth: int = 3
    predicates: int = 16
    law: str = "geometric"


def _class_tree(n: int, depth: int, rng: np.random.Generator) -> list[int]:
    """Parent index per class (-1 for top-level), at most ``depth`` levels."""
    if n == 0:
        return []
    depth = max(1, depth)
    # level sizes grow geometrically so deeper levels hold more classes
    ratio = max(n, 2) ** (1.0 / depth)
    sizes, left = [], n
    for lvl in range(depth):
        size = left if lvl == depth - 1 else min(left, max(1, round(ratio ** (lvl + 1) - ratio ** lvl)))
        sizes.append(size)
        left -= size
        if left == 0:
            break
    parents: list[int] = []
    start_prev, start = 0, 0
    for lvl, size in enumerate(sizes):
        for _ in range(size):
            parents.append(-1 if lvl == 0 else int(rng.integers(start_prev, start)))
        start_prev, start = start, start + size
    return parents


def generate(spec: GenSpec) -> Iterator[Triple]:
    rng = np.random.default_rng(spec.seed)
    n_triples = max(0, round(spec.F / 3))
    classes = [Term.iri(f"{ONTO}C{rng.integers(16**6):06x}_{i}") for i in range(spec.classes)]
    props = [Term.iri(f"{ONTO}p{j}") for j in range(spec.predicates)]

    schema: list[Triple] = []
    parents = _class_tree(len(classes), spec.depth, rng)
    for i, par in enumerate(parents):
        if par >= 0:
            schema.append(Triple(classes[i], RDFS_SUBCLASSOF, classes[par]))
    # even-numbered properties link entities, odd-numbered ones carry literals
    domain = [int(rng.integers(len(classes))) if classes else -1 for _ in props]
    range_ = [int(rng.integers(len(classes))) if classes and j % 2 == 0 else -1 for j in range(len(props))]
    for j, p in enumerate(props):
        if domain[j] >= 0:
            schema.append(Triple(p, RDFS_DOMAIN, classes[domain[j]]))
        if range_[j] >= 0:
            schema.append(Triple(p, RDFS_RANGE, classes[range_[j]]))
    schema = schema[:n_triples]

    budget = n_triples - len(schema)
    schema_terms = len(classes) + len(props) + 3
    n_entities = max(1, min(max(spec.n_distinct - schema_terms, 2) // 2, budget // 2 if classes else budget))
    n_type = n_entities if classes else 0
    n_data = max(0, budget - n_type)
    n_literals = max(1, min(spec.n_distinct - schema_terms - n_entities, n_data))

    entity_class = np.zeros(n_entities, dtype=np.int64)
    if classes:
        sizes = zipf_frequencies(len(classes), spec.s, n_entities, spec.law)
        order = rng.permutation(len(classes))
        entity_class = np.repeat(order, sizes)[:n_entities]
        rng.shuffle(entity_class)

    pred_counts = zipf_frequencies(len(props), spec.s, n_data, spec.law) if n_data >= len(props) else [1] * n_data
    pred_seq = np.repeat(np.arange(len(pred_counts)), pred_counts)[:n_data]
    rng.shuffle(pred_seq)
    is_object = (pred_seq % 2 == 0) if classes else np.zeros(n_data, dtype=bool)
    n_obj = int(is_object.sum())

    def zipf_values(pool: int, slots: int) -> np.ndarray:
        if slots == 0:
            return np.zeros(0, dtype=np.int64)
        counts = zipf_frequencies(min(pool, slots), spec.s, slots, spec.law)
        ranked = rng.permutation(pool)[: len(counts)]
        seq = np.repeat(ranked, counts)
        rng.shuffle(seq)
        return seq

    obj_entities = zipf_values(n_entities, n_obj)
    obj_literals = zipf_values(n_literals, n_data - n_obj)

    members: dict[int, np.ndarray] = {}
    if classes:
        order = np.argsort(entity_class, kind="stable")
        bounds = np.searchsorted(entity_class[order], np.arange(len(classes) + 1))
        members = {c: order[bounds[c]:bounds[c + 1]] for c in range(len(classes))}
    subjects = np.empty(n_data, dtype=np.int64)
    for j in range(len(props)):
        slots = np.flatnonzero(pred_seq == j)
        pool = members.get(domain[j]) if classes else None
        if pool is None or pool.size == 0:
            subjects[slots] = rng.integers(n_entities, size=slots.size)
        else:
            subjects[slots] = pool[rng.integers(pool.size, size=slots.size)]

    yield from schema
    ent = [Term.iri(f"{DATA}e{i}") for i in range(n_entities)]
    by_subject = np.argsort(subjects, kind="stable")
    sub_sorted = subjects[by_subject]
    obj_pos = np.cumsum(is_object) - 1
    lit_pos = np.cumsum(~is_object) - 1
    emitted = 0
    for e in rng.permutation(n_entities):
        if classes:
            yield Triple(ent[e], RDF_TYPE, classes[entity_class[e]])
        lo, hi = np.searchsorted(sub_sorted, [e, e + 1])
        for slot in by_subject[lo:hi]:
            j = pred_seq[slot]
            if is_object[slot]:
                obj = ent[obj_entities[obj_pos[slot]]]
            else:
                obj = _literal(int(obj_literals[lit_pos[slot]]))
            yield Triple(ent[e], props[j], obj)
            emitted += 1
    assert emitted == n_data


def _literal(i: int) -> Term:
    if i % 3 == 0:
        return Term.literal(f'"value {i}"@en')
    if i % 3 == 1:
        return Term.literal(f'"{i}"^^<http://www.w3.org/2001/XMLSchema#integer>')
    return Term.literal(f'"v{i}"')


def write_ntriples(spec: GenSpec, fh: TextIO) -> int:
    count = 0
    for t in generate(spec):
        fh.write(t.to_ntriples())
        fh.write("\n")
        count += 1
    return count

