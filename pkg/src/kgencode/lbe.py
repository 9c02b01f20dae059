"""Locality-based encoding of the infrequent terms.

Each term is annotated with the smallest class ID it can be tied to, through
``rdf:type`` or through the domain/range of the predicates it occurs with.
Terms are then numbered by (class ID, lexical form), continuing after the
frequent IDs, so instances of one class land in one contiguous ID range.
"""

from __future__ import annotations

from typing import Collection, Iterable, Mapping, NamedTuple

from .ingest import RDF_TYPE, Term, Triple
from .taxonomy import ClassTaxonomy, SchemaIndex


class Annotation(NamedTuple):
    term: Term
    class_id: int


def annotate(triples: Iterable[Triple], taxonomy: ClassTaxonomy, schema: SchemaIndex) -> list[Annotation]:
    """Emit the annotation multiset, one triple at a time."""
    MAX = taxonomy.MAX
    cid = taxonomy.class_id
    out: list[Annotation] = []
    add = out.append
    for s, p, o in triples:
        add(Annotation(s, MAX))
        add(Annotation(p, MAX))
        add(Annotation(o, MAX))
        if p == RDF_TYPE:
            add(Annotation(s, cid(o)))
        for c in sorted(schema.domain_of.get(p, ())):
            add(Annotation(s, cid(c)))
        for c in sorted(schema.range_of.get(p, ())):
            add(Annotation(o, cid(c)))
    return out


def filter_frequent(annotations: Iterable[Annotation], frequent: Collection[Term]) -> list[Annotation]:
    return [a for a in annotations if a.term not in frequent]


def reduce_min_class(annotations: Iterable[Annotation]) -> list[Annotation]:
    best: dict[Term, int] = {}
    for term, c in annotations:
        prev = best.get(term)
        if prev is None or c < prev:
            best[term] = c
    return [Annotation(t, c) for t, c in best.items()]


def assign_infrequent_ids(reduced: Iterable[Annotation], start_id: int) -> dict[Term, int]:
    """Sort by (class ID, term) and number consecutively from ``start_id``."""
    reduced = list(reduced)
    if len({a.term for a in reduced}) != len(reduced):
        raise ValueError("duplicate terms in annotations; run reduce_min_class first")
    reduced.sort(key=lambda a: (a.class_id, a.term))
    return {a.term: start_id + i for i, a in enumerate(reduced)}


def min_class_map(
    triples: Iterable[Triple],
    taxonomy: ClassTaxonomy,
    schema: SchemaIndex,
    frequent: Collection[Term] = (),
) -> dict[Term, int]:
    """annotate + filter_frequent + reduce_min_class in a single pass.

    Returns term -> minimum class ID without materializing the multiset.
    """
    MAX = taxonomy.MAX
    ids = taxonomy.class_ids
    dom = _min_class_per_predicate(schema.domain_of, taxonomy)
    rng = _min_class_per_predicate(schema.range_of, taxonomy)
    best: dict[Term, int] = {}
    get = best.get
    for s, p, o in triples:
        s_c = o_c = MAX
        if p == RDF_TYPE:
            s_c = ids.get(o, MAX)
        d = dom.get(p)
        if d is not None and d < s_c:
            s_c = d
        r = rng.get(p)
        if r is not None:
            o_c = r
        prev = get(s, MAX)
        if s_c < prev or s not in best:
            best[s] = min(s_c, prev)
        if p not in best:
            best[p] = MAX
        prev = get(o, MAX)
        if o_c < prev or o not in best:
            best[o] = min(o_c, prev)
    if frequent:
        for t in frequent:
            best.pop(t, None)
    return best


def merge_min_class_maps(maps: Iterable[Mapping[Term, int]]) -> dict[Term, int]:
    out: dict[Term, int] = {}
    for m in maps:
        for t, c in m.items():
            prev = out.get(t)
            if prev is None or c < prev:
                out[t] = c
    return out


def _min_class_per_predicate(decl: Mapping[Term, set[Term]], taxonomy: ClassTaxonomy) -> dict[Term, int]:
    return {p: min(taxonomy.class_id(c) for c in classes) for p, classes in decl.items() if classes}
