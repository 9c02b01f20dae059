import io
import itertools

from hypothesis import given, settings, strategies as st

from kgencode.ingest import (
    RDF_TYPE,
    RDFS_CLASS,
    RDFS_DOMAIN,
    RDFS_RANGE,
    RDFS_SUBCLASSOF as SUB,
    Term,
    Triple,
)
from kgencode.taxonomy import SchemaIndex, assign_class_ids, build_taxonomy, collect_schema, taxonomy_from_triples

A, A1, B, C, D = (Term.iri(n) for n in ("A", "A1", "B", "C", "D"))
x, p = Term.iri("x"), Term.iri("p")


def tax_of(triples):
    return taxonomy_from_triples(triples)[1]


def test_collect_schema_examples():
    s = collect_schema([Triple(A, SUB, B)])
    assert s.subclass_edges == {(A, B)} and s.mentioned_classes == {A, B}

    s = collect_schema([Triple(x, RDF_TYPE, C)])
    assert s.mentioned_classes == {C} and not s.subclass_edges

    s = collect_schema([Triple(p, RDFS_DOMAIN, C), Triple(p, RDFS_RANGE, D)])
    assert s.domain_of == {p: {C}} and s.range_of == {p: {D}}
    assert s.mentioned_classes == {C, D}


def test_non_iri_classes_ignored_and_counted():
    s = collect_schema([Triple(x, RDF_TYPE, Term.literal('"C"')), Triple(A, SUB, Term.bnode("_:b"))])
    assert s.mentioned_classes == {A}
    assert s.ignored_non_iri == 2


def test_build_examples():
    t = tax_of([Triple(A, SUB, B)])
    assert t.parent[A] == B and t.parent[B] == RDFS_CLASS
    assert t.fallback_edges == 1

    t = tax_of([Triple(A, SUB, B), Triple(B, SUB, A)])
    assert t.parent[A] == RDFS_CLASS and t.parent[B] == A
    assert t.dropped_edges == 1

    t = tax_of([Triple(x, RDF_TYPE, C), Triple(x, RDF_TYPE, D)])
    assert t.parent[C] == t.parent[D] == RDFS_CLASS


def test_class_id_examples():
    t = tax_of([Triple(A1, SUB, A), Triple(x, RDF_TYPE, B), Triple(A, SUB, RDFS_CLASS)])
    assert t.class_ids == {A1: 0, A: 1, B: 2, RDFS_CLASS: 3}
    assert t.MAX == 4
    assert t.class_id(Term.iri("nope")) == 4
    assert t.class_id(RDFS_CLASS) == len(t) - 1

    t = tax_of([Triple(x, RDF_TYPE, C)])
    assert t.class_ids == {C: 0, RDFS_CLASS: 1} and t.MAX == 2

    t = tax_of([])
    assert t.class_ids == {RDFS_CLASS: 0} and t.MAX == 1


def test_dump_format():
    t = tax_of([Triple(A, SUB, B)])
    buf = io.StringIO()
    t.dump(buf)
    assert buf.getvalue().splitlines() == [
        "0\t1\tA",
        "1\t2\tB",
        f"2\t-1\t{RDFS_CLASS.lexical}",
    ]


# -- random graphs -------------------------------------------------------

names = [Term.iri(f"c{i}") for i in range(6)]
edges_st = st.lists(st.tuples(st.sampled_from(names), st.sampled_from(names + [RDFS_CLASS])), max_size=12)


def _schema(edges, extra=()):
    s = SchemaIndex()
    for sub, sup in edges:
        s.add(Triple(sub, SUB, sup))
    for c in extra:
        s.add(Triple(x, RDF_TYPE, c))
    return s


def best_original_edges(vertices, edges):
    """Exhaustive oracle: max number of subclass edges usable in a spanning tree."""
    supers = {v: sorted({sup for sub, sup in edges if sub == v and sup != v}) for v in vertices}
    best = 0
    for choice in itertools.product(*[[None] + supers[v] for v in vertices]):
        parent = dict(zip(vertices, choice))
        ok = True
        for v in vertices:
            seen, u = set(), v
            while u is not None and u != RDFS_CLASS:
                if u in seen:
                    ok = False
                    break
                seen.add(u)
                u = parent[u]
            if not ok:
                break
        if ok:
            best = max(best, sum(c is not None for c in choice))
    return best


@settings(max_examples=150, deadline=None)
@given(edges_st, st.sets(st.sampled_from(names), max_size=3))
def test_spanning_tree_is_valid_and_maximal(edges, extra):
    schema = _schema(edges, extra)
    tax = assign_class_ids(build_taxonomy(schema))
    vertices = sorted(schema.mentioned_classes - {RDFS_CLASS})
    assert set(tax.parent) == set(vertices) | {RDFS_CLASS}
    original = set(schema.subclass_edges)
    used = 0
    for v in vertices:
        par = tax.parent[v]
        assert par is not None
        if (v, par) in original:
            used += 1
        else:
            assert par == RDFS_CLASS
        # reaches the root without cycling
        seen, u = set(), v
        while u != RDFS_CLASS:
            assert u not in seen
            seen.add(u)
            u = tax.parent[u]
    assert used == best_original_edges(vertices, original)
    assert tax.fallback_edges == len(vertices) - used


@settings(max_examples=150, deadline=None)
@given(edges_st, st.sets(st.sampled_from(names), max_size=3))
def test_post_order_contiguity_and_sibling_adjacency(edges, extra):
    tax = assign_class_ids(build_taxonomy(_schema(edges, extra)))
    ids = tax.class_ids
    assert sorted(ids.values()) == list(range(len(tax)))
    assert ids[RDFS_CLASS] == len(tax) - 1 < tax.MAX
    for cls in tax.parent:
        sub_ids = sorted(ids[c] for c in tax.subtree(cls))
        assert sub_ids == list(range(sub_ids[0], ids[cls] + 1))
        kids = tax.children.get(cls, [])
        assert kids == sorted(kids)
        for k1, k2 in zip(kids, kids[1:]):
            assert max(ids[c] for c in tax.subtree(k1)) + 1 == min(ids[c] for c in tax.subtree(k2))


@given(edges_st)
def test_deterministic_under_input_order(edges):
    t1 = assign_class_ids(build_taxonomy(_schema(edges)))
    t2 = assign_class_ids(build_taxonomy(_schema(list(reversed(edges)))))
    assert t1.class_ids == t2.class_ids and t1.parent == t2.parent
