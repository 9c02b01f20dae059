"""Class taxonomy: schema collection, spanning-tree extraction and post-order IDs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import networkx as nx

from .ingest import (
    RDF_TYPE,
    RDFS_CLASS,
    RDFS_DOMAIN,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    Term,
    TermKind,
    Triple,
)

logger = logging.getLogger(__name__)


@dataclass
class SchemaIndex:
    """Everything the encoder needs to know about classes, from one pass.

    A predicate may declare several domains or ranges; all of them are kept.
    Classes that are not IRIs (literals, blank-node restrictions) are ignored
    and only counted.
    """

    subclass_edges: set[tuple[Term, Term]] = field(default_factory=set)
    domain_of: dict[Term, set[Term]] = field(default_factory=dict)
    range_of: dict[Term, set[Term]] = field(default_factory=dict)
    mentioned_classes: set[Term] = field(default_factory=set)
    ignored_non_iri: int = 0

    def add(self, triple: Triple) -> None:
        s, p, o = triple
        if p == RDF_TYPE:
            self._mention(o)
        elif p == RDFS_SUBCLASSOF:
            # either side stays a class even if the other one is ignored
            if self._mention(s) & self._mention(o):
                self.subclass_edges.add((s, o))
        elif p == RDFS_DOMAIN:
            if self._mention(o):
                self.domain_of.setdefault(s, set()).add(o)
        elif p == RDFS_RANGE:
            if self._mention(o):
                self.range_of.setdefault(s, set()).add(o)

    def _mention(self, cls: Term) -> bool:
        if cls.kind is not TermKind.IRI:
            self.ignored_non_iri += 1
            return False
        self.mentioned_classes.add(cls)
        return True

    def update(self, other: "SchemaIndex") -> None:
        """Union in a partial index built by another worker."""
        self.subclass_edges |= other.subclass_edges
        for mine, theirs in ((self.domain_of, other.domain_of), (self.range_of, other.range_of)):
            for pred, classes in theirs.items():
                mine.setdefault(pred, set()).update(classes)
        self.mentioned_classes |= other.mentioned_classes
        self.ignored_non_iri += other.ignored_non_iri


def collect_schema(triples: Iterable[Triple]) -> SchemaIndex:
    schema = SchemaIndex()
    add = schema.add
    for t in triples:
        add(t)
    if schema.ignored_non_iri:
        logger.info("ignored %d non-IRI class mentions", schema.ignored_non_iri)
    return schema


@dataclass
class ClassTaxonomy:
    root: Term
    parent: dict[Term, Term | None]
    children: dict[Term, list[Term]]
    class_ids: dict[Term, int] = field(default_factory=dict)
    fallback_edges: int = 0
    dropped_edges: int = 0

    @property
    def classes(self) -> list[Term]:
        return sorted(self.parent)

    @property
    def MAX(self) -> int:
        return len(self.parent)

    def __len__(self) -> int:
        return len(self.parent)

    def __contains__(self, cls: object) -> bool:
        return cls in self.parent

    def class_id(self, cls: Term) -> int:
        return self.class_ids.get(cls, len(self.parent))

    def subtree(self, cls: Term) -> list[Term]:
        out, stack = [], [cls]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(self.children.get(node, ()))
        return out

    def dump(self, fh: TextIO) -> None:
        """Write ``classID<TAB>parentID<TAB>classIRI`` lines; the root's parent is -1."""
        for cls, cid in sorted(self.class_ids.items(), key=lambda kv: kv[1]):
            par = self.parent[cls]
            pid = -1 if par is None else self.class_ids[par]
            fh.write(f"{cid}\t{pid}\t{cls.lexical}\n")


def _dfs_attach(start: Term, children: dict[Term, list[Term]], parent: dict[Term, Term | None]) -> int:
    """Preorder DFS over subclass edges, attaching each newly reached class.

    Returns the number of edges not used because their target was already
    in the tree (back, forward and cross edges).
    """
    dropped = 0
    stack = [(start, iter(children.get(start, ())))]
    while stack:
        node, it = stack[-1]
        for child in it:
            if child in parent:
                dropped += 1
                continue
            parent[child] = node
            stack.append((child, iter(children.get(child, ()))))
            break
        else:
            stack.pop()
    return dropped


def build_taxonomy(schema: SchemaIndex, root: Term = RDFS_CLASS) -> ClassTaxonomy:
    """Extract a spanning tree rooted at ``root`` keeping as many subclass edges as possible.

    Every class also has an implicit fallback edge to the root. A class uses
    its fallback edge only when no tree path of subclass edges can reach it:
    first the root's explicit subclasses are explored, then one start class
    per source strongly connected component of the remaining graph (its
    lexically smallest member) is hung from the root. Every other class is
    reached through a subclass edge, so the number of fallback edges equals
    the number of source components, which is the minimum possible.
    Children are always explored in lexical order.
    """
    vertices = set(schema.mentioned_classes) | {root}
    children: dict[Term, list[Term]] = {}
    for sub, sup in schema.subclass_edges:
        if sub == sup or sub == root:
            continue
        children.setdefault(sup, []).append(sub)
    for kids in children.values():
        kids.sort()

    parent: dict[Term, Term | None] = {root: None}
    dropped = _dfs_attach(root, children, parent)

    rest = vertices - parent.keys()
    graph = nx.DiGraph()
    graph.add_nodes_from(rest)
    graph.add_edges_from((sup, sub) for sup, kids in children.items() if sup in rest for sub in kids)
    cond = nx.condensation(graph)
    starts = sorted(
        min(cond.nodes[c]["members"]) for c in cond.nodes if cond.in_degree(c) == 0
    )
    for start in starts:
        parent[start] = root
        dropped += _dfs_attach(start, children, parent)
    assert parent.keys() == vertices

    tree_children: dict[Term, list[Term]] = {}
    for cls, par in parent.items():
        if par is not None:
            tree_children.setdefault(par, []).append(cls)
    for kids in tree_children.values():
        kids.sort()

    tax = ClassTaxonomy(root, parent, tree_children, fallback_edges=len(starts), dropped_edges=dropped)
    logger.debug(
        "taxonomy: %d classes, %d fallback edges, %d subclass edges dropped",
        len(parent), len(starts), dropped,
    )
    return tax


def assign_class_ids(tax: ClassTaxonomy) -> ClassTaxonomy:
    """Number classes in post-order, children in lexical order; the root comes last."""
    ids: dict[Term, int] = {}
    stack = [(tax.root, iter(tax.children.get(tax.root, ())))]
    while stack:
        node, it = stack[-1]
        child = next(it, None)
        if child is None:
            ids[node] = len(ids)
            stack.pop()
        else:
            stack.append((child, iter(tax.children.get(child, ()))))
    tax.class_ids = ids
    return tax


def taxonomy_from_triples(triples: Iterable[Triple]) -> tuple[SchemaIndex, ClassTaxonomy]:
    schema = collect_schema(triples)
    return schema, assign_class_ids(build_taxonomy(schema))
