from __future__ import annotations

import pytest

from kgencode.ingest import RDF_TYPE, Term, Triple

EX = "http://x/"

ACCEPTANCE_LINES: list[str] = []


def iri(name: str) -> Term:
    return Term.iri(EX + name)


def toy_triples() -> list[Triple]:
    """Five triples, one class (Person), one term frequent enough to pass k=3."""
    knows = iri("knows")
    return [
        Triple(iri("alice"), RDF_TYPE, iri("Person")),
        Triple(iri("bob"), RDF_TYPE, iri("Person")),
        Triple(iri("alice"), knows, iri("bob")),
        Triple(iri("carol"), knows, iri("dave")),
        Triple(iri("eve"), knows, Term.literal('"x"')),
    ]


# Worked by hand: knows (3 occurrences) is the only estimate above the k=3
# threshold of 2. Person gets class id 0, so alice and bob come next; the rest
# are class-less and follow in lexical order ("x" < http://www.w3... < http://x/...).
TOY_EXPECTED = [
    (0, Term.iri(EX + "knows")),
    (1, Term.iri(EX + "alice")),
    (2, Term.iri(EX + "bob")),
    (3, Term.literal('"x"')),
    (4, RDF_TYPE),
    (5, Term.iri(EX + "Person")),
    (6, Term.iri(EX + "carol")),
    (7, Term.iri(EX + "dave")),
    (8, Term.iri(EX + "eve")),
]


@pytest.fixture
def toy():
    return toy_triples()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
