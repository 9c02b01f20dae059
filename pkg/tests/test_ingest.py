import gzip
import io
import random

import pytest
from hypothesis import given, strategies as st

from kgencode.ingest import (
    NTriplesParser,
    ParseError,
    Term,
    TermKind,
    Triple,
    iter_occurrences,
    parse_ntriples,
    partition,
    serialize_ntriples,
    term_occurrences,
)


def parse(text: str, policy="abort"):
    return list(parse_ntriples(text.encode(), policy))


def test_single_statement():
    (t,) = parse('<http://a> <http://p> "x" .\n')
    assert t == Triple(Term.iri("http://a"), Term.iri("http://p"), Term.literal('"x"'))
    assert t.object.kind is TermKind.LITERAL


def test_empty_input():
    assert parse("") == []
    assert parse("# only a comment\n\n") == []


def test_term_forms_kept_verbatim():
    text = (
        '_:b0 <http://p> "chat"@fr .\n'
        '<http://s> <http://p> "5"^^<http://www.w3.org/2001/XMLSchema#integer> .\n'
        '<http://s> <http://p> "say \\"hi\\"\\n" .\n'
        "<http://s> <http://p> _:b0 .\n"
    )
    triples = parse(text)
    assert triples[0].subject == Term.bnode("_:b0")
    assert triples[0].object.lexical == '"chat"@fr'
    assert triples[1].object.lexical == '"5"^^<http://www.w3.org/2001/XMLSchema#integer>'
    assert triples[2].object.lexical == '"say \\"hi\\"\\n"'
    assert triples[3].object.kind is TermKind.BNODE


def test_equal_iff_kind_and_lexical_equal():
    assert Term.iri("x") != Term.literal("x")
    assert Term.iri("x") == Term.iri("x")


def _classify(line: str) -> bool:
    """Independent checker: a valid line is 3 well-formed tokens and a dot."""
    body = line.strip()
    if not body.endswith("."):
        return False
    body = body[:-1].strip()
    if body.startswith("<"):
        end = body.find(">")
        if end < 0:
            return False
        s, body = body[: end + 1], body[end + 1 :].lstrip()
    elif body.startswith("_:"):
        s, _, body = body.partition(" ")
    else:
        return False
    if not body.startswith("<"):
        return False
    end = body.find(">")
    p, o = body[: end + 1], body[end + 1 :].strip()
    if " " in p or not o:
        return False
    if o.startswith("<"):
        return o.endswith(">") and " " not in o
    if o.startswith("_:"):
        return " " not in o
    return o.startswith('"') and '"' in o[1:]


def test_skip_policy_counts_malformed_lines():
    rng = random.Random(7)
    good = [f'<http://e/{i}> <http://p/{i % 4}> "v{i}" .' for i in range(97)]
    bad = ["<http://e/x> <http://p> .", 'garbage line', '<http://e/y> "lit" <http://o> .']
    lines = good + bad
    rng.shuffle(lines)
    assert sum(not _classify(line) for line in lines) == 3
    parser = NTriplesParser("skip")
    triples = list(parser.parse(io.BytesIO(("\n".join(lines) + "\n").encode())))
    assert len(triples) == 97
    assert parser.error_count == 3
    reported = sorted(e.line_number for e in parser.errors)
    assert reported == sorted(i + 1 for i, line in enumerate(lines) if line in bad)


def test_abort_policy_reports_line_and_offset():
    text = '<http://a> <http://p> <http://b> .\nnot rdf\n'
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.line_number == 2
    assert err.value.byte_offset == len(text.splitlines(True)[0].encode())


def test_literal_subject_rejected():
    with pytest.raises(ParseError):
        parse('"x" <http://p> <http://o> .\n')


def test_gzip_detected_by_magic(tmp_path):
    path = tmp_path / "data.nt"  # no .gz suffix on purpose
    path.write_bytes(gzip.compress(b"<http://a> <http://p> <http://b> .\n"))
    assert len(list(parse_ntriples(path))) == 1


def test_occurrences():
    a, p, b = Term.iri("a"), Term.iri("p"), Term.iri("b")
    assert list(term_occurrences(Triple(a, p, a))) == [a, p, a]
    assert list(term_occurrences(Triple(a, p, b))) == [a, p, b]
    text = "".join(f"<http://s{i}> <http://p> <http://s{i}> .\n" for i in range(10))
    assert len(list(iter_occurrences(parse(text)))) == 30


def test_partition_examples():
    six = list(range(6))
    assert partition(six, 2) == [[0, 2, 4], [1, 3, 5]]
    assert partition(six, 1) == [six]
    assert [len(p) for p in partition(list(range(10)), 3)] == [4, 3, 3]
    with pytest.raises(ValueError):
        partition(six, 0)


_iri = st.from_regex(r"http://[a-z]{1,8}/[A-Za-z0-9_#.~-]{0,12}", fullmatch=True).map(Term.iri)
_bnode = st.from_regex(r"_:[A-Za-z][A-Za-z0-9]{0,6}", fullmatch=True).map(Term.bnode)
_text = st.text(
    st.characters(blacklist_categories=("Cs", "Cc"), blacklist_characters='"\\'), max_size=12
)
_literal = st.one_of(
    _text.map(lambda s: f'"{s}"'),
    st.tuples(_text, st.sampled_from(["en", "fr", "de-CH"])).map(lambda t: f'"{t[0]}"@{t[1]}'),
    _text.map(lambda s: f'"{s}"^^<http://www.w3.org/2001/XMLSchema#string>'),
).map(Term.literal)
triples_st = st.lists(
    st.builds(Triple, st.one_of(_iri, _bnode), _iri, st.one_of(_iri, _bnode, _literal)), max_size=30
)


@given(triples_st)
def test_roundtrip_serialize_parse(triples):
    assert parse(serialize_ntriples(triples)) == triples


@given(triples_st, st.integers(1, 9))
def test_partitions_cover_input(triples, m):
    parts = partition(triples, m)
    assert len(parts) == m
    assert sorted(t for p in parts for t in p) == sorted(triples)
    assert sum(len(p) for p in parts) == len(triples)
