"""Varint codec, encoded triple files and dictionary files."""

import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kgencode.dictionary import Dictionary, atomic_write
from kgencode.ingest import Term
from kgencode.varint import (
    VarintError,
    decode_varints,
    encode_varint,
    encode_varints,
    read_encoded_triples,
    varint_lengths,
    write_encoded_triples,
)

u64 = st.integers(0, 2**64 - 1)


@pytest.mark.parametrize(
    "value, encoded",
    [(0, b"\x00"), (127, b"\x7f"), (128, b"\x80\x01"), (300, b"\xac\x02"), (2**64 - 1, b"\xff" * 9 + b"\x01")],
)
def test_known_encodings(value, encoded):
    assert encode_varint(value) == encoded
    assert encode_varints(np.array([value], dtype=np.uint64)) == encoded


@given(st.lists(u64, max_size=50))
def test_vectorized_matches_scalar(values):
    arr = np.array(values, dtype=np.uint64)
    assert encode_varints(arr) == b"".join(encode_varint(v) for v in values)
    assert varint_lengths(arr).tolist() == [len(encode_varint(v)) for v in values]
    assert decode_varints(encode_varints(arr)).tolist() == values


def test_decode_errors_carry_offset():
    with pytest.raises(VarintError) as err:
        decode_varints(b"\x01\x80\x80")
    assert err.value.offset == 1
    with pytest.raises(VarintError) as err:
        decode_varints(b"\x05" + b"\xff" * 10 + b"\x01")
    assert err.value.offset == 1


def test_triple_file_roundtrip_and_truncation():
    ids = np.array([[0, 1, 2], [300, 1, 2**40]], dtype=np.uint64)
    buf = io.BytesIO()
    write_encoded_triples(buf, ids)
    data = buf.getvalue()
    assert np.array_equal(read_encoded_triples(io.BytesIO(data)), ids)
    with pytest.raises(VarintError) as err:
        read_encoded_triples(io.BytesIO(data[:-2]))
    assert err.value.offset == len(data) - 6  # the start of the cut 2**40 varint
    assert read_encoded_triples(io.BytesIO(b"")).shape == (0, 3)


def _dictionary():
    terms = [
        Term.iri("http://a"),
        Term.literal('"tab\\there"@en'),
        Term.bnode("_:b1"),
        Term.literal('"5"^^<http://www.w3.org/2001/XMLSchema#int>'),
    ]
    return Dictionary({t: i for i, t in enumerate(terms)}, n_frequent=1)


def test_dictionary_text_and_binary(tmp_path):
    d = _dictionary()
    path = tmp_path / "dict.tsv"
    d.save(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# n_frequent=1"
    assert lines[1] == "0\tiri\thttp://a"
    loaded = Dictionary.load(path)
    assert loaded == d and loaded.n_frequent == 1
    with open(str(path) + ".bin", "rb") as fh:
        assert Dictionary.read_binary(fh) == d


def test_dictionary_rejects_duplicates():
    a = Term.iri("a")
    with pytest.raises(ValueError):
        Dictionary([(a, 0), (a, 1)])
    with pytest.raises(ValueError):
        Dictionary([(a, 0), (Term.iri("b"), 0)])


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "out.txt"
    with pytest.raises(RuntimeError):
        with atomic_write(target, "w") as fh:
            fh.write("partial")
            raise RuntimeError("boom")
    assert list(tmp_path.iterdir()) == []
