import io

import numpy as np
import pytest

from conftest import TOY_EXPECTED
from kgencode.dictionary import Dictionary
from kgencode.ingest import Term, Triple, parse_ntriples
from kgencode.pipeline import Config, ConsistencyError, UnknownIdError, decode, encode, rewrite
from kgencode.synth import GenSpec, generate


@pytest.mark.parametrize("partitions", [1, 2, 3])
def test_toy_dictionary(toy, partitions):
    res = encode(toy, Config(k=3, workers=1, partitions=partitions))
    assert list(res.dictionary) == TOY_EXPECTED
    assert res.dictionary.n_frequent == 1
    assert res.stats["threshold"] == 2
    assert decode(res.ids, res.dictionary) == toy


def test_empty_kg():
    res = encode([], Config(workers=1))
    assert len(res.dictionary) == 0 and res.ids.shape == (0, 3)
    assert decode(res.ids, res.dictionary) == []


def test_config_validation():
    for bad in (dict(k=-1), dict(n_hash=0), dict(width=4, k=5), dict(workers=0), dict(freq_method="x")):
        with pytest.raises(ValueError):
            Config(**bad)
    assert Config().workers >= 1


def test_rewrite_and_decode_errors():
    a, p = Term.iri("a"), Term.iri("p")
    with pytest.raises(ConsistencyError):
        rewrite([Triple(a, p, a)], Dictionary({a: 0}))
    with pytest.raises(UnknownIdError) as err:
        decode(np.array([[0, 0, 7]], dtype=np.uint64), Dictionary({a: 0}))
    assert err.value.tid == 7


@pytest.fixture(scope="module")
def small_kg():
    return list(generate(GenSpec(n_distinct=3000, F=30_000, classes=12, seed=4)))


@pytest.mark.parametrize("method", ["cmmg", "countmin", "misragries", "sample", "exact"])
def test_every_frequency_method_roundtrips(small_kg, method):
    res = encode(small_kg, Config(k=20, width=1 << 14, workers=1, partitions=2, freq_method=method))
    assert decode(res.ids, res.dictionary) == small_kg
    assert sorted(res.dictionary.term_to_id.values()) == list(range(len(res.dictionary)))
    assert len(res.frequent) <= 20


def test_determinism_across_workers(small_kg):
    cfg = dict(k=20, width=1 << 14, partitions=4)
    base = encode(small_kg, Config(workers=1, **cfg))
    again = encode(small_kg, Config(workers=1, **cfg))
    forked = encode(small_kg, Config(workers=3, **cfg))
    assert list(base.dictionary) == list(again.dictionary) == list(forked.dictionary)
    assert np.array_equal(base.ids, forked.ids)
    assert np.array_equal(base.sketch.cm.arrays, forked.sketch.cm.arrays)


def test_cm_estimates_do_not_depend_on_partitioning(small_kg):
    # Count-Min counters are a plain sum, so any split gives the same arrays
    states = [encode(small_kg, Config(k=20, width=1 << 14, workers=1, partitions=m)).sketch for m in (1, 2, 5)]
    for s in states[1:]:
        assert np.array_equal(s.cm.arrays, states[0].cm.arrays)


def test_generated_fixture_properties(small_kg):
    counts = sum(3 for _ in small_kg)
    assert abs(counts - 30_000) <= 3
    text = "".join(t.to_ntriples() + "\n" for t in small_kg)
    assert list(parse_ntriples(io.BytesIO(text.encode()))) == small_kg
    no_classes = list(generate(GenSpec(n_distinct=200, F=900, classes=0, seed=1)))
    assert not any(t.predicate.lexical.startswith("http://www.w3.org/") for t in no_classes)
