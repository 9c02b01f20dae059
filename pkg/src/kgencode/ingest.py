"""N-Triples ingestion: terms, triples, a streaming line parser and partitioning.

Terms keep their exact lexical form. IRIs are stored without the angle
brackets, blank nodes keep their ``_:`` label verbatim and literals keep the
quotes together with any language tag or datatype suffix, so serializing a
parsed triple gives back the original statement modulo whitespace.
"""

from __future__ import annotations

import gzip
import io
import logging
import os
import re
from enum import IntEnum
from typing import BinaryIO, Iterable, Iterator, NamedTuple, Sequence, Union

logger = logging.getLogger(__name__)

GZIP_MAGIC = b"\x1f\x8b"

RDF_TYPE_IRI = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_SUBCLASSOF_IRI = "http://www.w3.org/2000/01/rdf-schema#subClassOf"
RDFS_DOMAIN_IRI = "http://www.w3.org/2000/01/rdf-schema#domain"
RDFS_RANGE_IRI = "http://www.w3.org/2000/01/rdf-schema#range"
RDFS_CLASS_IRI = "http://www.w3.org/2000/01/rdf-schema#Class"


class TermKind(IntEnum):
    IRI = 0
    LITERAL = 1
    BNODE = 2


class Term(NamedTuple):
    """An RDF term.

    Field order puts ``lexical`` first so that the natural tuple ordering is
    the lexical order used everywhere for tie-breaking.
    """

    lexical: str
    kind: TermKind

    @classmethod
    def iri(cls, value: str) -> "Term":
        return cls(value, TermKind.IRI)

    @classmethod
    def literal(cls, value: str) -> "Term":
        return cls(value, TermKind.LITERAL)

    @classmethod
    def bnode(cls, value: str) -> "Term":
        return cls(value, TermKind.BNODE)

    def n3(self) -> str:
        if self.kind is TermKind.IRI:
            return f"<{self.lexical}>"
        return self.lexical

    def to_bytes(self) -> bytes:
        """Kind byte followed by the UTF-8 lexical form; the input to hashing."""
        return bytes((self.kind,)) + self.lexical.encode("utf-8")


class Triple(NamedTuple):
    subject: Term
    predicate: Term
    object: Term

    def to_ntriples(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


RDF_TYPE = Term.iri(RDF_TYPE_IRI)
RDFS_SUBCLASSOF = Term.iri(RDFS_SUBCLASSOF_IRI)
RDFS_DOMAIN = Term.iri(RDFS_DOMAIN_IRI)
RDFS_RANGE = Term.iri(RDFS_RANGE_IRI)
RDFS_CLASS = Term.iri(RDFS_CLASS_IRI)


_IRI = r"<[^<>\"{}|^`\\\x00-\x20]*>"
_BNODE = r"_:[^\s<>\"\.](?:[^\s<>\"]*[^\s<>\"\.])?"
_LITERAL = (
    r"\"(?:[^\"\\\n\r]|\\.)*\""
    r"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*|\^\^" + _IRI + r")?"
)
_STATEMENT = re.compile(
    r"[ \t]*(" + _IRI + "|" + _BNODE + r")"
    r"[ \t]*(" + _IRI + r")"
    r"[ \t]*(" + _IRI + "|" + _BNODE + "|" + _LITERAL + r")"
    r"[ \t]*\.[ \t]*(?:#.*)?"
)


class ParseError(ValueError):
    """A malformed N-Triples line."""

    def __init__(self, line_number: int, byte_offset: int, reason: str, text: str = ""):
        self.line_number = line_number
        self.byte_offset = byte_offset
        self.reason = reason
        self.text = text
        super().__init__(f"line {line_number} (byte {byte_offset}): {reason}")


class NTriplesParser:
    """Line-oriented N-Triples parser.

    ``policy`` is ``"abort"`` (raise the first :class:`ParseError`) or
    ``"skip"`` (drop malformed lines, recording them in :attr:`errors`).
    Identical tokens are interned so repeated terms share one object.
    """

    def __init__(self, policy: str = "abort"):
        if policy not in ("abort", "skip"):
            raise ValueError(f"unknown error policy {policy!r}")
        self.policy = policy
        self.errors: list[ParseError] = []
        self._interned: dict[str, Term] = {}

    @property
    def error_count(self) -> int:
        return len(self.errors)

    def _term(self, token: str) -> Term:
        term = self._interned.get(token)
        if term is None:
            if token[0] == "<":
                term = Term(token[1:-1], TermKind.IRI)
            elif token[0] == "_":
                term = Term(token, TermKind.BNODE)
            else:
                term = Term(token, TermKind.LITERAL)
            self._interned[token] = term
        return term

    def parse(self, stream: BinaryIO) -> Iterator[Triple]:
        match = _STATEMENT.fullmatch
        intern = self._term
        offset = 0
        for lineno, raw in enumerate(stream, start=1):
            line_offset = offset
            offset += len(raw)
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                self._fail(ParseError(lineno, line_offset, f"invalid UTF-8: {exc}"))
                continue
            line = line.rstrip("\r\n")
            stripped = line.strip()
            if not stripped or stripped[0] == "#":
                continue
            m = match(line)
            if m is None:
                self._fail(ParseError(lineno, line_offset, "not an N-Triples statement", line))
                continue
            s, p, o = m.groups()
            yield Triple(intern(s), intern(p), intern(o))

    def _fail(self, error: ParseError) -> None:
        if self.policy == "abort":
            raise error
        logger.debug("skipping %s", error)
        self.errors.append(error)


def open_source(source: Union[str, os.PathLike, bytes, BinaryIO]) -> BinaryIO:
    """Return a binary stream over ``source``, transparently gunzipping.

    Compression is detected from the magic bytes, not the file name.
    """
    if isinstance(source, (bytes, bytearray)):
        stream: BinaryIO = io.BytesIO(source)
    elif isinstance(source, (str, os.PathLike)):
        stream = open(source, "rb")
    else:
        stream = source
    buffered = stream if hasattr(stream, "peek") else io.BufferedReader(stream)  # type: ignore[arg-type]
    if buffered.peek(2)[:2] == GZIP_MAGIC:
        return gzip.GzipFile(fileobj=buffered)  # type: ignore[return-value]
    return buffered


def parse_ntriples(
    source: Union[str, os.PathLike, bytes, BinaryIO],
    policy: str = "abort",
    parser: NTriplesParser | None = None,
) -> Iterator[Triple]:
    """Yield the triples of an N-Triples document in input order.

    Pass a ``parser`` to inspect its ``errors`` after iteration when using
    the ``"skip"`` policy.
    """
    parser = parser or NTriplesParser(policy)
    stream = open_source(source)
    try:
        yield from parser.parse(stream)
    finally:
        if stream is not source:
            stream.close()


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    return "".join(t.to_ntriples() + "\n" for t in triples)


def term_occurrences(triple: Triple) -> tuple[Term, Term, Term]:
    """Each position counts once, even when a term repeats inside the triple."""
    return (triple.subject, triple.predicate, triple.object)


def iter_occurrences(triples: Iterable[Triple]) -> Iterator[Term]:
    for s, p, o in triples:
        yield s
        yield p
        yield o


def partition(triples: Sequence[Triple], m: int) -> list[Sequence[Triple]]:
    """Round-robin split: triple ``i`` goes to partition ``i % m``."""
    if m < 1:
        raise ValueError(f"partition count must be >= 1, got {m}")
    return [triples[r::m] for r in range(m)]
