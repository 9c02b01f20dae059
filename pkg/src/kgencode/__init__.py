"""Frequency- and locality-aware dictionary encoding for RDF knowledge graphs."""

from .dictionary import Dictionary
from .ingest import Term, TermKind, Triple, parse_ntriples, serialize_ntriples
from .pipeline import Config, EncodeResult, decode, encode

__all__ = [
    "Config",
    "Dictionary",
    "EncodeResult",
    "Term",
    "TermKind",
    "Triple",
    "decode",
    "encode",
    "parse_ntriples",
    "serialize_ntriples",
]

__version__ = "0.1.0"
