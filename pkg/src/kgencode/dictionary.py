"""Bijective term <-> ID dictionaries and their on-disk formats.

Text format (canonical): one ``id<TAB>kind<TAB>lexical`` line per term,
sorted by ID. The lexical form is the last field and may itself contain tabs.
The binary companion stores the same entries length-prefixed for fast loads.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Mapping, TextIO

from .ingest import Term, TermKind

KIND_NAMES = {TermKind.IRI: "iri", TermKind.LITERAL: "literal", TermKind.BNODE: "bnode"}
KIND_BY_NAME = {v: k for k, v in KIND_NAMES.items()}

DICT_MAGIC = b"KGDB"
DICT_VERSION = 1


class Dictionary:
    """A term/ID bijection.

    ``n_frequent`` marks the leading frequent part: IDs ``0..n_frequent-1``.
    Everything else is the infrequent part. Baseline encoders leave it at 0.
    """

    def __init__(self, entries: Mapping[Term, int] | Iterable[tuple[Term, int]] = (), n_frequent: int = 0):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self.term_to_id: dict[Term, int] = {}
        self.id_to_term: dict[int, Term] = {}
        for term, tid in items:
            self._add(term, int(tid))
        self.n_frequent = n_frequent

    def _add(self, term: Term, tid: int) -> None:
        if term in self.term_to_id:
            raise ValueError(f"term {term.lexical!r} assigned twice")
        if tid in self.id_to_term:
            raise ValueError(f"id {tid} assigned twice")
        if tid < 0:
            raise ValueError(f"negative id {tid}")
        self.term_to_id[term] = tid
        self.id_to_term[tid] = term

    def __len__(self) -> int:
        return len(self.term_to_id)

    def __contains__(self, term: object) -> bool:
        return term in self.term_to_id

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Dictionary)
            and self.term_to_id == other.term_to_id
            and self.n_frequent == other.n_frequent
        )

    def __iter__(self) -> Iterator[tuple[int, Term]]:
        for tid in sorted(self.id_to_term):
            yield tid, self.id_to_term[tid]

    def id_of(self, term: Term) -> int:
        return self.term_to_id[term]

    def term_of(self, tid: int) -> Term:
        return self.id_to_term[tid]

    @property
    def frequent(self) -> dict[Term, int]:
        return {t: i for t, i in self.term_to_id.items() if i < self.n_frequent}

    @property
    def infrequent(self) -> dict[Term, int]:
        return {t: i for t, i in self.term_to_id.items() if i >= self.n_frequent}

    # -- text format --

    def write_text(self, fh: TextIO) -> None:
        fh.write(f"# n_frequent={self.n_frequent}\n")
        for tid, term in self:
            fh.write(f"{tid}\t{KIND_NAMES[term.kind]}\t{term.lexical}\n")

    @classmethod
    def read_text(cls, fh: TextIO) -> "Dictionary":
        n_frequent = 0
        entries = []
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# n_frequent="):
                    n_frequent = int(line.split("=", 1)[1])
                continue
            try:
                tid, kind, lexical = line.split("\t", 2)
                entries.append((Term(lexical, KIND_BY_NAME[kind]), int(tid)))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"bad dictionary line {lineno}: {line!r}") from exc
        return cls(entries, n_frequent)

    # -- binary companion --

    def write_binary(self, fh: BinaryIO) -> None:
        fh.write(struct.pack("<4sHQQ", DICT_MAGIC, DICT_VERSION, self.n_frequent, len(self)))
        for tid, term in self:
            raw = term.lexical.encode("utf-8")
            fh.write(struct.pack("<QBI", tid, term.kind, len(raw)))
            fh.write(raw)

    @classmethod
    def read_binary(cls, fh: BinaryIO) -> "Dictionary":
        data = fh.read()
        magic, version, n_frequent, count = struct.unpack_from("<4sHQQ", data, 0)
        if magic != DICT_MAGIC or version != DICT_VERSION:
            raise ValueError("not a binary dictionary file")
        pos = struct.calcsize("<4sHQQ")
        rec = struct.Struct("<QBI")
        entries = []
        for _ in range(count):
            tid, kind, size = rec.unpack_from(data, pos)
            pos += rec.size
            entries.append((Term(data[pos:pos + size].decode("utf-8"), TermKind(kind)), tid))
            pos += size
        return cls(entries, n_frequent)

    def save(self, path: str | os.PathLike) -> None:
        """Write the text file and its ``.bin`` companion, each atomically."""
        path = Path(path)
        with atomic_write(path, "w") as fh:
            self.write_text(fh)
        with atomic_write(path.with_name(path.name + ".bin"), "wb") as fh:
            self.write_binary(fh)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Dictionary":
        with open(path, encoding="utf-8", newline="\n") as fh:
            return cls.read_text(fh)


class atomic_write:
    """Context manager writing to a temp file renamed over ``path`` on success."""

    def __init__(self, path: str | os.PathLike, mode: str = "w"):
        self.path = Path(path)
        self.mode = mode

    def __enter__(self):
        fd, self._tmp = tempfile.mkstemp(prefix=f".{self.path.name}.", dir=self.path.parent or ".")
        if "b" in self.mode:
            self._fh = os.fdopen(fd, self.mode)
        else:
            self._fh = os.fdopen(fd, self.mode, encoding="utf-8", newline="\n")
        return self._fh

    def __exit__(self, exc_type, exc, tb):
        self._fh.close()
        if exc_type is None:
            os.replace(self._tmp, self.path)
        else:
            os.unlink(self._tmp)
        return False
