"""Little-endian base-128 varints, vectorized with numpy, and the ID-triple file.

Encoded triple file layout::

    magic  b"KGET"     4 bytes
    count  uint64 LE   number of triples
    body   3 * count varints (subject, predicate, object), no padding
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

TRIPLES_MAGIC = b"KGET"
_HEADER = struct.Struct("<4sQ")
MAX_VARINT_BYTES = 10


class VarintError(ValueError):
    def __init__(self, offset: int, reason: str):
        self.offset = offset
        super().__init__(f"corrupt varint at byte {offset}: {reason}")


def encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varints encode unsigned integers only")
    out = bytearray()
    while True:
        low = value & 0x7F
        value >>= 7
        if value:
            out.append(low | 0x80)
        else:
            out.append(low)
            return bytes(out)


def varint_lengths(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.uint64)
    lengths = np.ones(values.shape, dtype=np.int64)
    for b in range(1, MAX_VARINT_BYTES):
        lengths += values >= np.uint64(1 << (7 * b))
    return lengths


def encode_varints(values: np.ndarray) -> bytes:
    values = np.asarray(values, dtype=np.uint64).ravel()
    lengths = varint_lengths(values)
    ends = np.cumsum(lengths)
    starts = ends - lengths
    out = np.zeros(int(ends[-1]) if len(ends) else 0, dtype=np.uint8)
    for b in range(MAX_VARINT_BYTES):
        sel = lengths > b
        if not sel.any():
            break
        chunk = (values[sel] >> np.uint64(7 * b)) & np.uint64(0x7F)
        cont = (lengths[sel] > b + 1).astype(np.uint64) << np.uint64(7)
        out[starts[sel] + b] = (chunk | cont).astype(np.uint8)
    return out.tobytes()


def decode_varints(data: bytes, base_offset: int = 0) -> np.ndarray:
    """Decode a run of varints; raises :class:`VarintError` with the byte offset."""
    buf = np.frombuffer(data, dtype=np.uint8)
    if buf.size == 0:
        return np.zeros(0, dtype=np.uint64)
    terminal = np.flatnonzero(buf < 0x80)
    if terminal.size == 0 or terminal[-1] != buf.size - 1:
        last = int(terminal[-1]) + 1 if terminal.size else 0
        raise VarintError(base_offset + last, "truncated varint")
    starts = np.concatenate(([0], terminal[:-1] + 1))
    lengths = terminal - starts + 1
    too_long = np.flatnonzero(lengths > MAX_VARINT_BYTES)
    if too_long.size:
        raise VarintError(base_offset + int(starts[too_long[0]]), "longer than 10 bytes")
    pos_in = np.arange(buf.size) - np.repeat(starts, lengths)
    shifted = (buf & 0x7F).astype(np.uint64) << (np.uint64(7) * pos_in.astype(np.uint64))
    return np.add.reduceat(shifted, starts).astype(np.uint64)


def write_encoded_triples(fh: BinaryIO, ids: np.ndarray) -> None:
    ids = np.asarray(ids, dtype=np.uint64).reshape(-1, 3)
    fh.write(_HEADER.pack(TRIPLES_MAGIC, ids.shape[0]))
    fh.write(encode_varints(ids))


def read_encoded_triples(fh: BinaryIO) -> np.ndarray:
    header = fh.read(_HEADER.size)
    if len(header) == 0:
        return np.zeros((0, 3), dtype=np.uint64)
    if len(header) != _HEADER.size:
        raise VarintError(0, "truncated header")
    magic, count = _HEADER.unpack(header)
    if magic != TRIPLES_MAGIC:
        raise VarintError(0, "bad magic")
    values = decode_varints(fh.read(), base_offset=_HEADER.size)
    if values.size != 3 * count:
        raise VarintError(_HEADER.size, f"expected {3 * count} ids, found {values.size}")
    return values.reshape(-1, 3)
