"""Canonical binary encoding shared by every message and file.

Scalars are 32-byte big-endian integers reduced mod q.  G1 points are 48
bytes and G2 points 96 bytes: the x coordinate with three flag bits packed
into its unused top bits (compressed, infinity, y parity).  Variable-length
fields carry a 4-byte big-endian length prefix.
"""

from __future__ import annotations

import struct

from petrelic.multiplicative.pairing import G1Element, G2Element, GTElement

FORMAT_VERSION = 0x01

SCALAR_LEN = 32
G1_LEN = 48
G2_LEN = 96

_FLAG_COMPRESSED = 0x80
_FLAG_INFINITY = 0x40
_FLAG_ODD = 0x20
_FLAG_MASK = 0xE0


class FormatError(ValueError):
    """Raised when bytes do not parse under the canonical encoding."""


def _compress(raw: bytes, width: int) -> bytes:
    if raw == b"\x00":
        return bytes([_FLAG_COMPRESSED | _FLAG_INFINITY]) + bytes(width - 1)
    if len(raw) != width + 1 or raw[0] not in (2, 3):
        raise FormatError("unexpected backend point encoding")
    body = bytearray(raw[1:])
    if body[0] & _FLAG_MASK:
        raise FormatError("coordinate overflows flag bits")
    body[0] |= _FLAG_COMPRESSED | (_FLAG_ODD if raw[0] == 3 else 0)
    return bytes(body)


def _decompress(data: bytes, width: int, cls):
    if len(data) != width:
        raise FormatError(f"expected {width} bytes, got {len(data)}")
    flags = data[0] & _FLAG_MASK
    if not flags & _FLAG_COMPRESSED:
        raise FormatError("compression flag not set")
    if flags & _FLAG_INFINITY:
        if flags & _FLAG_ODD or data[0] & ~_FLAG_MASK & 0xFF or any(data[1:]):
            raise FormatError("non-canonical encoding of the identity")
        return cls.from_binary(b"\x00")
    prefix = b"\x03" if flags & _FLAG_ODD else b"\x02"
    body = bytes([data[0] & ~_FLAG_MASK & 0xFF]) + data[1:]
    point = cls.from_binary(prefix + body)
    if not point.is_valid():
        raise FormatError("point not in the prime-order subgroup")
    if _compress(point.to_binary(), width) != data:
        raise FormatError("non-canonical point encoding")
    return point


def g1_to_bytes(point: G1Element) -> bytes:
    return _compress(point.to_binary(), G1_LEN)


def g1_from_bytes(data: bytes) -> G1Element:
    return _decompress(bytes(data), G1_LEN, G1Element)


def g2_to_bytes(point: G2Element) -> bytes:
    return _compress(point.to_binary(), G2_LEN)


def g2_from_bytes(data: bytes) -> G2Element:
    return _decompress(bytes(data), G2_LEN, G2Element)


def gt_to_bytes(element: GTElement) -> bytes:
    # Only ever hashed, never sent.
    return element.to_binary()


def scalar_to_bytes(value: int) -> bytes:
    return int(value).to_bytes(SCALAR_LEN, "big")


def scalar_from_bytes(data: bytes, order: int) -> int:
    if len(data) != SCALAR_LEN:
        raise FormatError(f"expected {SCALAR_LEN}-byte scalar, got {len(data)}")
    value = int.from_bytes(data, "big")
    if value >= order:
        raise FormatError("scalar not reduced modulo the group order")
    return value


def epoch_to_bytes(epoch: int) -> bytes:
    if not 0 <= epoch < 2**64:
        raise ValueError(f"epoch out of range: {epoch}")
    return struct.pack(">Q", epoch)


def frame(*parts: bytes) -> bytes:
    """Length-prefix each part and concatenate."""
    return b"".join(struct.pack(">I", len(p)) + p for p in parts)


class Writer:
    """Append-only builder for canonical messages."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def u8(self, value: int) -> "Writer":
        self._buf += struct.pack(">B", value)
        return self

    def u32(self, value: int) -> "Writer":
        self._buf += struct.pack(">I", value)
        return self

    def u64(self, value: int) -> "Writer":
        self._buf += struct.pack(">Q", value)
        return self

    def raw(self, data: bytes) -> "Writer":
        self._buf += data
        return self

    def blob(self, data: bytes) -> "Writer":
        self._buf += struct.pack(">I", len(data)) + data
        return self

    def scalar(self, value: int) -> "Writer":
        return self.raw(scalar_to_bytes(value))

    def g1(self, point: G1Element) -> "Writer":
        return self.raw(g1_to_bytes(point))

    def g2(self, point: G2Element) -> "Writer":
        return self.raw(g2_to_bytes(point))

    def getvalue(self) -> bytes:
        return bytes(self._buf)


class Reader:
    """Cursor over canonical bytes; every read checks bounds."""

    def __init__(self, data: bytes) -> None:
        self._data = memoryview(bytes(data))
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._data):
            raise FormatError("truncated input")
        out = bytes(self._data[self._pos:self._pos + n])
        self._pos += n
        return out

    def u8(self) -> int:
        return self._take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def blob(self) -> bytes:
        return self._take(self.u32())

    def scalar(self, order: int) -> int:
        return scalar_from_bytes(self._take(SCALAR_LEN), order)

    def g1(self) -> G1Element:
        return g1_from_bytes(self._take(G1_LEN))

    def g2(self) -> G2Element:
        return g2_from_bytes(self._take(G2_LEN))

    def remaining(self) -> int:
        return len(self._data) - self._pos

    def done(self) -> None:
        if self.remaining():
            raise FormatError(f"{self.remaining()} trailing bytes")
