"""Versioned binary artifacts.

Layout: ``b"AIDS"`` magic, format version, artifact kind, system byte,
u32 payload length, payload, CRC-32 of everything before it.
"""

from __future__ import annotations

import enum
import struct
import zlib
from pathlib import Path

from aidist.crypto.encoding import FormatError

MAGIC = b"AIDS"
STORE_VERSION = 1
_HEAD = struct.Struct(">4sBBBI")


class Kind(enum.IntEnum):
    SETUP = 1
    HOUSEHOLDS = 2
    BLOCKLIST = 3
    LOG = 4
    AUDIT = 5


class ArtifactError(Exception):
    pass


class ArtifactMissing(ArtifactError):
    pass


class ArtifactCorrupt(ArtifactError):
    pass


class ArtifactVersion(ArtifactError):
    pass


def pack(kind: Kind, system: int, payload: bytes) -> bytes:
    body = _HEAD.pack(MAGIC, STORE_VERSION, int(kind), system, len(payload)) + payload
    return body + struct.pack(">I", zlib.crc32(body))


def unpack(data: bytes, kind: Kind, name: str = "artifact") -> tuple[int, bytes]:
    """Return ``(system, payload)``; raises a specific ArtifactError on any mismatch."""
    if len(data) < _HEAD.size + 4 or data[:4] != MAGIC:
        raise ArtifactCorrupt(f"{name}: not an aidist artifact")
    magic, version, got_kind, system, n = _HEAD.unpack_from(data)
    if version != STORE_VERSION:
        raise ArtifactVersion(f"{name}: format version {version}, this build reads {STORE_VERSION}")
    if len(data) != _HEAD.size + n + 4:
        raise ArtifactCorrupt(f"{name}: truncated or padded")
    (crc,) = struct.unpack(">I", data[-4:])
    if zlib.crc32(data[:-4]) != crc:
        raise ArtifactCorrupt(f"{name}: checksum mismatch")
    if got_kind != int(kind):
        raise ArtifactCorrupt(f"{name}: holds a {Kind(got_kind).name.lower()} artifact, expected {kind.name.lower()}")
    return system, data[_HEAD.size:-4]


def write(path: Path, kind: Kind, system: int, payload: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(pack(kind, system, payload))
    tmp.replace(path)


def read(path: Path, kind: Kind) -> tuple[int, bytes]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise ArtifactMissing(f"{path}: missing (run the earlier phase first)") from None
    return unpack(data, kind, str(path))


def decode(path: Path, fn):
    """Run a payload decoder, turning format errors into ArtifactCorrupt."""
    try:
        return fn()
    except (FormatError, ValueError, IndexError, KeyError) as exc:
        raise ArtifactCorrupt(f"{path}: {exc}") from exc
