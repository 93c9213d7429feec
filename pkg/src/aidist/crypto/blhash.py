"""Order-independent blocklist digest ``h_BL``."""

from __future__ import annotations

import hashlib
from typing import Iterable

from aidist.crypto.encoding import FORMAT_VERSION, Writer


def canonical_blocklist_bytes(kind: int, entries: Iterable[bytes]) -> bytes:
    """Version byte, kind byte, count, then sorted length-prefixed entries."""
    ordered = sorted(set(bytes(e) for e in entries))
    w = Writer().u8(FORMAT_VERSION).u8(kind).u32(len(ordered))
    for entry in ordered:
        w.blob(entry)
    return w.getvalue()


def blocklist_hash(kind: int, entries: Iterable[bytes]) -> bytes:
    return hashlib.sha256(canonical_blocklist_bytes(kind, entries)).digest()
