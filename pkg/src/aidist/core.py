"""Scheme-generic plumbing shared by both token systems.

Blocklists, the distribution station's tag-unique transaction log, audit
proof generation and verification, and the offline tag-set merge utility.
The scheme-specific parts (what an audit entry's proof is and how it is
checked) are supplied by the caller.
"""

from __future__ import annotations

import contextlib
import enum
import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Iterable, Sequence

from aidist.crypto.blhash import blocklist_hash
from aidist.crypto.encoding import FormatError, Reader, Writer, g1_from_bytes, g1_to_bytes
from aidist.crypto.group import ORDER
from aidist.crypto.pedersen import PedersenParams, pc_combine, pc_commit

MAX_ENTITLEMENT = 2**32 - 1


class BlocklistKind(enum.IntEnum):
    CARD = 1  # 32-byte revocation values
    PHONE = 2  # pairs (h, H) of G1 points


CARD_ENTRY_LEN = 32
PHONE_ENTRY_LEN = 96


@dataclass(frozen=True)
class Verdict:
    """Boolean outcome plus a reason code that stays on the verifier's side."""

    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def accept(cls) -> "Verdict":
        return cls(True)

    @classmethod
    def reject(cls, reason: str) -> "Verdict":
        return cls(False, reason)


# -- blocklist --------------------------------------------------------------


@dataclass(frozen=True)
class Blocklist:
    """Canonically ordered, duplicate-free set of revocation entries."""

    kind: BlocklistKind
    entries: tuple[bytes, ...] = ()
    version: int = 1

    def __post_init__(self) -> None:
        canon = tuple(sorted(set(bytes(e) for e in self.entries)))
        width = CARD_ENTRY_LEN if self.kind == BlocklistKind.CARD else PHONE_ENTRY_LEN
        for e in canon:
            if len(e) != width:
                raise ValueError(f"{self.kind.name} blocklist entries are {width} bytes")
        object.__setattr__(self, "kind", BlocklistKind(self.kind))
        object.__setattr__(self, "entries", canon)

    @classmethod
    def empty(cls, kind: BlocklistKind) -> "Blocklist":
        return cls(kind)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, entry: bytes) -> bool:
        return bytes(entry) in self._entry_set

    @cached_property
    def _entry_set(self) -> frozenset[bytes]:
        return frozenset(self.entries)

    @cached_property
    def digest(self) -> bytes:
        return blocklist_hash(int(self.kind), self.entries)

    def hash(self) -> bytes:
        return self.digest

    @cached_property
    def pairs(self) -> tuple[tuple[Any, Any], ...]:
        """Decoded ``(h, H)`` pairs, canonical order (phone kind only)."""
        if self.kind != BlocklistKind.PHONE:
            raise TypeError("only phone blocklists hold group-element pairs")
        return tuple((g1_from_bytes(e[:48]), g1_from_bytes(e[48:])) for e in self.entries)

    def to_bytes(self) -> bytes:
        w = Writer().u8(self.version).u8(int(self.kind)).u32(len(self.entries))
        for e in self.entries:
            w.raw(e)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Blocklist":
        r = Reader(data)
        version = r.u8()
        if version != 1:
            raise FormatError(f"unsupported blocklist version {version}")
        kind = BlocklistKind(r.u8())
        width = CARD_ENTRY_LEN if kind == BlocklistKind.CARD else PHONE_ENTRY_LEN
        entries = tuple(r.raw(width) for _ in range(r.u32()))
        r.done()
        return cls(kind, entries)


def phone_entry(h, H) -> bytes:
    return g1_to_bytes(h) + g1_to_bytes(H)


def bl_revoke(bl: Blocklist, entry: bytes | tuple) -> Blocklist:
    """Return a new blocklist with ``entry`` present exactly once."""
    if isinstance(entry, tuple):
        if bl.kind != BlocklistKind.PHONE:
            raise ValueError("group-element pair added to a card blocklist")
        entry = phone_entry(*entry)
    width = CARD_ENTRY_LEN if bl.kind == BlocklistKind.CARD else PHONE_ENTRY_LEN
    if len(entry) != width:
        raise ValueError(f"entry kind does not match {bl.kind.name} blocklist")
    return Blocklist(bl.kind, bl.entries + (bytes(entry),))


# -- transaction log --------------------------------------------------------


class InsertResult(enum.Enum):
    ACCEPTED = "accepted"
    DUPLICATE = "duplicate"


@dataclass(frozen=True)
class Record:
    """One accepted distribution: ``(ent_H, tau_H, pi_ent)`` plus the h_BL in force."""

    ent: int
    tag: bytes
    proof: Any
    h_bl: bytes


class TransactionLog:
    """Per-epoch store keyed by household tag; insertion is check-and-set."""

    def __init__(self) -> None:
        self._epochs: dict[int, dict[bytes, Record]] = {}
        self._lock = threading.Lock()

    def insert(self, epoch: int, record: Record) -> InsertResult:
        with self._lock:
            bucket = self._epochs.setdefault(epoch, {})
            if record.tag in bucket:
                return InsertResult.DUPLICATE
            bucket[record.tag] = record
            return InsertResult.ACCEPTED

    def seen(self, epoch: int, tag: bytes) -> bool:
        with self._lock:
            return tag in self._epochs.get(epoch, {})

    def records(self, epoch: int) -> list[Record]:
        """Consistent snapshot of one epoch, in insertion order."""
        with self._lock:
            return list(self._epochs.get(epoch, {}).values())

    def tags(self, epoch: int) -> set[bytes]:
        with self._lock:
            return set(self._epochs.get(epoch, {}))

    def epochs(self) -> list[int]:
        with self._lock:
            return sorted(self._epochs)

    def __len__(self) -> int:
        with self._lock:
            return sum(len(b) for b in self._epochs.values())


def log_insert(log: TransactionLog, epoch: int, record: Record) -> InsertResult:
    return log.insert(epoch, record)


def merge_tag_sets(*tag_sets: Iterable[bytes]) -> tuple[set[bytes], set[bytes]]:
    """Union of several stations' seen tags, and the tags seen more than once."""
    union: set[bytes] = set()
    dups: set[bytes] = set()
    for tags in tag_sets:
        for t in set(tags):
            if t in union:
                dups.add(t)
            union.add(t)
    return union, dups


# -- audit ------------------------------------------------------------------


@dataclass(frozen=True)
class AuditEntry:
    proof: Any  # sigma_aud (card) or pi_s (phone)
    tag: bytes
    com: Any


@dataclass(frozen=True)
class AuditProof:
    r_sum: int
    entries: tuple[AuditEntry, ...]
    h_bl: bytes | None = None  # card variant only

    def __len__(self) -> int:
        return len(self.entries)


class AuditError(Exception):
    pass


def gen_audit(
    records: Sequence[Record],
    opening: Callable[[Record], tuple[int, Any, Any]],
    include_h_bl: bool,
) -> tuple[int, AuditProof]:
    """Sum entitlements and randomizers over an epoch's records.

    ``opening(record)`` returns ``(r, com, entry_proof)``.
    """
    h_bls = {rec.h_bl for rec in records}
    if len(h_bls) > 1:
        raise AuditError("records in one epoch were accepted under different blocklists")
    ent_sum = 0
    r_sum = 0
    entries = []
    for rec in records:
        r, com, proof = opening(rec)
        ent_sum += rec.ent
        r_sum = (r_sum + r) % ORDER
        entries.append(AuditEntry(proof, rec.tag, com))
    h_bl = next(iter(h_bls)) if (include_h_bl and h_bls) else None
    return ent_sum, AuditProof(r_sum, tuple(entries), h_bl)


def auditor_verify(
    pc: PedersenParams,
    ent_sum: int,
    proof: AuditProof,
    entry_ok: Callable[[AuditEntry], bool],
) -> Verdict:
    """Every entry verifies, tags are unique, and prod Com = Commit(ent_sum, r_sum)."""
    if not 0 <= ent_sum < 2**64:
        return Verdict.reject("ent_sum-range")
    tags = [e.tag for e in proof.entries]
    if len(set(tags)) != len(tags):
        return Verdict.reject("duplicate-tag")
    for i, entry in enumerate(proof.entries):
        if not entry_ok(entry):
            return Verdict.reject(f"entry-{i}")
    if pc_combine(pc, (e.com for e in proof.entries)) != pc_commit(pc, ent_sum, proof.r_sum):
        return Verdict.reject("sum-mismatch")
    return Verdict.accept()


class TokenBusy(RuntimeError):
    """A token was entered while another operation on it was still running."""


class SessionToken:
    """Single-session guard shared by card and phone state objects."""

    _busy: bool = False

    @contextlib.contextmanager
    def session(self):
        if self._busy:
            raise TokenBusy("token is already in use")
        self._busy = True
        try:
            yield self
        finally:
            self._busy = False


class AbortReason(enum.Enum):
    BLOCKED = "blocked"
    STALE_EPOCH = "stale-epoch"


def check_entitlement(ent: int) -> int:
    if not isinstance(ent, int) or not 0 <= ent <= MAX_ENTITLEMENT:
        raise ValueError(f"entitlement must be an integer in [0, 2^32 - 1], got {ent!r}")
    return ent


__all__ = [
    "AbortReason",
    "AuditEntry",
    "AuditError",
    "AuditProof",
    "Blocklist",
    "BlocklistKind",
    "InsertResult",
    "MAX_ENTITLEMENT",
    "Record",
    "SessionToken",
    "TokenBusy",
    "TransactionLog",
    "Verdict",
    "auditor_verify",
    "bl_revoke",
    "check_entitlement",
    "gen_audit",
    "log_insert",
    "merge_tag_sets",
    "phone_entry",
]
