"""Uniform adapters over the two token systems.

Both systems expose the same phases (setup, registration, distribution,
auditing); the simulator and the game harness talk to this interface so
every flow and experiment runs against either instantiation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from aidist import card as C
from aidist import phone as P
from aidist import ps
from aidist.core import (
    AuditEntry,
    AuditProof,
    Blocklist,
    BlocklistKind,
    Record,
    TransactionLog,
    Verdict,
    auditor_verify,
    gen_audit,
)
from aidist.crypto.encoding import FORMAT_VERSION, FormatError, Reader, Writer, g1_from_bytes
from aidist.crypto.group import ORDER
from aidist.crypto.pedersen import PedersenParams, pc_gen
from aidist.crypto.rng import Rng
from aidist.crypto.signature import SIG_LEN, SigningKey, VerifyKey, sig_gen
from aidist.showup import ShowupProof, blocked, verify_showup_proof


@dataclass(frozen=True)
class Authority:
    """Registration-station key material; ``public`` is what everyone else sees."""

    secret: Any
    public: Any


class Scheme:
    name: str
    bl_kind: BlocklistKind
    include_h_bl: bool

    def __init__(self, pc: PedersenParams | None = None) -> None:
        self.pc = pc or pc_gen()

    # setup / registration ---------------------------------------------------
    def setup(self, rng: Rng) -> Authority:
        raise NotImplementedError

    def new_token(self, public) -> Any:
        raise NotImplementedError

    def prepare(self, token, rng: Rng):
        """Token side, first message (None where the token sends nothing)."""
        raise NotImplementedError

    def rs_process(self, auth: Authority, ent: int, request, rng: Rng):
        """Station side; returns ``(response, revocation entry)``."""
        raise NotImplementedError

    def finish(self, token, response, rng: Rng | None = None) -> tuple[int, bytes]:
        """Token side, last step; returns ``(ent_H, revocation entry)``."""
        raise NotImplementedError

    def register(self, auth: Authority, token, ent: int, rng: Rng) -> bytes:
        """Full honest registration; returns the revocation entry."""
        request = self.prepare(token, rng)
        response, rev = self.rs_process(auth, ent, request, rng)
        self.finish(token, response, rng)
        return rev

    def clone(self, token) -> Any:
        raise NotImplementedError

    def is_blocked(self, token, bl: Blocklist) -> bool:
        raise NotImplementedError

    # distribution -----------------------------------------------------------
    def empty_blocklist(self) -> Blocklist:
        return Blocklist(self.bl_kind)

    def showup(self, token, epoch: int, bl: Blocklist, rng: Rng):
        raise NotImplementedError

    def verify_ent(self, public, epoch: int, response, bl: Blocklist) -> Verdict:
        raise NotImplementedError

    def tag(self, response) -> bytes:
        raise NotImplementedError

    def record(self, response, bl: Blocklist) -> Record:
        return Record(response.ent, self.tag(response), response.proof, bl.digest)

    def response_from_bytes(self, data: bytes):
        raise NotImplementedError

    # auditing ---------------------------------------------------------------
    def opening(self, rec: Record):
        raise NotImplementedError

    def gen_audit(self, log: TransactionLog, epoch: int) -> tuple[int, AuditProof]:
        return gen_audit(log.records(epoch), self.opening, self.include_h_bl)

    def entry_ok(self, public, epoch: int, bl: Blocklist, proof: AuditProof):
        raise NotImplementedError

    def auditor_verify(self, public, epoch: int, ent_sum: int, proof: AuditProof, bl: Blocklist) -> Verdict:
        if self.include_h_bl and proof.entries and proof.h_bl != bl.digest:
            return Verdict.reject("h_bl")
        return auditor_verify(self.pc, ent_sum, proof, self.entry_ok(public, epoch, bl, proof))

    def audit_to_bytes(self, proof: AuditProof) -> bytes:
        w = Writer().u8(FORMAT_VERSION).u8(int(self.bl_kind)).scalar(proof.r_sum)
        w.blob(proof.h_bl or b"").u32(len(proof.entries))
        for e in proof.entries:
            w.blob(self._entry_proof_bytes(e.proof)).blob(e.tag).g1(e.com)
        return w.getvalue()

    def audit_from_bytes(self, data: bytes) -> AuditProof:
        rd = Reader(data)
        if rd.u8() != FORMAT_VERSION:
            raise FormatError("unsupported audit proof version")
        if rd.u8() != int(self.bl_kind):
            raise FormatError("audit proof belongs to the other token system")
        r_sum = rd.scalar(ORDER)
        h_bl = rd.blob() or None
        entries = tuple(
            AuditEntry(self._entry_proof_from_bytes(rd.blob()), rd.blob(), rd.g1())
            for _ in range(rd.u32())
        )
        rd.done()
        return AuditProof(r_sum, entries, h_bl)

    def _entry_proof_bytes(self, p) -> bytes:
        raise NotImplementedError

    def _entry_proof_from_bytes(self, data: bytes):
        raise NotImplementedError

    # persistence ------------------------------------------------------------
    def auth_to_bytes(self, auth: Authority) -> bytes:
        return Writer().blob(auth.secret.to_bytes()).blob(auth.public.to_bytes()).getvalue()

    def auth_from_bytes(self, data: bytes) -> Authority:
        rd = Reader(data)
        secret, public = rd.blob(), rd.blob()
        rd.done()
        return Authority(self._secret_cls.from_bytes(secret), self._public_cls.from_bytes(public))

    def token_to_bytes(self, token) -> bytes:
        return token.to_bytes()

    def token_from_bytes(self, data: bytes):
        return self._token_cls.from_bytes(data)

    def record_to_bytes(self, rec: Record) -> bytes:
        return Writer().scalar(rec.ent).blob(rec.tag).blob(rec.proof.to_bytes()).blob(rec.h_bl).getvalue()

    def record_from_bytes(self, data: bytes) -> Record:
        rd = Reader(data)
        ent, tag = rd.scalar(ORDER), rd.blob()
        prd = Reader(rd.blob())
        proof = self._ent_proof_cls.read(prd)
        prd.done()
        h_bl = rd.blob()
        rd.done()
        return Record(ent, tag, proof, h_bl)


class CardScheme(Scheme):
    name = "card"
    bl_kind = BlocklistKind.CARD
    include_h_bl = True
    _secret_cls, _public_cls = SigningKey, VerifyKey
    _token_cls, _ent_proof_cls = C.CardState, C.CardEntProof

    def setup(self, rng: Rng) -> Authority:
        sk, pk = sig_gen(rng)
        return Authority(sk, pk)

    def new_token(self, public) -> C.CardState:
        return C.card_setup(public)

    def prepare(self, token, rng):
        return None

    def rs_process(self, auth, ent, request, rng):
        return C.rs_process_reg_card(auth.secret, ent, rng)

    def finish(self, token, response, rng=None):
        C.card_finish_reg(token, response, rng)
        return response.ent, bytes(response.v)

    def clone(self, token: C.CardState) -> C.CardState:
        return C.card_clone(token, C.card_setup(token.pk), owner_authenticated=True)

    def is_blocked(self, token: C.CardState, bl: Blocklist) -> bool:
        return token._v in bl

    def showup(self, token, epoch, bl, rng):
        return C.card_showup(token, epoch, bl, rng, self.pc)[1]

    def verify_ent(self, public, epoch, response, bl):
        return C.ds_verify_ent_card(public, epoch, response, bl, self.pc)

    def tag(self, response) -> bytes:
        return response.tag

    def response_from_bytes(self, data: bytes):
        return C.CardResponse.from_bytes(data)

    def opening(self, rec: Record):
        return rec.proof.r, rec.proof.com, rec.proof.sigma

    def entry_ok(self, public, epoch, bl, proof):
        h_bl = proof.h_bl

        def ok(entry: AuditEntry) -> bool:
            return C.card_audit_entry_ok(public, epoch, h_bl, entry.proof, entry.tag, entry.com)

        return ok

    def _entry_proof_bytes(self, p) -> bytes:
        return bytes(p)

    def _entry_proof_from_bytes(self, data: bytes):
        if len(data) != SIG_LEN:
            raise FormatError("card audit entries carry a 64-byte signature")
        return data


class PhoneScheme(Scheme):
    name = "phone"
    bl_kind = BlocklistKind.PHONE
    include_h_bl = False
    _secret_cls, _public_cls = ps.PSSecretKey, ps.PSPublicKey
    _token_cls, _ent_proof_cls = P.PhoneState, P.PhoneEntProof

    def setup(self, rng: Rng) -> Authority:
        sk, pk = ps.abc_gen(3, rng)
        return Authority(sk, pk)

    def new_token(self, public) -> P.PhoneState:
        return P.phone_setup(public)

    def prepare(self, token, rng):
        return P.phone_prepare_reg(token, rng)[0]

    def rs_process(self, auth, ent, request, rng):
        response, rev = P.rs_process_reg_phone(auth.secret, auth.public, ent, request, rng)
        return response, rev.to_bytes()

    def finish(self, token, response, rng=None):
        _, ent, rev = P.phone_finish_reg(token, response)
        return ent, rev.to_bytes()

    def clone(self, token: P.PhoneState) -> P.PhoneState:
        return token.clone()

    def is_blocked(self, token: P.PhoneState, bl: Blocklist) -> bool:
        return blocked(token.r_H, bl.pairs)

    def showup(self, token, epoch, bl, rng):
        return P.phone_showup(token, epoch, bl, rng, self.pc)[1]

    def verify_ent(self, public, epoch, response, bl):
        return P.ds_verify_ent_phone(public, epoch, response, bl, self.pc)

    def tag(self, response) -> bytes:
        return response.tag_bytes

    def response_from_bytes(self, data: bytes):
        return P.PhoneResponse.from_bytes(data)

    def opening(self, rec: Record):
        return rec.proof.r, rec.proof.com, rec.proof.pi_s

    def entry_ok(self, public, epoch, bl, proof):
        def ok(entry: AuditEntry) -> bool:
            try:
                tau = g1_from_bytes(entry.tag)
            except FormatError:
                return False
            return bool(verify_showup_proof(public, epoch, tau, entry.com, entry.proof, bl, self.pc))

        return ok

    def _entry_proof_bytes(self, p: ShowupProof) -> bytes:
        return p.to_bytes()

    def _entry_proof_from_bytes(self, data: bytes):
        return ShowupProof.from_bytes(data)


SCHEMES = {"card": CardScheme, "phone": PhoneScheme}


def get_scheme(name: str) -> Scheme:
    try:
        return SCHEMES[name]()
    except KeyError:
        raise ValueError(f"unknown system {name!r}; choose card or phone") from None
