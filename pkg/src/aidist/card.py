"""Smart-card token system.

The card is a trusted execution environment: it holds the registration
station's signing key and a household PRF key, refuses to show up twice in
a period, and refuses when its revocation value is blocklisted.  Its
internals are reachable only through the functions below.
"""

from __future__ import annotations

from dataclasses import dataclass

from aidist.core import (
    AbortReason,
    Blocklist,
    BlocklistKind,
    SessionToken,
    Verdict,
    check_entitlement,
)
from aidist.crypto.encoding import (
    FORMAT_VERSION,
    FormatError,
    Reader,
    Writer,
    epoch_to_bytes,
)
from aidist.crypto.group import ORDER
from aidist.crypto.pedersen import PedersenParams, pc_commit, pc_gen
from aidist.crypto.prf import KEY_LEN, prf_eval
from aidist.crypto.rng import Rng
from aidist.crypto.signature import SIG_LEN, SigningKey, VerifyKey, sig_sign, sig_verify

V_LEN = 32


class CardError(Exception):
    pass


def audit_message(tag: bytes, epoch: int, com, h_bl: bytes) -> bytes:
    """``tau_H || eps || Com_ent || h_BL``, each field length-prefixed."""
    return Writer().blob(tag).blob(epoch_to_bytes(epoch)).blob(
        Writer().g1(com).getvalue()
    ).blob(h_bl).getvalue()


# -- messages ---------------------------------------------------------------


@dataclass(frozen=True)
class CardRegResponse:
    """Sent over the secure registration channel: ``(sk, ent_H, v_H)``."""

    sk: SigningKey
    ent: int
    v: bytes

    def __repr__(self) -> str:
        return f"CardRegResponse(ent={self.ent})"

    def to_bytes(self) -> bytes:
        return Writer().raw(self.sk.to_bytes()).scalar(self.ent).raw(self.v).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CardRegResponse":
        r = Reader(data)
        out = cls(SigningKey(r.scalar(ORDER)), r.scalar(ORDER), r.raw(V_LEN))
        r.done()
        return out


@dataclass(frozen=True)
class CardEntProof:
    """``pi_ent = (sigma_aud, eps, Com_ent, r)``."""

    sigma: bytes
    epoch: int
    com: object
    r: int

    def to_bytes(self) -> bytes:
        return Writer().raw(self.sigma).u64(self.epoch).g1(self.com).scalar(self.r).getvalue()

    @classmethod
    def read(cls, rd: Reader) -> "CardEntProof":
        return cls(rd.raw(SIG_LEN), rd.u64(), rd.g1(), rd.scalar(ORDER))


@dataclass(frozen=True)
class CardResponse:
    ent: int | None
    tag: bytes | None
    proof: CardEntProof | None

    @property
    def aborted(self) -> bool:
        return self.tag is None

    @classmethod
    def abort(cls) -> "CardResponse":
        return cls(None, None, None)

    def to_bytes(self) -> bytes:
        if self.aborted:
            return Writer().u8(FORMAT_VERSION).u8(0).getvalue()
        w = Writer().u8(FORMAT_VERSION).u8(1).scalar(self.ent).raw(self.tag)
        return w.raw(self.proof.to_bytes()).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CardResponse":
        rd = Reader(data)
        if rd.u8() != FORMAT_VERSION:
            raise FormatError("unsupported card response version")
        flag = rd.u8()
        if flag == 0:
            rd.done()
            return cls.abort()
        if flag != 1:
            raise FormatError("bad response flag")
        ent, tag = rd.scalar(ORDER), rd.raw(32)
        proof = CardEntProof.read(rd)
        rd.done()
        return cls(ent, tag, proof)


# -- the card ---------------------------------------------------------------


class CardState(SessionToken):
    """Sealed card storage ``(eps_last, pk, sk, k_H, ent_H, v_H)``."""

    def __init__(self, pk: VerifyKey, *, transcript: bool = False) -> None:
        self.epoch_last = 0
        self.pk = pk
        self._sk: SigningKey | None = None
        self._k: bytes | None = None
        self._ent: int | None = None
        self._v: bytes | None = None
        self.last_abort_reason: AbortReason | None = None
        self.transcript: list[tuple[str, int, bytes]] | None = [] if transcript else None

    def __repr__(self) -> str:
        state = "registered" if self.registered else "blank"
        return f"CardState({state}, epoch_last={self.epoch_last})"

    @property
    def registered(self) -> bool:
        return self._sk is not None

    @property
    def ent(self) -> int | None:
        return self._ent

    def _log(self, direction: str, ins: int, payload: bytes) -> None:
        if self.transcript is not None:
            self.transcript.append((direction, ins, payload))

    def dump_transcript(self) -> str:
        """APDU-style framed lines: ``>> CLA INS P1 P2 Lc data`` / ``<< data SW``."""
        lines = []
        for direction, ins, payload in self.transcript or []:
            if direction == ">>":
                lines.append(f">> 80 {ins:02X} 00 00 {len(payload):04X} {payload.hex()}")
            else:
                lines.append(f"<< {payload.hex()} 9000")
        return "\n".join(lines)

    # persistence of the simulated secure element
    def to_bytes(self) -> bytes:
        w = Writer().u8(FORMAT_VERSION).u64(self.epoch_last).raw(self.pk.to_bytes())
        if not self.registered:
            return w.u8(0).getvalue()
        w.u8(1).raw(self._sk.to_bytes()).raw(self._k).scalar(self._ent).raw(self._v)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CardState":
        rd = Reader(data)
        if rd.u8() != FORMAT_VERSION:
            raise FormatError("unsupported card state version")
        epoch_last = rd.u64()
        card = cls(VerifyKey(rd.g1()))
        card.epoch_last = epoch_last
        if rd.u8():
            card._sk = SigningKey(rd.scalar(ORDER))
            card._k = rd.raw(KEY_LEN)
            card._ent = rd.scalar(ORDER)
            card._v = rd.raw(V_LEN)
        rd.done()
        return card


def card_setup(pk: VerifyKey, *, transcript: bool = False) -> CardState:
    return CardState(pk, transcript=transcript)


def rs_process_reg_card(
    sk: SigningKey, ent: int, rng: Rng | None = None
) -> tuple[CardRegResponse, bytes]:
    """Registration station: draw ``v_H`` and package ``(sk, ent_H, v_H)``."""
    check_entitlement(ent)
    v = (rng or Rng()).bytes(V_LEN)
    return CardRegResponse(sk, ent, v), v


def card_finish_reg(state: CardState, response: CardRegResponse, rng: Rng | None = None) -> CardState:
    with state.session():
        if state.registered:
            raise CardError("card is already registered")
        if response.sk.public() != state.pk:
            raise CardError("installed key does not match the card's public key")
        state._log(">>", 0x10, response.to_bytes())
        state._sk = response.sk
        state._ent = check_entitlement(response.ent)
        state._v = bytes(response.v)
        state._k = (rng or Rng()).bytes(KEY_LEN)
        return state


def card_clone(
    source: CardState,
    target: CardState,
    owner_authenticated: bool,
    allow_after_distribution: bool = False,
) -> CardState:
    """Card-whispering: copy the household state onto a blank card."""
    if not owner_authenticated:
        raise CardError("owner authentication failed")
    if not source.registered:
        raise CardError("source card is not registered")
    if target.registered:
        raise CardError("target card is already registered")
    if source.epoch_last > 0 and not allow_after_distribution:
        raise CardError("cloning is only allowed before distribution starts")
    if source is target:
        raise CardError("source and target are the same card")
    with source.session(), target.session():
        target.pk = source.pk
        target._sk, target._k, target._ent, target._v = source._sk, source._k, source._ent, source._v
        target.epoch_last = source.epoch_last
    return target


def card_showup(
    state: CardState,
    epoch: int,
    bl: Blocklist,
    rng: Rng | None = None,
    pc: PedersenParams | None = None,
) -> tuple[CardState, CardResponse]:
    if bl.kind != BlocklistKind.CARD:
        raise ValueError("card tokens take a card blocklist")
    with state.session():
        if not state.registered:
            raise CardError("card is not registered")
        state._log(">>", 0x20, epoch_to_bytes(epoch) + bl.digest)
        reason = None
        if state._v in bl:
            reason = AbortReason.BLOCKED
        elif epoch <= state.epoch_last:
            reason = AbortReason.STALE_EPOCH
        state.last_abort_reason = reason
        if reason is not None:
            out = CardResponse.abort()
            state._log("<<", 0x20, out.to_bytes())
            return state, out
        pc = pc or pc_gen()
        tag = prf_eval(state._k, epoch)
        r = (rng or Rng()).scalar()
        com = pc_commit(pc, state._ent, r)
        sigma = sig_sign(state._sk, audit_message(tag, epoch, com, bl.digest))
        state.epoch_last = epoch
        out = CardResponse(state._ent, tag, CardEntProof(sigma, epoch, com, r))
        state._log("<<", 0x20, out.to_bytes())
        return state, out


def ds_verify_ent_card(
    pk: VerifyKey,
    epoch: int,
    response: CardResponse,
    bl: Blocklist,
    pc: PedersenParams | None = None,
) -> Verdict:
    """Signature over the signed statement, then the commitment opening."""
    pc = pc or pc_gen()
    try:
        if response.aborted or response.proof is None or response.ent is None:
            return Verdict.reject("aborted")
        p = response.proof
        if p.epoch != epoch:
            return Verdict.reject("epoch")
        if not sig_verify(pk, audit_message(response.tag, epoch, p.com, bl.digest), p.sigma):
            return Verdict.reject("signature")
        if pc_commit(pc, response.ent, p.r) != p.com:
            return Verdict.reject("opening")
    except (FormatError, TypeError, AttributeError, ValueError):
        return Verdict.reject("malformed")
    return Verdict.accept()


def card_audit_entry_ok(pk: VerifyKey, epoch: int, h_bl: bytes, sigma: bytes, tag: bytes, com) -> bool:
    try:
        return sig_verify(pk, audit_message(tag, epoch, com, h_bl), sigma)
    except (FormatError, TypeError, AttributeError, ValueError):
        return False
