"""Smartphone token system.

The phone is untrusted, so its guarantees come from an anonymous
credential on ``(k_H, ent_H, r_H)`` and the conjunctive showup proof.  The
household secret ``k_H`` is hidden from the registration station; ``r_H``
is chosen by the station, so the phone only ever proves statements about
it.
"""

from __future__ import annotations

from dataclasses import dataclass

from petrelic.multiplicative.pairing import G1Element

from aidist import ps
from aidist.core import (
    AbortReason,
    Blocklist,
    BlocklistKind,
    SessionToken,
    Verdict,
    check_entitlement,
    phone_entry,
)
from aidist.crypto.encoding import FORMAT_VERSION, FormatError, Reader, Writer, g1_to_bytes
from aidist.crypto.group import ORDER, bls12_381
from aidist.crypto.pedersen import PedersenParams, pc_gen
from aidist.crypto.rng import Rng
from aidist.showup import (
    ENT_IDX,
    K_IDX,
    RH_IDX,
    ShowupProof,
    blocked,
    prove_showup,
    verify_showup,
)

HIDDEN = (K_IDX,)
ISSUER_IDX = (ENT_IDX, RH_IDX)


class PhoneError(Exception):
    pass


@dataclass(frozen=True)
class RevocationToken:
    """``(g1, g1^{r_H})``; added to the blocklist to revoke the household."""

    h: G1Element
    H: G1Element

    @property
    def pair(self) -> tuple[G1Element, G1Element]:
        return self.h, self.H

    def to_bytes(self) -> bytes:
        return phone_entry(self.h, self.H)

    @classmethod
    def from_bytes(cls, data: bytes) -> "RevocationToken":
        rd = Reader(data)
        out = cls(rd.g1(), rd.g1())
        rd.done()
        return out


def revocation_token(r_H: int) -> RevocationToken:
    g = bls12_381().g1
    return RevocationToken(g, g ** r_H)


@dataclass(frozen=True)
class PhoneRegResponse:
    """``(sigma', ent_H, r_H)``: 96 + 32 + 32 bytes."""

    blind: ps.BlindSignature
    ent: int
    r_H: int

    def __repr__(self) -> str:
        return f"PhoneRegResponse(ent={self.ent})"

    def to_bytes(self) -> bytes:
        return Writer().raw(self.blind.to_bytes()).scalar(self.ent).scalar(self.r_H).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PhoneRegResponse":
        rd = Reader(data)
        out = cls(ps.BlindSignature(rd.g1(), rd.g1()), rd.scalar(ORDER), rd.scalar(ORDER))
        rd.done()
        return out


@dataclass(frozen=True)
class PhoneEntProof:
    """``pi_ent = (pi_s, Com_ent, r)``."""

    pi_s: ShowupProof
    com: G1Element
    r: int

    def to_bytes(self) -> bytes:
        return Writer().blob(self.pi_s.to_bytes()).g1(self.com).scalar(self.r).getvalue()

    @classmethod
    def read(cls, rd: Reader) -> "PhoneEntProof":
        return cls(ShowupProof.from_bytes(rd.blob()), rd.g1(), rd.scalar(ORDER))


@dataclass(frozen=True)
class PhoneResponse:
    ent: int | None
    tag: G1Element | None
    proof: PhoneEntProof | None

    @property
    def aborted(self) -> bool:
        return self.tag is None

    @property
    def tag_bytes(self) -> bytes:
        return g1_to_bytes(self.tag)

    @classmethod
    def abort(cls) -> "PhoneResponse":
        return cls(None, None, None)

    def to_bytes(self) -> bytes:
        if self.aborted:
            return Writer().u8(FORMAT_VERSION).u8(0).getvalue()
        w = Writer().u8(FORMAT_VERSION).u8(1).scalar(self.ent).g1(self.tag)
        return w.raw(self.proof.to_bytes()).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PhoneResponse":
        rd = Reader(data)
        if rd.u8() != FORMAT_VERSION:
            raise FormatError("unsupported phone response version")
        flag = rd.u8()
        if flag == 0:
            rd.done()
            return cls.abort()
        if flag != 1:
            raise FormatError("bad response flag")
        ent, tag = rd.scalar(ORDER), rd.g1()
        proof = PhoneEntProof.read(rd)
        rd.done()
        return cls(ent, tag, proof)


class PhoneState(SessionToken):
    """``(eps_last, pk, C, k_H, ent_H, r_H)`` plus the pending issuance state."""

    def __init__(self, pk: ps.PSPublicKey) -> None:
        self.epoch_last = 0
        self.pk = pk
        self.cred: ps.Credential | None = None
        self._iss: ps.IssuanceState | None = None
        self.last_abort_reason: AbortReason | None = None

    def __repr__(self) -> str:
        state = "registered" if self.registered else ("pending" if self._iss else "blank")
        return f"PhoneState({state}, epoch_last={self.epoch_last})"

    @property
    def registered(self) -> bool:
        return self.cred is not None

    @property
    def k(self) -> int:
        return self.cred.attributes[K_IDX]

    @property
    def ent(self) -> int:
        return self.cred.attributes[ENT_IDX]

    @property
    def r_H(self) -> int:
        return self.cred.attributes[RH_IDX]

    def clone(self) -> "PhoneState":
        """Copy of the app state (a phone has no clone protection)."""
        other = PhoneState(self.pk)
        other.epoch_last, other.cred, other._iss = self.epoch_last, self.cred, self._iss
        return other

    def to_bytes(self) -> bytes:
        w = Writer().u8(FORMAT_VERSION).u64(self.epoch_last).blob(self.pk.to_bytes())
        if self.cred is not None:
            return w.u8(2).blob(self.cred.to_bytes()).getvalue()
        if self._iss is not None:
            return w.u8(1).scalar(self._iss.t).scalar(self._iss.hidden_attrs[K_IDX]).getvalue()
        return w.u8(0).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PhoneState":
        rd = Reader(data)
        if rd.u8() != FORMAT_VERSION:
            raise FormatError("unsupported phone state version")
        epoch_last = rd.u64()
        st = cls(ps.PSPublicKey.from_bytes(rd.blob()))
        st.epoch_last = epoch_last
        mode = rd.u8()
        if mode == 2:
            st.cred = ps.Credential.from_bytes(rd.blob())
        elif mode == 1:
            t, k = rd.scalar(ORDER), rd.scalar(ORDER)
            st._iss = ps.IssuanceState(t, {K_IDX: k})
        elif mode != 0:
            raise FormatError("bad phone state mode")
        rd.done()
        return st


def phone_setup(pk: ps.PSPublicKey) -> PhoneState:
    return PhoneState(pk)


def phone_prepare_reg(state: PhoneState, rng: Rng | None = None) -> tuple[ps.IssueRequest, PhoneState]:
    """Draw ``k_H`` and commit to it; only ``(C, pi)`` leave the phone."""
    rng = rng or Rng()
    with state.session():
        if state.registered:
            raise PhoneError("phone is already registered")
        k = rng.nonzero_scalar()
        req, iss = ps.abc_issue_request(state.pk, {K_IDX: k}, rng)
        state._iss = iss
        return req, state


def rs_process_reg_phone(
    sk: ps.PSSecretKey,
    pk: ps.PSPublicKey,
    ent: int,
    request: ps.IssueRequest,
    rng: Rng | None = None,
) -> tuple[PhoneRegResponse, RevocationToken]:
    """Blind-sign ``(k_H, ent_H, r_H)`` with a fresh ``r_H``.  Raises IssuanceError."""
    rng = rng or Rng()
    check_entitlement(ent)
    if tuple(request.hidden) != HIDDEN:
        raise ps.IssuanceError("request must hide exactly the household secret")
    r_H = rng.nonzero_scalar()
    blind = ps.abc_issue_sign(sk, pk, {ENT_IDX: ent, RH_IDX: r_H}, request, rng)
    return PhoneRegResponse(blind, ent, r_H), revocation_token(r_H)


def phone_finish_reg(
    state: PhoneState, response: PhoneRegResponse
) -> tuple[PhoneState, int, RevocationToken]:
    with state.session():
        if state.registered:
            raise PhoneError("phone is already registered")
        if state._iss is None:
            raise PhoneError("no registration in progress")
        try:
            cred = ps.abc_issue_unblind(
                state.pk, state._iss, response.blind, {ENT_IDX: response.ent, RH_IDX: response.r_H}
            )
        except ps.IssuanceError as exc:
            raise PhoneError(f"credential rejected: {exc}") from exc
        state.cred, state._iss = cred, None
        return state, response.ent, revocation_token(response.r_H)


def phone_showup(
    state: PhoneState,
    epoch: int,
    bl: Blocklist,
    rng: Rng | None = None,
    pc: PedersenParams | None = None,
) -> tuple[PhoneState, PhoneResponse]:
    if bl.kind != BlocklistKind.PHONE:
        raise ValueError("phone tokens take a phone blocklist")
    rng = rng or Rng()
    with state.session():
        if not state.registered:
            raise PhoneError("phone is not registered")
        x = state.r_H
        reason = None
        if epoch <= state.epoch_last:
            reason = AbortReason.STALE_EPOCH
        elif blocked(x, bl.pairs):
            reason = AbortReason.BLOCKED
        state.last_abort_reason = reason
        if reason is not None:
            return state, PhoneResponse.abort()
        r = rng.scalar()
        tag, com, pi_s = prove_showup(state.pk, state.cred, epoch, bl, r, rng, pc)
        state.epoch_last = epoch
        return state, PhoneResponse(state.ent, tag, PhoneEntProof(pi_s, com, r))


def ds_verify_ent_phone(
    pk: ps.PSPublicKey,
    epoch: int,
    response: PhoneResponse,
    bl: Blocklist,
    pc: PedersenParams | None = None,
) -> Verdict:
    if response.aborted or response.proof is None or response.ent is None:
        return Verdict.reject("aborted")
    p = response.proof
    return verify_showup(pk, epoch, response.ent, response.tag, p.com, p.r, p.pi_s, bl, pc or pc_gen())
