"""Scripted adversaries.

Attacks only touch the game through the oracles they are handed, plus the
public library code any attacker could run (proof builders, serializers).
Baselines are the naive distinguishers whose success rate should sit at
one half.
"""

from __future__ import annotations

from dataclasses import replace

from aidist.card import CardEntProof, CardResponse
from aidist.core import AuditEntry, AuditProof, Blocklist, bl_revoke
from aidist.crypto.encoding import g1_to_bytes
from aidist.crypto.group import ORDER, bls12_381
from aidist.crypto.pedersen import pc_commit
from aidist.crypto.rng import Rng
from aidist.games.experiments import Adversary
from aidist.games.oracles import Oracles
from aidist.phone import PhoneEntProof, PhoneResponse, revocation_token
from aidist.ps import randomize
from aidist.showup import NonRevocationClause, ShowupProof, Witness, build_proof, household_tag

EPS = 1


# -- helpers ------------------------------------------------------------------


def decoy_blocklist(scheme, rng: Rng, n: int = 1) -> Blocklist:
    """Entries that belong to nobody in the game."""
    bl = scheme.empty_blocklist()
    for _ in range(n):
        if scheme.name == "card":
            bl = bl_revoke(bl, rng.bytes(32))
        else:
            bl = bl_revoke(bl, revocation_token(rng.nonzero_scalar()).to_bytes())
    return bl


def audit_from(scheme, responses, bl: Blocklist, *, claim_delta: int = 0, r_delta: int = 0):
    """Hand-assembled ``(ent_sum, pi_aud)``; no duplicate filtering."""
    entries, ent_sum, r_sum = [], 0, 0
    for resp in responses:
        r, com, pe = scheme.opening(scheme.record(resp, bl))
        entries.append(AuditEntry(pe, scheme.tag(resp), com))
        ent_sum += resp.ent
        r_sum = (r_sum + r) % ORDER
    h_bl = bl.digest if scheme.include_h_bl else None
    return ent_sum + claim_delta, AuditProof((r_sum + r_delta) % ORDER, tuple(entries), h_bl)


def with_com(resp, com, ent=None):
    """Same response with the commitment (and optionally the claimed ent) replaced."""
    ent = resp.ent if ent is None else ent
    return replace(resp, ent=ent, proof=replace(resp.proof, com=com))


def random_response(scheme, rng: Rng, epoch: int, ent: int):
    """Random tag and proof around a commitment the forger can open."""
    pc = scheme.pc
    r = rng.scalar()
    com = pc_commit(pc, ent, r)
    if scheme.name == "card":
        return CardResponse(ent, rng.bytes(32), CardEntProof(rng.bytes(64), epoch, com, r))
    g = bls12_381().g1
    rnd = lambda: g ** rng.nonzero_scalar()  # noqa: E731
    proof = ShowupProof(rnd(), rnd(), rnd(), rng.scalar(), *(rng.scalar() for _ in range(6)), ())
    return PhoneResponse(ent, rnd(), PhoneEntProof(proof, com, r))


def mal_phone(o: Oracles, id, ent: int, rng: Rng):
    """Register a malicious household; the adversary keeps the raw phone state."""
    token = o.scheme.new_token(o.public)
    request = o.scheme.prepare(token, rng)
    response = o.mal_user_reg(id, ent, request)
    o.scheme.finish(token, response)
    return token


def forge_phone(
    scheme,
    token,
    epoch: int,
    bl: Blocklist,
    rng: Rng,
    *,
    claim_ent: int | None = None,
    k: int | None = None,
    clause_x: int | None = None,
    allow_revoked: bool = False,
) -> PhoneResponse:
    """Phone response built from an explicitly chosen (possibly inconsistent) witness."""
    pc, cred = scheme.pc, token.cred
    k = token.k if k is None else k
    e = token.ent if claim_ent is None else claim_ent
    tau = household_tag(k, epoch)
    r = rng.scalar()
    com = pc_commit(pc, e, r)
    t_s = rng.scalar()
    s1, s2 = randomize(cred, rng.nonzero_scalar(), t_s)
    wit = Witness(k=k, e=e, x=token.r_H, r=r, t_s=t_s, s=rng.scalar(), clause_x=clause_x)
    proof = build_proof(token.pk, pc, epoch, tau, com, bl, s1, s2, wit, rng, allow_revoked=allow_revoked)
    return PhoneResponse(e, tau, PhoneEntProof(proof, com, r))


def with_clauses(resp: PhoneResponse, clauses) -> PhoneResponse:
    pi_s = replace(resp.proof.pi_s, clauses=tuple(clauses))
    return replace(resp, proof=replace(resp.proof, pi_s=pi_s))


def hamming(a: bytes, b: bytes) -> int:
    n = max(len(a), len(b))
    a, b = a.ljust(n, b"\0"), b.ljust(n, b"\0")
    return sum(bin(x ^ y).count("1") for x, y in zip(a, b))


class _Kit(Adversary):
    ent = 5


# -- auditability --------------------------------------------------------------


class AudDuplicate(_Kit):
    name, experiment = "aud-record-duplication", "aud"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", self.ent)
        r = o.showup("a", EPS, bl)
        s, p = audit_from(o.scheme, [r, r], bl)
        return EPS, s, p, bl


class AudSplice(_Kit):
    name, experiment = "aud-cross-epoch-splice", "aud"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", self.ent)
        o.honest_reg("b", self.ent + 1)
        old = o.showup("a", EPS, bl)
        new = o.showup("b", EPS + 1, bl)
        s, p = audit_from(o.scheme, [old, new], bl)
        return EPS + 1, s, p, bl


class AudInflate(_Kit):
    name, experiment = "aud-inflated-sum", "aud"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", self.ent)
        s, p = audit_from(o.scheme, [o.showup("a", EPS, bl)], bl, claim_delta=1 + rng.below(100))
        return EPS, s, p, bl


class AudForgedOpening(_Kit):
    name, experiment = "aud-forged-opening", "aud"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", self.ent)
        s, p = audit_from(
            o.scheme, [o.showup("a", EPS, bl)], bl, claim_delta=1 + rng.below(100), r_delta=rng.nonzero_scalar()
        )
        return EPS, s, p, bl


class AudCommitSubstitution(_Kit):
    name, experiment = "aud-commitment-substitution", "aud"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", self.ent)
        resp = o.showup("a", EPS, bl)
        bigger = self.ent + 1 + rng.below(100)
        forged = with_com(resp, pc_commit(o.scheme.pc, bigger, resp.proof.r), bigger)
        s, p = audit_from(o.scheme, [forged], bl)
        return EPS, s, p, bl


class AudRandomForgery(_Kit):
    name, experiment = "aud-random-forgery", "aud"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        s, p = audit_from(o.scheme, [random_response(o.scheme, rng, EPS, 1 + rng.below(100))], bl)
        return EPS, s, p, bl


class AudCloneDoubleDip(_Kit):
    name, experiment = "aud-clone-double-dip", "aud"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", self.ent, members=2)
        r0, r1 = o.showup("a", EPS, bl, member=0), o.showup("a", EPS, bl, member=1)
        s, p = audit_from(o.scheme, [r0, r1], bl)
        return EPS, s, p, bl


class AudStaleReplay(_Kit):
    """Last epoch's record relabelled into the current epoch's audit."""

    name, experiment = "aud-stale-epoch-replay", "aud"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", self.ent)
        old = o.showup("a", EPS, bl)
        new = o.showup("a", EPS + 1, bl)
        if o.scheme.name == "card":
            old = replace(old, proof=replace(old.proof, epoch=EPS + 1))
        s, p = audit_from(o.scheme, [old, new], bl)
        return EPS + 1, s, p, bl


class AudMalUserTwice(_Kit):
    name, experiment, systems = "aud-mal-user-twice", "aud", ("phone",)

    def play(self, o, rng):
        bl = o.empty_blocklist()
        tok = mal_phone(o, "m", self.ent, rng)
        r0 = forge_phone(o.scheme, tok, EPS, bl, rng)
        r1 = forge_phone(o.scheme, tok, EPS, bl, rng)
        s, p = audit_from(o.scheme, [r0, r1], bl)
        return EPS, s, p, bl


class AudMalTagForge(_Kit):
    """Second showup under a fresh household secret to dodge duplicate detection."""

    name, experiment, systems = "aud-mal-fresh-tag", "aud", ("phone",)

    def play(self, o, rng):
        bl = o.empty_blocklist()
        tok = mal_phone(o, "m", self.ent, rng)
        r0 = forge_phone(o.scheme, tok, EPS, bl, rng)
        r1 = forge_phone(o.scheme, tok, EPS, bl, rng, k=rng.nonzero_scalar())
        s, p = audit_from(o.scheme, [r0, r1], bl)
        return EPS, s, p, bl


# -- security against an honest station ----------------------------------------


class SecReplay(_Kit):
    name, experiment = "sec-record-replay", "sec"

    def play(self, o, rng):
        o.honest_reg("a", self.ent)
        r = o.showup("a", EPS, o.empty_blocklist())
        o.verify_ent(EPS, r)
        o.verify_ent(EPS, r)
        return EPS


class SecCloneDoubleDip(_Kit):
    name, experiment = "sec-clone-double-dip", "sec"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", self.ent, members=3)
        for m in range(3):
            o.verify_ent(EPS, o.showup("a", EPS, bl, member=m))
        return EPS


class SecStaleReplay(_Kit):
    name, experiment = "sec-stale-epoch-replay", "sec"

    def play(self, o, rng):
        o.honest_reg("a", self.ent)
        r = o.showup("a", EPS, o.empty_blocklist())
        o.verify_ent(EPS, r)
        if o.scheme.name == "card":
            r = replace(r, proof=replace(r.proof, epoch=EPS + 1))
        o.verify_ent(EPS + 1, r)
        return EPS + 1


class SecInflate(_Kit):
    name, experiment = "sec-inflated-entitlement", "sec"

    def play(self, o, rng):
        o.honest_reg("a", self.ent)
        r = o.showup("a", EPS, o.empty_blocklist())
        o.verify_ent(EPS, replace(r, ent=r.ent + 1 + rng.below(100)))
        return EPS


class SecCommitSubstitution(_Kit):
    name, experiment = "sec-commitment-substitution", "sec"

    def play(self, o, rng):
        o.honest_reg("a", self.ent)
        r = o.showup("a", EPS, o.empty_blocklist())
        bigger = r.ent + 1 + rng.below(100)
        o.verify_ent(EPS, with_com(r, pc_commit(o.scheme.pc, bigger, r.proof.r), bigger))
        return EPS


class SecRandomForgery(_Kit):
    name, experiment = "sec-random-forgery", "sec"

    def play(self, o, rng):
        for _ in range(3):
            o.verify_ent(EPS, random_response(o.scheme, rng, EPS, 1 + rng.below(100)))
        return EPS


class SecBlocklistDowngrade(_Kit):
    """Proof made for some other blocklist, replayed at the station."""

    name, experiment = "sec-blocklist-downgrade", "sec"

    def play(self, o, rng):
        o.honest_reg("a", self.ent)
        o.verify_ent(EPS + 1, o.showup("a", EPS, o.empty_blocklist()))
        other = decoy_blocklist(o.scheme, rng, 2)
        r = o.showup("a", EPS + 1, other)
        o.verify_ent(EPS + 1, r)
        o.verify_ent(EPS + 1, r)
        return EPS + 1


class SecMalUserTwice(_Kit):
    name, experiment, systems = "sec-mal-user-twice", "sec", ("phone",)

    def play(self, o, rng):
        bl = o.empty_blocklist()
        tok = mal_phone(o, "m", self.ent, rng)
        for _ in range(3):
            o.verify_ent(EPS, forge_phone(o.scheme, tok, EPS, bl, rng))
        return EPS


class SecMalTagForge(_Kit):
    name, experiment, systems = "sec-mal-fresh-tag", "sec", ("phone",)

    def play(self, o, rng):
        bl = o.empty_blocklist()
        tok = mal_phone(o, "m", self.ent, rng)
        o.verify_ent(EPS, forge_phone(o.scheme, tok, EPS, bl, rng))
        o.verify_ent(EPS, forge_phone(o.scheme, tok, EPS, bl, rng, k=rng.nonzero_scalar()))
        return EPS


class SecMalInflate(_Kit):
    """Proof built with a larger entitlement than the credential carries."""

    name, experiment, systems = "sec-mal-inflated-witness", "sec", ("phone",)

    def play(self, o, rng):
        tok = mal_phone(o, "m", self.ent, rng)
        o.verify_ent(EPS, forge_phone(o.scheme, tok, EPS, o.empty_blocklist(), rng, claim_ent=self.ent + 10))
        return EPS


# -- revocation -----------------------------------------------------------------


class _RevHonest(_Kit):
    """Registers one honest household and revokes it before the epoch opens."""

    def register(self, o, rng):
        o.honest_reg("a", self.ent)
        o.honest_reg("b", self.ent)
        self.early = o.showup("a", EPS, o.empty_blocklist())
        o.revoke("a")


class RevBlockedShowup(_RevHonest):
    name, experiment = "rev-blocked-showup", "rev"

    def play(self, o, rng):
        bl = o.station_blocklist
        o.verify_ent(EPS + 1, o.showup("a", EPS + 1, bl))
        o.verify_ent(EPS + 1, o.showup("b", EPS + 1, bl))
        return EPS + 1


class RevHonestDowngrade(_RevHonest):
    name, experiment = "rev-blocklist-downgrade", "rev"

    def play(self, o, rng):
        o.verify_ent(EPS + 1, o.showup("a", EPS + 1, o.empty_blocklist()))
        o.verify_ent(EPS + 1, o.showup("a", EPS + 2, decoy_blocklist(o.scheme, rng, len(o.station_blocklist))))
        return EPS + 1


class RevReplayPreRevocation(_RevHonest):
    name, experiment = "rev-replay-pre-revocation", "rev"

    def play(self, o, rng):
        o.verify_ent(EPS, self.early)
        return EPS


class _RevMal(_Kit):
    """Phone only: a malicious household that the station then revokes."""

    systems = ("phone",)

    def register(self, o, rng):
        self.tok = mal_phone(o, "m", self.ent, rng)
        self.early = forge_phone(o.scheme, self.tok, EPS, o.empty_blocklist(), rng)
        o.honest_reg("h", self.ent)

    def station_bl(self, o) -> Blocklist:
        return o.station_blocklist

    def own_index(self, o) -> int:
        own = revocation_token(self.tok.r_H).pair
        return next(j for j, p in enumerate(self.station_bl(o).pairs) if p == own)


class RevMalReplay(_RevMal):
    name, experiment = "rev-mal-replay", "rev"

    def play(self, o, rng):
        o.verify_ent(EPS, self.early)
        return EPS


class RevMalDowngrade(_RevMal):
    """Own entry swapped for a decoy so the prover's revocation check passes."""

    name, experiment = "rev-mal-blocklist-swap", "rev"

    def play(self, o, rng):
        bl = self.station_bl(o)
        own = revocation_token(self.tok.r_H).to_bytes()
        fake = Blocklist(bl.kind, tuple(e for e in bl.entries if e != own) + (decoy_blocklist(o.scheme, rng).entries))
        o.verify_ent(EPS, forge_phone(o.scheme, self.tok, EPS, fake, rng))
        return EPS


class RevClauseDrop(_RevMal):
    name, experiment = "rev-clause-drop", "rev"

    def play(self, o, rng):
        bl = self.station_bl(o)
        r = forge_phone(o.scheme, self.tok, EPS, bl, rng, allow_revoked=True)
        j = self.own_index(o)
        cl = list(r.proof.pi_s.clauses)
        o.verify_ent(EPS, with_clauses(r, cl[:j] + cl[j + 1:]))
        return EPS


class RevClauseSwap(_RevMal):
    name, experiment = "rev-clause-swap", "rev"

    def play(self, o, rng):
        bl = self.station_bl(o)
        r = forge_phone(o.scheme, self.tok, EPS, bl, rng, allow_revoked=True)
        j = self.own_index(o)
        cl = list(r.proof.pi_s.clauses)
        k = (j + 1) % len(cl)
        cl[j] = cl[k]
        o.verify_ent(EPS, with_clauses(r, cl))
        return EPS


class RevForgedV(_RevMal):
    name, experiment = "rev-forged-v", "rev"

    def play(self, o, rng):
        bl = self.station_bl(o)
        r = forge_phone(o.scheme, self.tok, EPS, bl, rng, allow_revoked=True)
        j = self.own_index(o)
        cl = list(r.proof.pi_s.clauses)
        cl[j] = NonRevocationClause(bls12_381().g1 ** rng.nonzero_scalar(), cl[j].z_alpha, cl[j].z_rho, cl[j].z_gamma)
        o.verify_ent(EPS, with_clauses(r, cl))
        return EPS


class RevMixedWitness(_RevMal):
    """Clauses proved for a fresh exponent instead of the credential's."""

    name, experiment = "rev-mixed-witness", "rev"

    def play(self, o, rng):
        bl = self.station_bl(o)
        o.verify_ent(EPS, forge_phone(o.scheme, self.tok, EPS, bl, rng, clause_x=rng.nonzero_scalar()))
        return EPS


class RevForcedProof(_RevMal):
    name, experiment = "rev-forced-proof", "rev"

    def play(self, o, rng):
        bl = self.station_bl(o)
        o.verify_ent(EPS, forge_phone(o.scheme, self.tok, EPS, bl, rng, allow_revoked=True))
        return EPS


# -- IND ------------------------------------------------------------------------


class _IndBase(Adversary):
    experiment = "ind"
    ents = (5, 5)

    def enroll(self, o: Oracles, rng: Rng):
        self.revs = {}
        for i, ent in enumerate(self.ents):
            req = o.prepare_reg(i)
            resp, self.revs[i] = o.scheme.rs_process(self.auth, ent, req, rng)
            o.finish_reg(i, resp)


class IndBlindGuess(_IndBase):
    """Does nothing and always answers 0."""

    name = "ind-blind-guess"

    def play(self, o, rng):
        self.enroll(o, rng)
        return 0, 1, EPS, o.empty_blocklist()


class IndByteCompare(_IndBase):
    """Hamming distance of the challenge to one earlier response from each candidate."""

    name = "ind-byte-compare"

    def play(self, o, rng):
        self.enroll(o, rng)
        bl = o.empty_blocklist()
        self.refs = [o.showup(i, EPS, bl).to_bytes() for i in (0, 1)]
        return 0, 1, EPS + 1, bl

    def guess(self, resp, rng):
        data = resp.to_bytes()
        d0, d1 = (hamming(data, ref) for ref in self.refs)
        return 0 if d0 <= d1 else 1


class IndComParity(_IndBase):
    """Histogram probe: reads one bit of the commitment encoding."""

    name = "ind-com-parity"

    def play(self, o, rng):
        self.enroll(o, rng)
        return 0, 1, EPS, o.empty_blocklist()

    def guess(self, resp, rng):
        return g1_to_bytes(resp.proof.com)[-1] & 1


class IndUnequalEnt(_IndBase):
    name, ents = "ind-unequal-entitlement", (5, 6)

    def play(self, o, rng):
        self.enroll(o, rng)
        return 0, 1, EPS, o.empty_blocklist()

    def guess(self, resp, rng):
        return 0 if resp.ent == self.ents[0] else 1


class IndOneRevoked(_IndBase):
    name = "ind-one-revoked"

    def play(self, o, rng):
        self.enroll(o, rng)
        return 0, 1, EPS, bl_revoke(o.empty_blocklist(), self.revs[0])

    def guess(self, resp, rng):
        return 1 if resp.aborted else 0


class IndEpochWindow(_IndBase):
    name = "ind-epoch-window"

    def play(self, o, rng):
        self.enroll(o, rng)
        o.showup(0, EPS + 1, o.empty_blocklist())
        return 0, 1, EPS + 1, o.empty_blocklist()

    def guess(self, resp, rng):
        return 0 if resp.aborted else 1


# -- ENT ------------------------------------------------------------------------


class _EntBase(Adversary):
    """Station 0 sees entitlements (3, 5) and station 1 sees (5, 3)."""

    experiment = "ent"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        for id, ent in (("a", 3), ("b", 5), ("c", 5), ("d", 3)):
            o.honest_reg(id, ent)
        o.showup_two("a", "b", EPS, bl)
        o.showup_two("c", "d", EPS, bl)
        return EPS


class EntBlindGuess(_EntBase):
    name = "ent-blind-guess"


class EntByteCompare(_EntBase):
    """First entry's commitment against the randomness-free encodings of 3 and 5."""

    name = "ent-byte-compare"

    def play(self, o, rng):
        self.pc = o.scheme.pc
        return super().play(o, rng)

    def guess(self, proof, rng):
        pc = self.pc
        got = g1_to_bytes(proof.entries[0].com)
        d3 = hamming(got, g1_to_bytes(pc_commit(pc, 3, 0)))
        d5 = hamming(got, g1_to_bytes(pc_commit(pc, 5, 0)))
        return 0 if d3 <= d5 else 1


class EntCrossStation(Adversary):
    """Same household sent to both stations in one epoch."""

    name, experiment = "ent-cross-station-replay", "ent"

    def play(self, o, rng):
        bl = o.empty_blocklist()
        o.honest_reg("a", 3)
        o.honest_reg("b", 5)
        o.showup_two("a", "b", EPS, bl)
        o.showup_two("b", "a", EPS, bl)
        return EPS

    def guess(self, proof, rng):
        return 0 if len(proof.entries) == 1 else 1


ATTACKS: dict[str, type[Adversary]] = {
    cls.name: cls
    for cls in (
        AudDuplicate, AudSplice, AudInflate, AudForgedOpening, AudCommitSubstitution,
        AudRandomForgery, AudCloneDoubleDip, AudStaleReplay, AudMalUserTwice, AudMalTagForge,
        SecReplay, SecCloneDoubleDip, SecStaleReplay, SecInflate, SecCommitSubstitution,
        SecRandomForgery, SecBlocklistDowngrade, SecMalUserTwice, SecMalTagForge, SecMalInflate,
        RevBlockedShowup, RevHonestDowngrade, RevReplayPreRevocation,
        RevMalReplay, RevMalDowngrade, RevClauseDrop, RevClauseSwap, RevForgedV,
        RevMixedWitness, RevForcedProof,
        IndUnequalEnt, IndOneRevoked, IndEpochWindow, EntCrossStation,
    )
}
BASELINES: dict[str, type[Adversary]] = {
    cls.name: cls for cls in (IndBlindGuess, IndByteCompare, IndComParity, EntBlindGuess, EntByteCompare)
}
ALL_ADVERSARIES = {**ATTACKS, **BASELINES}


def kit(experiment: str, system: str) -> list[type[Adversary]]:
    return [c for c in ATTACKS.values() if c.experiment == experiment and system in c.systems]
