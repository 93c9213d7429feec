"""Conjunctive distribution proof for the smartphone token.

One Fiat-Shamir challenge covers four linked sigma protocols that share
their responses:

* PS possession of a credential on ``(k, e, x)`` (all three hidden),
* tag correctness ``tau = H(eps)^k``,
* commitment linkage ``Com = g1^e h^r``,
* non-revocation against every blocklist pair ``(h_j, H_j)``.

Non-revocation works on a fresh hiding commitment ``K = g1^x h^s`` to the
revocation exponent ``x = r_H``.  For each pair the prover publishes
``V_j = (h_j^x H_j^-1)^rho_j`` and proves knowledge of
``(alpha_j, rho_j, gamma_j)`` with

    V_j = h_j^alpha_j H_j^-rho_j        1 = g1^alpha_j h^gamma_j K^-rho_j

The second relation forces ``alpha_j = x rho_j``, so ``V_j != 1`` is exactly
``H_j != h_j^x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from petrelic.multiplicative.pairing import G1Element

from aidist.core import Blocklist, Verdict
from aidist.crypto.encoding import (
    FORMAT_VERSION,
    FormatError,
    Reader,
    Writer,
    epoch_to_bytes,
    gt_to_bytes,
)
from aidist.crypto.group import ORDER, hash_to_group, hash_to_scalar, mul2
from aidist.crypto.pedersen import PedersenParams, pc_commit, pc_gen
from aidist.crypto.rng import Rng
from aidist.ps import Credential, PSPublicKey, randomize, relation_announcement, relation_recompute

SHOWUP_DOMAIN = b"aidist/showup/v1"
TAG_DOMAIN = b"tag-v1"

# credential attribute layout
K_IDX, ENT_IDX, RH_IDX = 0, 1, 2

CLAUSE_LEN = 48 + 3 * 32
FIXED_LEN = 1 + 4 + 2 * 48 + 48 + 32 * 7


class Revoked(Exception):
    """The token's own revocation pair is on the blocklist."""


@lru_cache(maxsize=64)
def epoch_base(epoch: int) -> G1Element:
    return hash_to_group(TAG_DOMAIN, epoch_to_bytes(epoch))


def household_tag(k: int, epoch: int) -> G1Element:
    return epoch_base(epoch) ** k


def is_revoked_by(x: int, pair) -> bool:
    h, H = pair
    return h ** x == H


class _Powers:
    """``h^x`` per distinct base; honest lists share one base, so one exponentiation."""

    def __init__(self, x: int) -> None:
        self.x = x
        self._cache: dict[bytes, G1Element] = {}

    def __call__(self, h: G1Element) -> G1Element:
        key = h.to_binary()
        if key not in self._cache:
            self._cache[key] = h ** self.x
        return self._cache[key]


def blocked(x: int, pairs) -> bool:
    """Any ``(h, H)`` with ``H = h^x``."""
    power = _Powers(x)
    return any(power(h) == H for h, H in pairs)


# -- proof object -----------------------------------------------------------


@dataclass(frozen=True)
class NonRevocationClause:
    V: G1Element
    z_alpha: int
    z_rho: int
    z_gamma: int


@dataclass(frozen=True)
class ShowupProof:
    s1: G1Element
    s2: G1Element
    K: G1Element
    challenge: int
    z_t: int
    z_k: int
    z_e: int
    z_x: int
    z_r: int
    z_s: int
    clauses: tuple[NonRevocationClause, ...] = field(default=())

    def to_bytes(self) -> bytes:
        w = Writer().u8(FORMAT_VERSION).u32(len(self.clauses))
        w.g1(self.s1).g1(self.s2).scalar(self.z_t)
        w.scalar(self.z_k)
        w.scalar(self.z_e).scalar(self.z_r)
        w.g1(self.K).scalar(self.z_x).scalar(self.z_s)
        for cl in self.clauses:
            w.g1(cl.V).scalar(cl.z_alpha).scalar(cl.z_rho).scalar(cl.z_gamma)
        w.scalar(self.challenge)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ShowupProof":
        r = Reader(data)
        if r.u8() != FORMAT_VERSION:
            raise FormatError("unsupported showup proof version")
        n = r.u32()
        if len(data) != FIXED_LEN + n * CLAUSE_LEN:
            raise FormatError("showup proof length does not match its clause count")
        s1, s2, z_t = r.g1(), r.g1(), r.scalar(ORDER)
        z_k = r.scalar(ORDER)
        z_e, z_r = r.scalar(ORDER), r.scalar(ORDER)
        K, z_x, z_s = r.g1(), r.scalar(ORDER), r.scalar(ORDER)
        clauses = tuple(
            NonRevocationClause(r.g1(), r.scalar(ORDER), r.scalar(ORDER), r.scalar(ORDER))
            for _ in range(n)
        )
        c = r.scalar(ORDER)
        r.done()
        return cls(s1, s2, K, c, z_t, z_k, z_e, z_x, z_r, z_s, clauses)

    def __len__(self) -> int:
        return FIXED_LEN + len(self.clauses) * CLAUSE_LEN


def proof_size(bl_len: int) -> int:
    return FIXED_LEN + bl_len * CLAUSE_LEN


# -- challenge --------------------------------------------------------------


def _challenge(
    pk: PSPublicKey,
    pc: PedersenParams,
    epoch: int,
    tau,
    com,
    h_bl: bytes,
    s1,
    s2,
    K,
    Vs: Sequence,
    A_ps,
    A_tag,
    A_com,
    A_K,
    A_clauses: Sequence[tuple],
) -> int:
    w = Writer().raw(pk.digest).g1(pc.h).u64(epoch).g1(tau).g1(com).blob(h_bl)
    w.g1(s1).g1(s2).g1(K).u32(len(Vs))
    for V in Vs:
        w.g1(V)
    w.blob(gt_to_bytes(A_ps)).g1(A_tag).g1(A_com).g1(A_K)
    for a1, a2 in A_clauses:
        w.g1(a1).g1(a2)
    return hash_to_scalar(SHOWUP_DOMAIN, w.getvalue())


# -- non-revocation clause --------------------------------------------------


@dataclass
class ClauseCommitment:
    """Prover-side state of one clause between announcement and response."""

    V: G1Element
    rho: int
    alpha: int
    gamma: int
    w_alpha: int
    w_rho: int
    w_gamma: int
    A1: G1Element
    A2: G1Element

    def respond(self, c: int) -> NonRevocationClause:
        return NonRevocationClause(
            self.V,
            (self.w_alpha - c * self.alpha) % ORDER,
            (self.w_rho - c * self.rho) % ORDER,
            (self.w_gamma - c * self.gamma) % ORDER,
        )


def prove_nonrevocation_clause(
    r_H: int,
    pair,
    rng: Rng,
    pc: PedersenParams | None = None,
    s: int = 0,
    K: G1Element | None = None,
    *,
    allow_revoked: bool = False,
    hx: G1Element | None = None,
) -> ClauseCommitment:
    """Announce one clause for the revocation exponent ``r_H`` committed in ``K`` with opening ``s``.

    Pass ``K`` only when it may commit to something other than ``r_H``.
    ``hx`` is ``h^r_H`` when the caller already has it.  ``allow_revoked``
    lets test adversaries build the (unsound) clause anyway.
    """
    pc = pc or pc_gen()
    h, H = pair
    hx = h ** r_H if hx is None else hx
    if not allow_revoked and hx == H:
        raise Revoked("revoked")
    rho = rng.nonzero_scalar()
    alpha, gamma = r_H * rho % ORDER, s * rho % ORDER
    V = (hx / H) ** rho  # h^alpha H^-rho, one exponentiation
    w_a, w_r, w_g = rng.scalar(), rng.scalar(), rng.scalar()
    g_wa = pc.g_pow(w_a)
    A1 = (g_wa if h == pc.g else h ** w_a) * H ** (-w_r % ORDER)
    if K is None:  # K = g^r_H h^s, so K^-w_r folds into the fixed bases
        A2 = pc.g_pow(w_a - r_H * w_r) * pc.h_pow(w_g - s * w_r)
    else:
        A2 = g_wa * mul2(pc.h, w_g, K, -w_r)
    return ClauseCommitment(V, rho, alpha, gamma, w_a, w_r, w_g, A1, A2)


def verify_nonrevocation_clause(
    pc: PedersenParams, K, pair, clause: NonRevocationClause, c: int
) -> tuple[G1Element, G1Element] | None:
    """Recomputed announcements, or None if ``V`` is the identity."""
    if clause.V.is_neutral_element():
        return None
    h, H = pair
    z_a, z_r, z_g = clause.z_alpha, clause.z_rho, clause.z_gamma
    g_za = pc.g_pow(z_a)
    if h == pc.g:
        A1 = g_za * mul2(H, -z_r, clause.V, c)
    else:
        A1 = mul2(h, z_a, H, -z_r) * clause.V ** c
    A2 = g_za * mul2(pc.h, z_g, K, -z_r)
    return A1, A2


# -- full proof -------------------------------------------------------------


@dataclass
class Witness:
    """Everything the prover uses.  Honest provers derive it from a credential."""

    k: int
    e: int
    x: int
    r: int
    t_s: int
    s: int
    clause_x: int | None = None  # exponent used in the clauses, normally x

    @property
    def cx(self) -> int:
        return self.x if self.clause_x is None else self.clause_x


def build_proof(
    pk: PSPublicKey,
    pc: PedersenParams,
    epoch: int,
    tau,
    com,
    bl: Blocklist,
    s1,
    s2,
    wit: Witness,
    rng: Rng,
    *,
    allow_revoked: bool = False,
) -> ShowupProof:
    """Assemble the conjunctive proof over explicitly supplied statement and witness.

    The honest path is :func:`prove_showup`; this entry point exists so the
    adversary kit can feed inconsistent witnesses.
    """
    power = _Powers(wit.cx)
    if not allow_revoked and any(power(h) == H for h, H in bl.pairs):
        raise Revoked("revoked")
    K = pc.g_pow(wit.x) * pc.h_pow(wit.s)
    K_clause = None if wit.cx == wit.x else K
    w = {n: rng.scalar() for n in ("t", "k", "e", "x", "r", "s")}
    A_ps = relation_announcement(pk, s1, w["t"], {K_IDX: w["k"], ENT_IDX: w["e"], RH_IDX: w["x"]})
    A_tag = epoch_base(epoch) ** w["k"]
    A_com = pc.g_pow(w["e"]) * pc.h_pow(w["r"])
    A_K = pc.g_pow(w["x"]) * pc.h_pow(w["s"])
    cls_ = [
        prove_nonrevocation_clause(wit.cx, pair, rng, pc, wit.s, K_clause, allow_revoked=True, hx=power(pair[0]))
        for pair in bl.pairs
    ]
    c = _challenge(
        pk, pc, epoch, tau, com, bl.digest, s1, s2, K,
        [cl.V for cl in cls_], A_ps, A_tag, A_com, A_K, [(cl.A1, cl.A2) for cl in cls_],
    )

    def z(name, value):
        return (w[name] - c * value) % ORDER

    return ShowupProof(
        s1, s2, K, c,
        z("t", wit.t_s), z("k", wit.k), z("e", wit.e), z("x", wit.x), z("r", wit.r), z("s", wit.s),
        tuple(cl.respond(c) for cl in cls_),
    )


def prove_showup(
    pk: PSPublicKey,
    cred: Credential,
    epoch: int,
    bl: Blocklist,
    r: int,
    rng: Rng | None = None,
    pc: PedersenParams | None = None,
) -> tuple[G1Element, G1Element, ShowupProof]:
    """Return ``(tau_H, Com_ent, pi_s)``.  Raises :class:`Revoked` if blocked."""
    rng = rng or Rng()
    pc = pc or pc_gen()
    k, e, x = (cred.attributes[i] for i in (K_IDX, ENT_IDX, RH_IDX))
    tau = household_tag(k, epoch)
    com = pc_commit(pc, e, r)
    r_s, t_s = rng.nonzero_scalar(), rng.scalar()
    s1, s2 = randomize(cred, r_s, t_s)
    wit = Witness(k=k, e=e, x=x, r=r % ORDER, t_s=t_s, s=rng.scalar())
    return tau, com, build_proof(pk, pc, epoch, tau, com, bl, s1, s2, wit, rng)


def verify_showup_proof(
    pk: PSPublicKey,
    epoch: int,
    tau,
    com,
    proof: ShowupProof,
    bl: Blocklist,
    pc: PedersenParams | None = None,
) -> Verdict:
    """Check ``pi_s`` against the public statement only (no opening needed)."""
    pc = pc or pc_gen()
    try:
        if proof.s1.is_neutral_element():
            return Verdict.reject("ps-identity")
        if tau.is_neutral_element():
            return Verdict.reject("tag-identity")
        pairs = bl.pairs
        if len(proof.clauses) != len(pairs):
            return Verdict.reject("clause-count")
        c = proof.challenge
        A_ps = relation_recompute(
            pk, proof.s1, proof.s2, c, proof.z_t,
            {K_IDX: proof.z_k, ENT_IDX: proof.z_e, RH_IDX: proof.z_x}, {},
        )
        A_tag = epoch_base(epoch) ** proof.z_k * tau ** c
        A_com = pc.g_pow(proof.z_e) * pc.h_pow(proof.z_r) * com ** c
        A_K = pc.g_pow(proof.z_x) * pc.h_pow(proof.z_s) * proof.K ** c
        A_clauses = []
        for j, (pair, clause) in enumerate(zip(pairs, proof.clauses)):
            got = verify_nonrevocation_clause(pc, proof.K, pair, clause, c)
            if got is None:
                return Verdict.reject(f"clause-{j}-identity")
            A_clauses.append(got)
        expect = _challenge(
            pk, pc, epoch, tau, com, bl.digest, proof.s1, proof.s2, proof.K,
            [cl.V for cl in proof.clauses], A_ps, A_tag, A_com, A_K, A_clauses,
        )
    except (FormatError, TypeError, ValueError, AttributeError):
        return Verdict.reject("malformed")
    if expect != c:
        return Verdict.reject("challenge")
    return Verdict.accept()


def verify_showup(
    pk: PSPublicKey,
    epoch: int,
    ent: int,
    tau,
    com,
    r: int,
    proof: ShowupProof,
    bl: Blocklist,
    pc: PedersenParams | None = None,
) -> Verdict:
    """Station-side check: the proof plus the disclosed opening of ``Com_ent``."""
    pc = pc or pc_gen()
    try:
        if pc_commit(pc, ent % ORDER, r % ORDER) != com:
            return Verdict.reject("opening")
    except (TypeError, AttributeError):
        return Verdict.reject("malformed")
    return verify_showup_proof(pk, epoch, tau, com, proof, bl, pc)
