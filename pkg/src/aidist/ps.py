"""Pointcheval-Sanders attribute-based credentials.

Key generation, blind issuance over user-hidden attributes, and
selective-disclosure showing with a Fiat-Shamir proof of the pairing
relation.  Attribute indices are 0-based here.

Issuance::

    user:    C = g^t * prod_{i in U} Y_i^{a_i},  pi = NIZK{(t, a_U): C = ...}
    issuer:  sigma' = (g^u, (X * C * prod_{i in I} Y_i^{a_i})^u)
    user:    sigma  = (sigma'_1, sigma'_2 / sigma'_1^t)

Showing rerandomizes ``sigma`` to ``(sigma_1^r, (sigma_2 sigma_1^t)^r)`` and
proves, in GT,

    e(s2, g~) prod_{i in D} e(s1, Y~_i)^{-a_i} / e(s1, X~)
        = e(s1, g~)^t prod_{i in H} e(s1, Y~_i)^{a_i}
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from petrelic.multiplicative.pairing import G1Element, G2Element

from aidist.crypto.encoding import FormatError, Reader, Writer, gt_to_bytes
from aidist.crypto.group import ORDER, bls12_381, hash_to_scalar
from aidist.crypto.rng import Rng

ISSUE_DOMAIN = b"aidist/ps-issue/v1"
SHOW_DOMAIN = b"aidist/ps-show/v1"


class IssuanceError(Exception):
    """The issuer or the user aborted the issuance protocol."""


@dataclass(frozen=True)
class PSPublicKey:
    g: G1Element
    Y: tuple[G1Element, ...]
    g_tilde: G2Element
    X_tilde: G2Element
    Y_tilde: tuple[G2Element, ...]

    @property
    def L(self) -> int:
        return len(self.Y)

    def to_bytes(self) -> bytes:
        w = Writer().u8(self.L).g1(self.g)
        for y in self.Y:
            w.g1(y)
        w.g2(self.g_tilde).g2(self.X_tilde)
        for y in self.Y_tilde:
            w.g2(y)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PSPublicKey":
        r = Reader(data)
        n = r.u8()
        g = r.g1()
        Y = tuple(r.g1() for _ in range(n))
        g_tilde, X_tilde = r.g2(), r.g2()
        Y_tilde = tuple(r.g2() for _ in range(n))
        r.done()
        return cls(g, Y, g_tilde, X_tilde, Y_tilde)

    @cached_property
    def digest(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()

    def is_well_formed(self) -> bool:
        """e(Y_i, g~) == e(g, Y~_i) for every i, and no identity elements."""
        if self.g.is_neutral_element() or self.g_tilde.is_neutral_element():
            return False
        e_g = self.g.pair
        return all(y.pair(self.g_tilde) == e_g(yt) for y, yt in zip(self.Y, self.Y_tilde))


@dataclass(frozen=True)
class PSSecretKey:
    x: int
    X: G1Element
    y: tuple[int, ...]

    def __repr__(self) -> str:
        return f"PSSecretKey(<sealed>, L={len(self.y)})"

    def to_bytes(self) -> bytes:
        w = Writer().u8(len(self.y)).scalar(self.x).g1(self.X)
        for yi in self.y:
            w.scalar(yi)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PSSecretKey":
        r = Reader(data)
        n = r.u8()
        x, X = r.scalar(ORDER), r.g1()
        y = tuple(r.scalar(ORDER) for _ in range(n))
        r.done()
        return cls(x, X, y)


def abc_gen(L: int, rng: Rng | None = None) -> tuple[PSSecretKey, PSPublicKey]:
    if L < 1:
        raise ValueError("attribute count must be at least 1")
    rng = rng or Rng()
    gp = bls12_381()
    g = gp.g1 ** rng.nonzero_scalar()
    g_tilde = gp.g2 ** rng.nonzero_scalar()
    x = rng.nonzero_scalar()
    ys = tuple(rng.nonzero_scalar() for _ in range(L))
    sk = PSSecretKey(x, g ** x, ys)
    pk = PSPublicKey(
        g=g,
        Y=tuple(g ** y for y in ys),
        g_tilde=g_tilde,
        X_tilde=g_tilde ** x,
        Y_tilde=tuple(g_tilde ** y for y in ys),
    )
    return sk, pk


# -- issuance ---------------------------------------------------------------


@dataclass(frozen=True)
class IssueRequest:
    """What the user sends: the commitment and its opening proof.

    ``proof`` is ``(challenge, response_t, response_a for each hidden index)``.
    """

    C: G1Element
    hidden: tuple[int, ...]
    challenge: int
    responses: tuple[int, ...]

    def to_bytes(self) -> bytes:
        w = Writer().g1(self.C)
        w.scalar(self.challenge)
        for s in self.responses:
            w.scalar(s)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, hidden: tuple[int, ...]) -> "IssueRequest":
        r = Reader(data)
        C = r.g1()
        c = r.scalar(ORDER)
        responses = tuple(r.scalar(ORDER) for _ in range(len(hidden) + 1))
        r.done()
        return cls(C, tuple(hidden), c, responses)

    @property
    def proof_bytes(self) -> bytes:
        return self.to_bytes()[48:]


@dataclass(frozen=True)
class IssuanceState:
    """User-private: the blinding exponent and the hidden attribute values."""

    t: int
    hidden_attrs: Mapping[int, int] = field(default_factory=dict)

    def __repr__(self) -> str:
        return f"IssuanceState(<sealed>, hidden={sorted(self.hidden_attrs)})"


@dataclass(frozen=True)
class BlindSignature:
    s1: G1Element
    s2: G1Element

    def to_bytes(self) -> bytes:
        return Writer().g1(self.s1).g1(self.s2).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BlindSignature":
        r = Reader(data)
        out = cls(r.g1(), r.g1())
        r.done()
        return out


@dataclass(frozen=True)
class Credential:
    s1: G1Element
    s2: G1Element
    attributes: tuple[int, ...]

    def __repr__(self) -> str:
        return f"Credential(<sealed>, L={len(self.attributes)})"

    def to_bytes(self) -> bytes:
        w = Writer().g1(self.s1).g1(self.s2).u8(len(self.attributes))
        for a in self.attributes:
            w.scalar(a)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Credential":
        r = Reader(data)
        s1, s2 = r.g1(), r.g1()
        attrs = tuple(r.scalar(ORDER) for _ in range(r.u8()))
        r.done()
        return cls(s1, s2, attrs)


def _check_indices(pk: PSPublicKey, idx) -> None:
    for i in idx:
        if not 0 <= i < pk.L:
            raise ValueError(f"attribute index {i} outside 0..{pk.L - 1}")


def _issue_challenge(pk: PSPublicKey, C, announcement, hidden) -> int:
    w = Writer().u32(len(hidden))
    for i in hidden:
        w.u32(i)
    return hash_to_scalar(
        ISSUE_DOMAIN, pk.digest, w.getvalue(), Writer().g1(C).g1(announcement).getvalue()
    )


def abc_issue_request(
    pk: PSPublicKey, hidden_attrs: Mapping[int, int], rng: Rng | None = None
) -> tuple[IssueRequest, IssuanceState]:
    rng = rng or Rng()
    hidden = tuple(sorted(hidden_attrs))
    _check_indices(pk, hidden)
    t = rng.nonzero_scalar()
    C = pk.g ** t
    for i in hidden:
        C = C * pk.Y[i] ** (hidden_attrs[i] % ORDER)
    w_t = rng.scalar()
    w_a = [rng.scalar() for _ in hidden]
    A = pk.g ** w_t
    for i, w in zip(hidden, w_a):
        A = A * pk.Y[i] ** w
    c = _issue_challenge(pk, C, A, hidden)
    responses = [(w_t - c * t) % ORDER]
    responses += [(w - c * hidden_attrs[i]) % ORDER for i, w in zip(hidden, w_a)]
    req = IssueRequest(C, hidden, c, tuple(responses))
    return req, IssuanceState(t, {i: hidden_attrs[i] % ORDER for i in hidden})


def verify_issue_request(pk: PSPublicKey, req: IssueRequest) -> bool:
    try:
        _check_indices(pk, req.hidden)
        if len(req.responses) != len(req.hidden) + 1 or len(set(req.hidden)) != len(req.hidden):
            return False
        A = pk.g ** req.responses[0] * req.C ** req.challenge
        for i, s in zip(req.hidden, req.responses[1:]):
            A = A * pk.Y[i] ** s
        return _issue_challenge(pk, req.C, A, req.hidden) == req.challenge
    except (ValueError, TypeError, AttributeError, FormatError):
        return False


def abc_issue_sign(
    sk: PSSecretKey,
    pk: PSPublicKey,
    issuer_attrs: Mapping[int, int],
    req: IssueRequest,
    rng: Rng | None = None,
) -> BlindSignature:
    """Sign the user's commitment together with the issuer-chosen attributes.

    The hidden attribute values are not an input: only ``C`` and its proof.
    """
    rng = rng or Rng()
    _check_indices(pk, issuer_attrs)
    if set(issuer_attrs) & set(req.hidden) or set(issuer_attrs) | set(req.hidden) != set(range(pk.L)):
        raise IssuanceError("issuer and user attribute indices must partition 0..L-1")
    if not verify_issue_request(pk, req):
        raise IssuanceError("issuance proof does not verify")
    base = sk.X * req.C
    for i, a in issuer_attrs.items():
        base = base * pk.Y[i] ** (a % ORDER)
    u = rng.nonzero_scalar()
    return BlindSignature(pk.g ** u, base ** u)


def abc_issue_unblind(
    pk: PSPublicKey,
    state: IssuanceState,
    blind: BlindSignature,
    issuer_attrs: Mapping[int, int],
) -> Credential:
    if set(issuer_attrs) & set(state.hidden_attrs):
        raise IssuanceError("attribute index set twice")
    attrs = {**{i: a % ORDER for i, a in issuer_attrs.items()}, **state.hidden_attrs}
    if set(attrs) != set(range(pk.L)):
        raise IssuanceError("attributes do not cover every index")
    cred = Credential(
        blind.s1,
        blind.s2 * blind.s1 ** (-state.t % ORDER),
        tuple(attrs[i] for i in range(pk.L)),
    )
    if not verify_credential(pk, cred):
        raise IssuanceError("issued credential does not verify")
    return cred


def verify_credential(pk: PSPublicKey, cred: Credential) -> bool:
    """e(s1, X~ prod Y~_i^{a_i}) == e(s2, g~) with s1 != 1."""
    if cred.s1.is_neutral_element() or len(cred.attributes) != pk.L:
        return False
    acc = pk.X_tilde
    for yt, a in zip(pk.Y_tilde, cred.attributes):
        acc = acc * yt ** a
    return cred.s1.pair(acc) == cred.s2.pair(pk.g_tilde)


# -- showing ----------------------------------------------------------------


def randomize(cred: Credential, r: int, t: int) -> tuple[G1Element, G1Element]:
    return cred.s1 ** r, (cred.s2 * cred.s1 ** t) ** r


def relation_announcement(pk: PSPublicKey, s1: G1Element, w_t: int, w_hidden: Mapping[int, int]):
    """e(s1, g~)^{w_t} prod_{i in H} e(s1, Y~_i)^{w_i}, folded into one pairing."""
    acc = pk.g_tilde ** w_t
    for i, w in w_hidden.items():
        acc = acc * pk.Y_tilde[i] ** w
    return s1.pair(acc)


def relation_recompute(
    pk: PSPublicKey,
    s1: G1Element,
    s2: G1Element,
    challenge: int,
    z_t: int,
    z_hidden: Mapping[int, int],
    disclosed: Mapping[int, int],
):
    """Announcement implied by responses ``z = w - c * witness``.

    Equals ``e(s1, g~)^{z_t} prod_H e(s1, Y~_i)^{z_i} * lhs^c`` with ``lhs`` the
    left-hand side of the showing relation; bilinearity folds this to two
    pairings.
    """
    c = challenge
    acc = pk.g_tilde ** z_t * pk.X_tilde ** (-c % ORDER)
    for i, z in z_hidden.items():
        acc = acc * pk.Y_tilde[i] ** z
    for i, a in disclosed.items():
        acc = acc * pk.Y_tilde[i] ** (-c * a % ORDER)
    return s1.pair(acc) * (s2 ** c).pair(pk.g_tilde)


@dataclass(frozen=True)
class ShowProof:
    s1: G1Element
    s2: G1Element
    challenge: int
    z_t: int
    z_hidden: Mapping[int, int]

    def to_bytes(self) -> bytes:
        w = Writer().g1(self.s1).g1(self.s2).scalar(self.challenge).scalar(self.z_t)
        w.u8(len(self.z_hidden))
        for i in sorted(self.z_hidden):
            w.u8(i).scalar(self.z_hidden[i])
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ShowProof":
        r = Reader(data)
        s1, s2 = r.g1(), r.g1()
        c, z_t = r.scalar(ORDER), r.scalar(ORDER)
        z = {}
        for _ in range(r.u8()):
            i = r.u8()
            z[i] = r.scalar(ORDER)
        r.done()
        return cls(s1, s2, c, z_t, z)


def _show_challenge(pk, s1, s2, disclosed, announcement, context: bytes) -> int:
    w = Writer().g1(s1).g1(s2).u32(len(disclosed))
    for i in sorted(disclosed):
        w.u32(i).scalar(disclosed[i] % ORDER)
    return hash_to_scalar(SHOW_DOMAIN, pk.digest, w.getvalue(), gt_to_bytes(announcement), context)


def abc_show(
    pk: PSPublicKey,
    cred: Credential,
    disclosed: set[int] | frozenset[int],
    rng: Rng | None = None,
    context: bytes = b"",
) -> tuple[ShowProof, dict[int, int]]:
    rng = rng or Rng()
    _check_indices(pk, disclosed)
    hidden = [i for i in range(pk.L) if i not in disclosed]
    r_s, t_s = rng.nonzero_scalar(), rng.scalar()
    s1, s2 = randomize(cred, r_s, t_s)
    w_t = rng.scalar()
    w = {i: rng.scalar() for i in hidden}
    A = relation_announcement(pk, s1, w_t, w)
    values = {i: cred.attributes[i] for i in sorted(disclosed)}
    c = _show_challenge(pk, s1, s2, values, A, context)
    z_t = (w_t - c * t_s) % ORDER
    z = {i: (w[i] - c * cred.attributes[i]) % ORDER for i in hidden}
    return ShowProof(s1, s2, c, z_t, z), values


def abc_verify_show(
    pk: PSPublicKey,
    proof: ShowProof,
    disclosed: Mapping[int, int],
    context: bytes = b"",
) -> bool:
    try:
        if proof.s1.is_neutral_element():
            return False
        _check_indices(pk, disclosed)
        _check_indices(pk, proof.z_hidden)
        if set(disclosed) & set(proof.z_hidden) or set(disclosed) | set(proof.z_hidden) != set(range(pk.L)):
            return False
        A = relation_recompute(
            pk, proof.s1, proof.s2, proof.challenge, proof.z_t, proof.z_hidden,
            {i: a % ORDER for i, a in disclosed.items()},
        )
        return _show_challenge(pk, proof.s1, proof.s2, disclosed, A, context) == proof.challenge
    except (ValueError, TypeError, AttributeError, FormatError):
        return False
