"""Deterministic Schnorr signatures over G1.

Nonces are derived from the secret key and the message, so signing the same
message twice gives the same signature.  Signatures are ``(c, s)``, 64 bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from petrelic.multiplicative.pairing import G1Element

from aidist.crypto import instrument
from aidist.crypto.encoding import (
    FormatError,
    g1_from_bytes,
    g1_to_bytes,
    scalar_from_bytes,
    scalar_to_bytes,
)
from aidist.crypto.group import ORDER, bls12_381, hash_to_scalar
from aidist.crypto.rng import Rng

SIG_LEN = 64


@dataclass(frozen=True)
class SigningKey:
    x: int

    def public(self) -> "VerifyKey":
        return self._public

    @cached_property
    def _public(self) -> "VerifyKey":
        return VerifyKey(bls12_381().g1 ** self.x)

    @cached_property
    def _public_bytes(self) -> bytes:
        return self._public.to_bytes()

    def to_bytes(self) -> bytes:
        return scalar_to_bytes(self.x)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SigningKey":
        return cls(scalar_from_bytes(data, ORDER))

    def __repr__(self) -> str:
        return "SigningKey(<sealed>)"


@dataclass(frozen=True)
class VerifyKey:
    point: G1Element

    def to_bytes(self) -> bytes:
        return g1_to_bytes(self.point)

    @classmethod
    def from_bytes(cls, data: bytes) -> "VerifyKey":
        return cls(g1_from_bytes(data))


def sig_gen(rng: Rng | None = None) -> tuple[SigningKey, VerifyKey]:
    sk = SigningKey((rng or Rng()).nonzero_scalar())
    return sk, sk.public()


def _challenge(pk_bytes: bytes, commitment: G1Element, message: bytes) -> int:
    return hash_to_scalar(b"schnorr-sig-v1", pk_bytes, g1_to_bytes(commitment), message)


def sig_sign(sk: SigningKey, message: bytes) -> bytes:
    instrument.bump("signature")
    g = bls12_381().g1
    pk_bytes = sk._public_bytes
    k = hash_to_scalar(b"schnorr-nonce-v1", sk.to_bytes(), message) or 1
    c = _challenge(pk_bytes, g ** k, message)
    s = (k + c * sk.x) % ORDER
    return scalar_to_bytes(c) + scalar_to_bytes(s)


def sig_verify(pk: VerifyKey, message: bytes, signature: bytes) -> bool:
    """Never raises on malformed input; returns False instead."""
    try:
        if len(signature) != SIG_LEN:
            return False
        c = scalar_from_bytes(signature[:32], ORDER)
        s = scalar_from_bytes(signature[32:], ORDER)
        commitment = bls12_381().g1 ** s * pk.point ** (-c % ORDER)
        return _challenge(pk.to_bytes(), commitment, message) == c
    except (FormatError, TypeError, AttributeError):
        return False
