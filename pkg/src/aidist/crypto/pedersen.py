"""Additively homomorphic Pedersen commitments ``c = g^m h^r``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Iterable

from aidist.crypto import instrument
from aidist.crypto.group import ORDER, bls12_381, fixed_pow, hash_to_group

PEDERSEN_DOMAIN = b"pedersen-h-v1"

Commitment = Any  # a group element


@dataclass(frozen=True)
class PedersenParams:
    g: Any
    h: Any
    q: int

    def identity(self):
        return self.g ** 0

    def g_pow(self, k: int):
        return fixed_pow(self.g, k % self.q)

    def h_pow(self, k: int):
        return fixed_pow(self.h, k % self.q)

    @classmethod
    def toy(cls, group, g: int, h: int) -> "PedersenParams":
        """Relaxed constructor for small modular groups (tests only).

        Unlike :func:`pc_gen`, ``log_g(h)`` may be known here.
        """
        gg, hh = group.element(g), group.element(h)
        if gg.is_neutral_element() or hh.is_neutral_element():
            raise ValueError("generators must not be the identity")
        return cls(gg, hh, group.q)


@lru_cache(maxsize=None)
def pc_gen(security: int = 128, seed: bytes = b"") -> PedersenParams:
    """Pedersen parameters over G1 with ``h`` from hash-to-group.

    Nobody knows ``log_g(h)`` because ``h`` is the hash of a public string.
    """
    if security != 128:
        raise ValueError("only the 128-bit level is supported")
    gp = bls12_381()
    h = hash_to_group(PEDERSEN_DOMAIN, seed)
    return PedersenParams(gp.g1, h, ORDER)


def pc_commit(params: PedersenParams, m: int, r: int) -> Commitment:
    instrument.bump("fixed_base_exp", 2)
    return params.g_pow(m) * params.h_pow(r)


def pc_verify_opening(params: PedersenParams, c: Commitment, m: int, r: int) -> bool:
    try:
        return c == params.g_pow(m) * params.h_pow(r)
    except (TypeError, AttributeError):
        return False


def pc_combine(params: PedersenParams, cs: Iterable[Commitment]) -> Commitment:
    acc = params.identity()
    for c in cs:
        acc = acc * c
    return acc


__all__ = [
    "Commitment",
    "PEDERSEN_DOMAIN",
    "PedersenParams",
    "pc_combine",
    "pc_commit",
    "pc_gen",
    "pc_verify_opening",
]
