"""Prime-order groups: the BLS12-381 pairing groups plus a toy modular group.

Group elements are used multiplicatively everywhere (``a * b``, ``a ** k``),
so code written against G1 also runs unchanged on :class:`ModGroup` elements,
which exist only so small hand-checkable examples can be tested.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

from petrelic.bindings import _C
from petrelic.bn import Bn
from petrelic.multiplicative.pairing import G1, G2, GT, G1Element, G2Element

from aidist.crypto.encoding import frame

ORDER: int = int(G1.order())


@dataclass(frozen=True)
class GroupParams:
    """Type-III pairing description: e: G1 x G2 -> GT, all of prime order q."""

    q: int
    g1: G1Element
    g2: G2Element

    @property
    def gt(self):
        return pair(self.g1, self.g2)

    def identity(self) -> G1Element:
        return G1.neutral_element()


@lru_cache(maxsize=None)
def bls12_381() -> GroupParams:
    return GroupParams(q=ORDER, g1=G1.generator(), g2=G2.generator())


def g1_identity() -> G1Element:
    return G1.neutral_element()


def pair(a: G1Element, b: G2Element):
    return a.pair(b)


def gt_unity():
    return GT.unity()


def hash_to_group(domain: bytes, data: bytes) -> G1Element:
    """Deterministically map ``data`` into G1 under a domain-separation tag."""
    if not domain:
        raise ValueError("domain tag must be non-empty")
    return G1.hash_to_point(frame(b"aidist/h2g", domain, data))


def hash_to_scalar(domain: bytes, *parts: bytes) -> int:
    """SHA-512 over length-prefixed parts, reduced mod q (bias < 2^-250)."""
    digest = hashlib.sha512(frame(b"aidist/h2s", domain, *parts)).digest()
    return int.from_bytes(digest, "big") % ORDER


# -- toy group --------------------------------------------------------------


@dataclass(frozen=True)
class ModGroup:
    """Order-q subgroup of Z*_p.  Test mode only: no security at these sizes."""

    p: int
    q: int

    def __post_init__(self) -> None:
        if (self.p - 1) % self.q:
            raise ValueError("q must divide p - 1")
        if not _is_prime(self.q) or not _is_prime(self.p):
            raise ValueError("p and q must be prime")

    def element(self, value: int) -> "ModElement":
        value %= self.p
        if value == 0 or pow(value, self.q, self.p) != 1:
            raise ValueError(f"{value} is not in the order-{self.q} subgroup")
        return ModElement(value, self)

    def identity(self) -> "ModElement":
        return ModElement(1, self)


@dataclass(frozen=True)
class ModElement:
    value: int
    group: ModGroup

    def __mul__(self, other: "ModElement") -> "ModElement":
        return ModElement(self.value * other.value % self.group.p, self.group)

    def __truediv__(self, other: "ModElement") -> "ModElement":
        return self * other.inverse()

    def __pow__(self, k: int) -> "ModElement":
        return ModElement(pow(self.value, int(k) % self.group.q, self.group.p), self.group)

    def inverse(self) -> "ModElement":
        return ModElement(pow(self.value, -1, self.group.p), self.group)

    def is_neutral_element(self) -> bool:
        return self.value == 1


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class FixedBase:
    """Precomputed multiples of one G1 base, for a base that is raised over and over.

    Byte-wide windows: row ``i`` holds ``(256^i * j) * P`` for ``j < 256``, so
    an exponentiation is at most 32 additions.  Building a table costs about
    8000 additions, which pays off after a few hundred uses.  Variable time,
    like everything else running on Python integers.
    """

    def __init__(self, base: G1Element) -> None:
        self._keep: list[G1Element] = []
        self._rows: list[list] = []
        P = base
        for _ in range(32):
            row, acc = [None], P
            for _ in range(255):
                self._keep.append(acc)
                row.append(acc.pt)
                acc = acc * P
            self._rows.append(row)
            P = acc

    def pow(self, k: int) -> G1Element:
        acc = G1Element()
        _C.g1_set_infty(acc.pt)
        for row, byte in zip(self._rows, (k % ORDER).to_bytes(32, "little")):
            if byte:
                _C.g1_add(acc.pt, acc.pt, row[byte])
        _C.g1_norm(acc.pt, acc.pt)
        return acc


_TABLES: dict[bytes, FixedBase] = {}


def fixed_pow(base, k: int):
    """``base^k``, through a cached :class:`FixedBase` for G1 bases.

    Meant for the handful of long-lived generators; every distinct base gets
    its own table.
    """
    if not isinstance(base, G1Element):
        return base ** k
    key = base.to_binary()
    table = _TABLES.get(key)
    if table is None:
        table = _TABLES[key] = FixedBase(base)
    return table.pow(k)


def mul2(P, a: int, Q, b: int):
    """``P^a * Q^b`` with one simultaneous scalar multiplication on G1."""
    if not (isinstance(P, G1Element) and isinstance(Q, G1Element)):
        return P ** a * Q ** b
    res = G1Element()
    _C.g1_mul_sim(res.pt, P.pt, Bn(a % ORDER).bn, Q.pt, Bn(b % ORDER).bn)
    return res
