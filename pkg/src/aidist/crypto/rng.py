"""Randomness source threaded through every randomized operation.

``Rng()`` draws from the OS CSPRNG.  ``Rng(seed)`` is a deterministic
SHAKE-256 stream, used by the simulator and the game harness so that a
seed reproduces the exact same transcript.
"""

from __future__ import annotations

import hashlib
import random
import secrets

from aidist.crypto.group import ORDER


class Rng:
    def __init__(self, seed: int | bytes | str | None = None) -> None:
        if seed is None:
            self._seed = None
        else:
            if isinstance(seed, int):
                seed = seed.to_bytes(16, "big", signed=True)
            elif isinstance(seed, str):
                seed = seed.encode()
            self._seed = bytes(seed)
        self._counter = 0

    @property
    def deterministic(self) -> bool:
        return self._seed is not None

    def bytes(self, n: int) -> bytes:
        if self._seed is None:
            return secrets.token_bytes(n)
        self._counter += 1
        xof = hashlib.shake_256(self._seed + self._counter.to_bytes(8, "big"))
        return xof.digest(n)

    def scalar(self) -> int:
        return int.from_bytes(self.bytes(64), "big") % ORDER

    def nonzero_scalar(self) -> int:
        while True:
            s = self.scalar()
            if s:
                return s

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return int.from_bytes(self.bytes(32), "big") % n

    def random(self) -> float:
        return int.from_bytes(self.bytes(7), "big") / 2**56

    def bit(self) -> int:
        return self.bytes(1)[0] & 1

    def sample(self, population, k: int) -> list:
        return random.Random(self.bytes(32)).sample(list(population), k)

    def fork(self, label: str | bytes) -> "Rng":
        """Independent child stream; deterministic iff the parent is."""
        if isinstance(label, str):
            label = label.encode()
        if self._seed is None:
            return Rng()
        return Rng(hashlib.sha256(self._seed + b"/" + label).digest())
