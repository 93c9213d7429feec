"""Household tag PRF: AES-256-CMAC in counter mode, 32-byte output.

CMAC yields 16 bytes per block, so the tag is
``CMAC(k, 0x01 || eps) || CMAC(k, 0x02 || eps)`` with ``eps`` the 8-byte
big-endian period index (the NIST SP 800-108 counter construction).
"""

from __future__ import annotations

from cryptography.hazmat.primitives.ciphers import algorithms
from cryptography.hazmat.primitives.cmac import CMAC

from aidist.crypto import instrument
from aidist.crypto.encoding import epoch_to_bytes

KEY_LEN = 32
TAG_LEN = 32


def cmac(key: bytes, message: bytes) -> bytes:
    mac = CMAC(algorithms.AES(key))
    mac.update(message)
    return mac.finalize()


def prf_eval(key: bytes, epoch: int) -> bytes:
    if len(key) != KEY_LEN:
        raise ValueError(f"PRF key must be {KEY_LEN} bytes")
    instrument.bump("prf")
    eps = epoch_to_bytes(epoch)
    return cmac(key, b"\x01" + eps) + cmac(key, b"\x02" + eps)
