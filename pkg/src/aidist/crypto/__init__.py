"""Algebraic substrate: groups, encodings, commitments, PRF, signatures."""

from aidist.crypto.blhash import blocklist_hash, canonical_blocklist_bytes
from aidist.crypto.encoding import FORMAT_VERSION, FormatError, Reader, Writer
from aidist.crypto.group import (
    ORDER,
    GroupParams,
    ModGroup,
    bls12_381,
    hash_to_group,
    hash_to_scalar,
)
from aidist.crypto.pedersen import (
    PedersenParams,
    pc_combine,
    pc_commit,
    pc_gen,
    pc_verify_opening,
)
from aidist.crypto.prf import prf_eval
from aidist.crypto.rng import Rng
from aidist.crypto.signature import SigningKey, VerifyKey, sig_gen, sig_sign, sig_verify

__all__ = [
    "FORMAT_VERSION",
    "FormatError",
    "GroupParams",
    "ModGroup",
    "ORDER",
    "PedersenParams",
    "Reader",
    "Rng",
    "SigningKey",
    "VerifyKey",
    "Writer",
    "blocklist_hash",
    "bls12_381",
    "canonical_blocklist_bytes",
    "hash_to_group",
    "hash_to_scalar",
    "pc_combine",
    "pc_commit",
    "pc_gen",
    "pc_verify_opening",
    "prf_eval",
    "sig_gen",
    "sig_sign",
    "sig_verify",
]
