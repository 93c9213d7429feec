import statistics
import time
from dataclasses import replace

import pytest

from aidist.core import Blocklist, BlocklistKind, bl_revoke
from aidist.crypto.encoding import FormatError
from aidist.crypto.group import ORDER, bls12_381
from aidist.crypto.pedersen import pc_commit, pc_gen
from aidist.crypto.rng import Rng
from aidist.phone import revocation_token
from aidist.ps import randomize
from aidist.showup import (
    CLAUSE_LEN,
    ENT_IDX,
    FIXED_LEN,
    K_IDX,
    RH_IDX,
    Revoked,
    ShowupProof,
    Witness,
    blocked,
    build_proof,
    epoch_base,
    household_tag,
    proof_size,
    prove_nonrevocation_clause,
    prove_showup,
    verify_nonrevocation_clause,
    verify_showup,
)
from conftest import enroll

EMPTY = Blocklist(BlocklistKind.PHONE)


@pytest.fixture(scope="module")
def household(phone, phone_auth):
    token, rev = enroll(phone, phone_auth, 6, Rng("showup-household"))
    return phone_auth.public, token.cred, rev


@pytest.fixture(scope="module")
def other_cred(phone, phone_auth):
    token, _ = enroll(phone, phone_auth, 9, Rng("showup-other"))
    return token.cred


def decoys(n, label="decoy"):
    bl = EMPTY
    rng = Rng(label)
    for _ in range(n):
        bl = bl_revoke(bl, revocation_token(rng.nonzero_scalar()).to_bytes())
    return bl


def show(household, epoch, bl, label="show"):
    pk, cred, _ = household
    rng = Rng(label)
    r = rng.scalar()
    tau, com, proof = prove_showup(pk, cred, epoch, bl, r, rng)
    return tau, com, r, proof


def check(household, epoch, bl, shown, ent=None):
    pk, cred, _ = household
    tau, com, r, proof = shown
    ent = cred.attributes[ENT_IDX] if ent is None else ent
    return verify_showup(pk, epoch, ent, tau, com, r, proof, bl)


def test_empty_blocklist_has_no_clauses(household):
    shown = show(household, 1, EMPTY)
    assert shown[3].clauses == ()
    assert len(shown[3].to_bytes()) == FIXED_LEN
    assert check(household, 1, EMPTY, shown)


def test_unrelated_entries_verify(household):
    bl = decoys(3)
    shown = show(household, 2, bl)
    assert len(shown[3].clauses) == 3
    assert all(not c.V.is_neutral_element() for c in shown[3].clauses)
    assert check(household, 2, bl, shown)


def test_own_token_on_blocklist_refused(household):
    pk, cred, rev = household
    bl = bl_revoke(decoys(2), rev)
    with pytest.raises(Revoked):
        show(household, 3, bl)


def test_statement_binding(household):
    bl = decoys(2)
    shown = show(household, 4, bl)
    assert check(household, 4, bl, shown)
    extra = bl_revoke(bl, revocation_token(77).to_bytes())
    assert not check(household, 4, extra, shown)
    ent = household[1].attributes[ENT_IDX]
    assert check(household, 4, bl, shown, ent + 1).reason == "opening"
    assert not check(household, 5, bl, shown)


def test_tampered_fields_rejected(household):
    bl = decoys(1)
    tau, com, r, proof = show(household, 6, bl)
    g = bls12_381().g1
    pk, cred, _ = household
    ent = cred.attributes[ENT_IDX]
    bad = [
        replace(proof, z_k=(proof.z_k + 1) % ORDER),
        replace(proof, K=proof.K * g),
        replace(proof, clauses=(replace(proof.clauses[0], V=proof.clauses[0].V * g),)),
        replace(proof, clauses=()),
    ]
    for p in bad:
        assert not verify_showup(pk, 6, ent, tau, com, r, p, bl)
    assert not verify_showup(pk, 6, ent, tau * g, com, r, proof, bl)


def test_proof_serialization_and_size(household):
    for n in (0, 1, 3):
        bl = decoys(n, f"size{n}")
        proof = show(household, 7 + n, bl)[3]
        data = proof.to_bytes()
        assert len(data) == proof_size(n) == FIXED_LEN + n * CLAUSE_LEN == len(proof)
        assert ShowupProof.from_bytes(data) == proof
    with pytest.raises(FormatError):
        ShowupProof.from_bytes(data[:-1])


def test_tag_is_epoch_base_power(household):
    pk, cred, _ = household
    k = cred.attributes[K_IDX]
    assert household_tag(k, 3) == epoch_base(3) ** k
    assert household_tag(k, 3) != household_tag(k, 4)
    assert show(household, 3, EMPTY, "a")[0] == show(household, 3, EMPTY, "b")[0]


def test_clause_verifies_for_unrelated_pair():
    pc = pc_gen()
    rng = Rng("clause")
    x, s = rng.nonzero_scalar(), rng.scalar()
    K = pc.g ** x * pc.h ** s
    h = bls12_381().g1 ** rng.nonzero_scalar()
    pair = (h, h ** rng.nonzero_scalar())
    cc = prove_nonrevocation_clause(x, pair, rng, pc, s, K)
    assert not cc.V.is_neutral_element()
    c = rng.scalar()
    assert verify_nonrevocation_clause(pc, K, pair, cc.respond(c), c) == (cc.A1, cc.A2)


def test_clause_for_own_pair_refused():
    x = 12345
    h = bls12_381().g1 ** 7
    with pytest.raises(Revoked):
        prove_nonrevocation_clause(x, (h, h ** x), Rng("own"))
    forced = prove_nonrevocation_clause(x, (h, h ** x), Rng("own"), allow_revoked=True)
    assert forced.V.is_neutral_element()
    assert verify_nonrevocation_clause(pc_gen(), forced.V, (h, h ** x), forced.respond(1), 1) is None


class ZeroFirst(Rng):
    """Returns a zero scalar once, then behaves normally."""

    def __init__(self):
        super().__init__("zero-first")
        self.zeroed = False

    def scalar(self):
        if not self.zeroed:
            self.zeroed = True
            return 0
        return super().scalar()


def test_rho_zero_never_used():
    rng = ZeroFirst()
    h = bls12_381().g1 ** 3
    cc = prove_nonrevocation_clause(5, (h, h ** 9), rng)
    assert rng.zeroed and cc.rho != 0


def test_blocked_helper():
    g = bls12_381().g1
    assert blocked(4, [(g, g ** 3), (g, g ** 4)])
    assert not blocked(4, [(g, g ** 3), (g ** 2, g ** 4)])
    assert not blocked(4, [])


def test_mixed_witness_rejected(household, other_cred):
    pk, cred, _ = household
    pc = pc_gen()
    rng = Rng("mixed")
    k, x = cred.attributes[K_IDX], cred.attributes[RH_IDX]
    e = other_cred.attributes[ENT_IDX]
    r, t_s = rng.scalar(), rng.scalar()
    s1, s2 = randomize(cred, rng.nonzero_scalar(), t_s)
    tau, com = household_tag(k, 9), pc_commit(pc, e, r)
    wit = Witness(k=k, e=e, x=x, r=r, t_s=t_s, s=rng.scalar())
    proof = build_proof(pk, pc, 9, tau, com, EMPTY, s1, s2, wit, rng)
    assert not verify_showup(pk, 9, e, tau, com, r, proof, EMPTY)


def test_verify_cost_affine_in_blocklist(household):
    """Per-entry cost (t(n) - t(0)) / n agrees within 20% across sizes."""
    pk, cred, _ = household
    ent = cred.attributes[ENT_IDX]
    sizes = (0, 128, 256, 512, 1024)
    cases = []
    for n in sizes:
        bl = decoys(n, "affine")
        bl.pairs
        tau, com, r, proof = show(household, 20 + n, bl)
        cases.append(lambda n=n, bl=bl, a=(tau, com, r, proof): verify_showup(pk, 20 + n, ent, *a, bl))
    cases[-1]()  # warm-up
    best = [float("inf")] * len(sizes)
    for _ in range(5):  # interleaved so drift hits every size alike
        for i, run in enumerate(cases):
            t0 = time.perf_counter()
            assert run()
            best[i] = min(best[i], time.perf_counter() - t0)
    slopes = [(t - best[0]) / n for n, t in zip(sizes[1:], best[1:])]
    mean = statistics.fmean(slopes)
    assert all(abs(s - mean) <= 0.2 * mean for s in slopes), slopes
