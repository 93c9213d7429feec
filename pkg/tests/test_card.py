import pytest
from hypothesis import given
from hypothesis import strategies as st

from aidist import card as C
from aidist.core import AbortReason, Blocklist, BlocklistKind, TokenBusy, bl_revoke
from aidist.crypto.instrument import count_ops
from aidist.crypto.pedersen import pc_commit, pc_gen
from aidist.crypto.prf import prf_eval
from aidist.crypto.rng import Rng
from aidist.crypto.signature import sig_gen

EMPTY = Blocklist(BlocklistKind.CARD)


@pytest.fixture(scope="module")
def keys():
    return sig_gen(Rng("card-keys"))


def registered(keys, ent=4, label="card"):
    sk, pk = keys
    rng = Rng(label)
    state = C.card_setup(pk)
    resp, v = C.rs_process_reg_card(sk, ent, rng)
    return C.card_finish_reg(state, resp, rng), v


def test_fresh_card_state(keys):
    a, b = C.card_setup(keys[1]), C.card_setup(keys[1])
    assert a.epoch_last == 0 and not a.registered
    assert a is not b
    with pytest.raises(C.CardError):
        C.card_showup(a, 1, EMPTY)


def test_registration_response(keys):
    sk, _ = keys
    rng = Rng("reg")
    r1, v1 = C.rs_process_reg_card(sk, 7, rng)
    r2, v2 = C.rs_process_reg_card(sk, 7, rng)
    assert len(v1) == 32 and v1 != v2
    assert r1.ent == 7 and r1.v == v1
    assert C.CardRegResponse.from_bytes(r1.to_bytes()) == r1
    assert v1.hex() not in repr(r1) and str(r1.sk.x) not in repr(r1)


def test_finish_registration(keys):
    state, _ = registered(keys)
    assert state.registered and state.ent == 4
    resp, _ = C.rs_process_reg_card(keys[0], 4, Rng(1))
    with pytest.raises(C.CardError):
        C.card_finish_reg(state, resp)
    other_sk, _ = sig_gen(Rng("other"))
    foreign, _ = C.rs_process_reg_card(other_sk, 4, Rng(2))
    with pytest.raises(C.CardError):
        C.card_finish_reg(C.card_setup(keys[1]), foreign)


def test_independent_cards_have_different_keys(keys):
    a, _ = registered(keys, label="a")
    b, _ = registered(keys, label="b")
    ra = C.card_showup(a, 5, EMPTY, Rng(1))[1]
    rb = C.card_showup(b, 5, EMPTY, Rng(2))[1]
    assert ra.tag != rb.tag


def test_clone_shares_household_tag(keys):
    src, _ = registered(keys)
    twin = C.card_clone(src, C.card_setup(keys[1]), owner_authenticated=True)
    a = C.card_showup(src, 5, EMPTY, Rng(1))[1]
    b = C.card_showup(twin, 5, EMPTY, Rng(2))[1]
    assert a.tag == b.tag and a.proof.com != b.proof.com


def test_clone_guards(keys):
    src, _ = registered(keys)
    with pytest.raises(C.CardError):
        C.card_clone(src, C.card_setup(keys[1]), owner_authenticated=False)
    with pytest.raises(C.CardError):
        C.card_clone(C.card_setup(keys[1]), C.card_setup(keys[1]), owner_authenticated=True)
    with pytest.raises(C.CardError):
        C.card_clone(src, registered(keys, label="t")[0], owner_authenticated=True)
    C.card_showup(src, 1, EMPTY, Rng(1))
    with pytest.raises(C.CardError):
        C.card_clone(src, C.card_setup(keys[1]), owner_authenticated=True)
    late = C.card_clone(src, C.card_setup(keys[1]), True, allow_after_distribution=True)
    assert late.epoch_last == 1


def test_blocked_card_aborts(keys):
    state, v = registered(keys)
    bl = bl_revoke(EMPTY, v)
    _, resp = C.card_showup(state, 1, bl, Rng(1))
    assert resp.aborted and resp.ent is None and resp.proof is None
    assert state.last_abort_reason is AbortReason.BLOCKED
    assert state.epoch_last == 0


def test_same_epoch_aborts(keys):
    state, _ = registered(keys)
    assert not C.card_showup(state, 3, EMPTY, Rng(1))[1].aborted
    resp = C.card_showup(state, 3, EMPTY, Rng(2))[1]
    assert resp.aborted and state.last_abort_reason is AbortReason.STALE_EPOCH


def test_abort_reasons_identical_on_the_wire(keys):
    a, v = registered(keys, label="x")
    b, _ = registered(keys, label="y")
    blocked = C.card_showup(a, 1, bl_revoke(EMPTY, v), Rng(1))[1]
    C.card_showup(b, 2, EMPTY, Rng(2))
    stale = C.card_showup(b, 1, EMPTY, Rng(3))[1]
    assert blocked.to_bytes() == stale.to_bytes()
    assert C.CardResponse.from_bytes(blocked.to_bytes()).aborted


def test_honest_run_verifies_with_recomputed_tag(keys):
    state, _ = registered(keys)
    _, resp = C.card_showup(state, 9, EMPTY, Rng(1))
    assert C.ds_verify_ent_card(keys[1], 9, resp, EMPTY)
    assert resp.tag == prf_eval(state._k, 9)
    assert resp.proof.com == pc_commit(pc_gen(), 4, resp.proof.r)
    assert C.CardResponse.from_bytes(resp.to_bytes()) == resp


def test_station_rejections(keys):
    state, _ = registered(keys)
    _, resp = C.card_showup(state, 9, EMPTY, Rng(1))
    other_bl = bl_revoke(EMPTY, b"\x01" * 32)
    assert C.ds_verify_ent_card(keys[1], 9, resp, other_bl).reason == "signature"
    p = resp.proof
    moved = C.CardResponse(resp.ent, resp.tag, C.CardEntProof(p.sigma, p.epoch, p.com, p.r + 1))
    assert C.ds_verify_ent_card(keys[1], 9, moved, EMPTY).reason == "opening"
    assert C.ds_verify_ent_card(keys[1], 10, resp, EMPTY).reason == "epoch"
    inflated = C.CardResponse(resp.ent + 1, resp.tag, p)
    assert not C.ds_verify_ent_card(keys[1], 9, inflated, EMPTY)
    assert C.ds_verify_ent_card(keys[1], 9, C.CardResponse.abort(), EMPTY).reason == "aborted"
    with pytest.raises(ValueError):
        C.card_showup(state, 10, Blocklist(BlocklistKind.PHONE))


@given(st.lists(st.integers(1, 12), min_size=1, max_size=10))
def test_single_shot_per_epoch(epochs):
    keys = sig_gen(Rng("prop"))
    state, _ = registered(keys)
    high = 0
    for i, eps in enumerate(epochs):
        resp = C.card_showup(state, eps, EMPTY, Rng(i))[1]
        assert resp.aborted == (eps <= high)
        high = max(high, eps) if not resp.aborted else high
        assert state.epoch_last == high


def test_non_clone_tags_do_not_collide():
    rng = Rng("collide")
    tags = {prf_eval(rng.bytes(32), 1) for _ in range(100_000)}
    assert len(tags) == 100_000


def test_operation_budget(keys):
    state, _ = registered(keys)
    with count_ops() as ops:
        C.card_showup(state, 1, EMPTY, Rng(1))
    assert ops == {"prf": 1, "fixed_base_exp": 2, "signature": 1}


def test_busy_card_refuses_reentry(keys):
    state, _ = registered(keys)
    with state.session():
        with pytest.raises(TokenBusy):
            C.card_showup(state, 1, EMPTY, Rng(1))
    assert not C.card_showup(state, 1, EMPTY, Rng(1))[1].aborted


def test_transcript_dump(keys):
    sk, pk = keys
    state = C.card_setup(pk, transcript=True)
    resp, _ = C.rs_process_reg_card(sk, 2, Rng(1))
    C.card_finish_reg(state, resp, Rng(1))
    C.card_showup(state, 1, EMPTY, Rng(2))
    lines = state.dump_transcript().splitlines()
    assert [ln[:8] for ln in lines] == [">> 80 10", ">> 80 20", "<< " + lines[2][3:8]]
    assert lines[-1].endswith("9000")


def test_state_round_trip(keys):
    state, _ = registered(keys)
    C.card_showup(state, 4, EMPTY, Rng(1))
    back = C.CardState.from_bytes(state.to_bytes())
    assert back.epoch_last == 4 and back.registered
    assert C.card_showup(back, 4, EMPTY, Rng(2))[1].aborted
    assert C.card_showup(back, 5, EMPTY, Rng(3))[1].tag == prf_eval(state._k, 5)
    assert state._k.hex() not in repr(state) and state._v.hex() not in repr(state)
