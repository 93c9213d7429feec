"""Exit criteria.  Slow: the whole module takes several minutes.

Each test records its verdict through the ``criterion`` fixture, and the
session ends with one PASS/FAIL line per criterion.  Run just these with
``pytest -m acceptance``.
"""

import json
import statistics
import time
from pathlib import Path

import pytest

from aidist.core import MAX_ENTITLEMENT, AbortReason, Record, auditor_verify, gen_audit
from aidist.crypto.encoding import g1_to_bytes, scalar_to_bytes
from aidist.crypto.instrument import count_ops
from aidist.crypto.pedersen import pc_combine, pc_commit, pc_gen
from aidist.crypto.rng import Rng
from aidist.games import adversaries as A
from aidist.games.runner import run_adversary, run_kit
from aidist.schemes import get_scheme
from aidist.sim.bench import DEFAULT_SIZES, run_bench
from aidist.sim.simulation import ScenarioConfig, Simulation

pytestmark = pytest.mark.acceptance

SYSTEMS = ["card", "phone"]
GOLDEN = Path(__file__).parent / "golden" / "message_sizes.json"


# 1 -----------------------------------------------------------------------------------


@pytest.mark.parametrize("system", SYSTEMS)
def test_end_to_end_correctness(system, criterion):
    t0 = time.perf_counter()
    sim = Simulation(ScenarioConfig(system=system, households=1000, epochs=3, seed=2024))
    sim.register()
    revoked: set[int] = set()
    problems = []
    for epoch in (1, 2, 3):
        rep = sim.distribute(epoch)
        ent_sum, verdict = sim.audit(epoch)
        oracle = sum(h.ent for h in sim.households if h.hid not in revoked)
        if rep.rejected or rep.accepted != 1000 - len(revoked) or rep.blocked != len(revoked):
            problems.append(f"eps{epoch}: {rep.row()}")
        if not verdict or ent_sum != oracle:
            problems.append(f"eps{epoch}: audit={verdict.reason or 'ok'} sum={ent_sum} oracle={oracle}")
        revoked |= set(sim.revoke_random(epoch, 50))  # 5% per epoch
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 300
    criterion(1, ok, f"{system}: {len(revoked)} revoked, {elapsed:.0f}s" + (f" {problems}" if problems else ""))
    assert not problems, problems
    assert elapsed < 300, f"{elapsed:.1f}s"


# 2 -----------------------------------------------------------------------------------


@pytest.mark.parametrize("system", SYSTEMS)
def test_double_dipping_detected(system, criterion):
    clone_runs = detected = 0
    bad = []
    for seed in range(10):
        sim = Simulation(ScenarioConfig(system=system, households=500, cards_per_household=2, seed=seed))
        sim.register()
        sim.clone_all()
        rep = sim.distribute(1)
        for hid, counts in rep.per_household.items():
            clone_runs += 1
            detected += counts["duplicate"]
            if counts["accepted"] != 1:
                bad.append((seed, hid, dict(counts)))
    rate = detected / clone_runs
    ok = not bad and rate == 1.0
    criterion(2, ok, f"{system}: detection {rate:.0%} over {clone_runs} clone showups, 10 seeds")
    assert not bad, bad[:5]
    assert rate == 1.0


# 3 -----------------------------------------------------------------------------------


def test_revoked_card_aborts(criterion):
    sim = Simulation(ScenarioConfig(system="card", households=200, seed=3))
    sim.register()
    picked = sim.revoke_random(0, 20)
    rep = sim.distribute(1)
    aborted = 0
    for hid in picked:
        token = sim.households[hid].tokens[0]
        resp = sim.scheme.showup(token, 2, sim.bl, Rng(hid))
        aborted += resp.aborted and token.last_abort_reason is AbortReason.BLOCKED
    ok = aborted == len(picked) and rep.blocked == len(picked) and rep.accepted == 180
    criterion(3, ok, f"card: {aborted}/{len(picked)} revoked cards abort")
    assert ok


@pytest.mark.parametrize("system", SYSTEMS)
def test_revocation_kit(system, criterion):
    rows = run_kit("rev", system, 1000, seed0=30_000)
    wins = sum(r.wins for r in rows)
    criterion(3, wins == 0, f"{system}: rev kit {wins} wins / 1000 ({len(rows)} attacks)")
    assert wins == 0, [r.as_dict() for r in rows if r.wins]


# 4, 5 --------------------------------------------------------------------------------


@pytest.mark.parametrize("system", SYSTEMS)
def test_audit_soundness_kit(system, criterion):
    rows = run_kit("aud", system, 1000, seed0=40_000)
    wins = sum(r.wins for r in rows)
    criterion(4, wins == 0, f"{system}: aud kit {wins} wins / 1000 ({len(rows)} attacks)")
    assert wins == 0, [r.as_dict() for r in rows if r.wins]


@pytest.mark.parametrize("system", SYSTEMS)
def test_security_kit(system, criterion):
    rows = run_kit("sec", system, 1000, seed0=50_000)
    wins = sum(r.wins for r in rows)
    criterion(5, wins == 0, f"{system}: sec kit {wins} wins / 1000 ({len(rows)} attacks)")
    assert wins == 0, [r.as_dict() for r in rows if r.wins]


# 6 -----------------------------------------------------------------------------------


@pytest.mark.parametrize("system", SYSTEMS)
@pytest.mark.parametrize("adv", [A.IndBlindGuess, A.IndByteCompare, A.EntBlindGuess, A.EntByteCompare])
def test_privacy_baselines_at_chance(system, adv, criterion):
    row = run_adversary(system, adv, 2000, seed0=60_000)
    ok = abs(row.rate - 0.5) <= 0.05 and not row.guards
    criterion(6, ok, f"{system} {adv.name}: {row.rate:.3f}")
    assert not row.guards, dict(row.guards)
    assert abs(row.rate - 0.5) <= 0.05, row.rate


# 7 -----------------------------------------------------------------------------------


def test_homomorphic_audit_identity(criterion):
    pc = pc_gen()
    rng = Rng("identity")
    failures = 0
    for epoch in range(1000):
        n = 1 + rng.below(100)
        ents = [rng.below(MAX_ENTITLEMENT + 1) for _ in range(n)]
        rs = [rng.scalar() for _ in range(n)]
        coms = [pc_commit(pc, e, r) for e, r in zip(ents, rs)]
        records = [Record(e, rng.bytes(32), (r, c), b"bl") for e, r, c in zip(ents, rs, coms)]
        ent_sum, proof = gen_audit(records, lambda rec: (*rec.proof, None), False)
        same = pc_combine(pc, coms) == pc_commit(pc, ent_sum, proof.r_sum)
        accepted = auditor_verify(pc, ent_sum, proof, lambda entry: True)
        failures += not (ent_sum == sum(ents) and same and accepted)
    criterion(7, failures == 0, f"{1000 - failures}/1000 epochs")
    assert failures == 0


# 8 -----------------------------------------------------------------------------------


def test_phone_scaling_shape(criterion):
    res = run_bench("phone", DEFAULT_SIZES, reps=5, seed=0)
    at_max = res.rows[-1].total_s
    ok = res.r2 >= 0.99 and at_max < 10
    criterion(8, ok, f"phone: R^2={res.r2:.4f}, slope={res.slope * 1e3:.3f} ms/entry, total@1024={at_max:.2f}s")
    assert res.r2 >= 0.99
    assert at_max < 10


# 9 -----------------------------------------------------------------------------------


def test_card_operation_budget(criterion):
    card = get_scheme("card")
    auth = card.setup(Rng("budget"))
    bl = card.empty_blocklist()
    budgets, times = [], []
    for i in range(100):
        token = card.new_token(auth.public)
        card.register(auth, token, 5, Rng(f"budget/{i}"))
        t0 = time.perf_counter()
        with count_ops() as ops:
            card.showup(token, 1, bl, Rng(i))
        times.append(time.perf_counter() - t0)
        budgets.append(dict(ops))
    want = {"prf": 1, "fixed_base_exp": 2, "signature": 1}
    ok = all(b == want for b in budgets) and max(times) < 0.05
    criterion(9, ok, f"card: ops {budgets[0]}, median {statistics.median(times) * 1e3:.2f} ms, max {max(times) * 1e3:.2f} ms")
    assert all(b == want for b in budgets), budgets[0]
    assert max(times) < 0.05


# 10 ----------------------------------------------------------------------------------


def measured_sizes() -> dict:
    phone, card = get_scheme("phone"), get_scheme("card")
    rng = Rng("sizes")
    auth = phone.setup(rng)
    token = phone.new_token(auth.public)
    req = phone.prepare(token, rng)
    resp, _ = phone.rs_process(auth, 7, req, rng)
    c_len = len(g1_to_bytes(req.C))
    card_resp, v = card.rs_process(card.setup(rng), 7, None, rng)
    return {
        "phone_request": {"C": c_len, "pi": len(req.to_bytes()) - c_len},
        "phone_response": {
            "sigma": len(resp.blind.to_bytes()),
            "ent": len(scalar_to_bytes(resp.ent)),
            "v": len(scalar_to_bytes(resp.r_H)),
        },
        "card_registration": {"ent": len(scalar_to_bytes(card_resp.ent)), "v": len(card_resp.v)},
    }


def test_message_sizes_match_golden(criterion):
    golden = json.loads(GOLDEN.read_text())
    got = measured_sizes()
    deviation = {
        msg: {f: got[msg][f] - n for f, n in fields.items()} for msg, fields in golden["reported"].items()
    }
    ok = deviation == golden["deviation"]
    flat = ", ".join(f"{m}.{f}={got[m][f]}" for m in got for f in got[m])
    criterion(10, ok, flat)
    assert deviation == golden["deviation"], deviation
