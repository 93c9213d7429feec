import json

import pytest

from aidist.sim import store
from aidist.sim.bench import run_bench
from aidist.sim.cli import main
from aidist.sim.simulation import ScenarioConfig, Simulation
from aidist.sim.store import Kind
from aidist.sim.workspace import Workspace


# -- in-process simulation ------------------------------------------------------------


@pytest.mark.parametrize("system", ["card", "phone"])
def test_simulation_sums_match_independent_count(system):
    cfg = ScenarioConfig(system=system, households=12, ent_min=1, ent_max=9, epochs=3, seed=4)
    sim = Simulation(cfg)
    sim.register()
    revoked = set()
    for epoch in (1, 2, 3):
        sim.distribute(epoch)
        ent_sum, verdict = sim.audit(epoch)
        assert verdict
        assert ent_sum == sum(h.ent for h in sim.households if h.hid not in revoked)
        picked = sim.revoke_random(epoch, 2)
        assert len(picked) == 2 and not revoked & set(picked)
        revoked |= set(picked)
    assert sim.reports[3].blocked == 4


def test_entitlements_drawn_in_range():
    sim = Simulation(ScenarioConfig(households=50, ent_min=3, ent_max=6, seed=1))
    sim.register()
    ents = [h.ent for h in sim.households]
    assert min(ents) >= 3 and max(ents) <= 6 and len(set(ents)) > 1


@pytest.mark.parametrize("system", ["card", "phone"])
def test_clones_accepted_once(system):
    sim = Simulation(ScenarioConfig(system=system, households=5, cards_per_household=3, seed=2))
    rows = sim.run()
    assert rows[0]["accepted"] == 5 and rows[0]["duplicate"] == 10
    assert all(c["accepted"] == 1 for c in sim.reports[1].per_household.values())
    assert rows[0]["ent_sum"] == rows[0]["expected"] and rows[0]["audit"] == "ok"


def test_revocations_take_effect_next_epoch():
    rows = Simulation(ScenarioConfig(households=8, epochs=3, revocations_per_epoch=2, seed=3)).run()
    assert [r["blocked"] for r in rows] == [0, 2, 4]
    assert all(r["ent_sum"] == r["expected"] and r["audit"] == "ok" for r in rows)


def test_rerun_of_epoch_is_refused_not_blocked():
    sim = Simulation(ScenarioConfig(households=3, seed=5))
    sim.register()
    sim.distribute(1)
    rep = sim.distribute(1)
    assert rep.refused == 3 and rep.blocked == 0 and rep.accepted == 0


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(ent_min=5, ent_max=4)
    with pytest.raises(ValueError):
        ScenarioConfig(households=-1)
    with pytest.raises(ValueError):
        ScenarioConfig(system="tablet")


# -- artifacts ------------------------------------------------------------------------


def test_store_round_trip_and_errors(tmp_path):
    p = tmp_path / "a.bin"
    store.write(p, Kind.LOG, 1, b"payload")
    assert store.read(p, Kind.LOG) == (1, b"payload")
    with pytest.raises(store.ArtifactCorrupt):
        store.read(p, Kind.AUDIT)
    data = bytearray(p.read_bytes())
    data[12] ^= 1
    with pytest.raises(store.ArtifactCorrupt):
        store.unpack(bytes(data), Kind.LOG)
    data = bytearray(p.read_bytes())
    data[4] = 9
    with pytest.raises(store.ArtifactVersion):
        store.unpack(bytes(data), Kind.LOG)
    with pytest.raises(store.ArtifactCorrupt):
        store.unpack(p.read_bytes()[:-1], Kind.LOG)
    with pytest.raises(store.ArtifactMissing):
        store.read(tmp_path / "none.bin", Kind.LOG)


@pytest.mark.parametrize("system", ["card", "phone"])
def test_workspace_round_trip(tmp_path, system):
    ws = Workspace(tmp_path)
    sim = ws.init(ScenarioConfig(system=system, households=3, seed=6))
    sim.register()
    sim.revoke([1])
    sim.distribute(1)
    ws.save(sim, households=True, blocklist=True, log=True)
    back = ws.load()
    assert [h.ent for h in back.households] == [h.ent for h in sim.households]
    assert back.bl == sim.bl and back.log.tags(1) == sim.log.tags(1)
    ent_sum, verdict = back.audit(1)
    assert verdict and ent_sum == sim.households[0].ent + sim.households[2].ent
    assert back.distribute(1).refused == 2  # token state survived


# -- command line --------------------------------------------------------------------


def cli(tmp_path, *argv):
    return main([*argv, "--out-dir", str(tmp_path)])


def cli_json(capsys, tmp_path, *argv):
    capsys.readouterr()
    code = cli(tmp_path, *argv, "--json")
    return code, json.loads(capsys.readouterr().out)


def test_cli_full_flow(tmp_path, capsys):
    assert cli(tmp_path, "setup", "--households", "10", "--seed", "7") == 0
    _, reg = cli_json(capsys, tmp_path, "register")
    expected = sum(r["ent"] for r in reg["rows"])
    code, dist = cli_json(capsys, tmp_path, "distribute", "--epoch", "1")
    assert code == 0 and dist["totals"]["accepted"] == 10
    code, audit = cli_json(capsys, tmp_path, "audit", "--epoch", "1")
    assert code == 0 and audit["rows"][0] == {"epoch": 1, "records": 10, "ent_sum": expected, "verdict": "ok"}
    assert (tmp_path / "audit-station-1.bin").exists()


def test_cli_clone_duplicate(tmp_path, capsys):
    cli(tmp_path, "setup", "--households", "1")
    cli(tmp_path, "register")
    cli(tmp_path, "clone", "--members", "2")
    _, dist = cli_json(capsys, tmp_path, "distribute", "--epoch", "1")
    assert dist["rows"] == [{"hid": 0, "accepted": 1, "duplicate": 1, "blocked": 0, "refused": 0, "rejected": 0}]
    assert cli(tmp_path, "audit", "--epoch", "1") == 0


def test_cli_cross_station_merge(tmp_path, capsys):
    cli(tmp_path, "setup", "--households", "2", "--cards-per-household", "2")
    cli(tmp_path, "register")
    cli(tmp_path, "clone")
    cli(tmp_path, "distribute", "--station", "a", "--member", "0")
    cli(tmp_path, "distribute", "--station", "b", "--member", "1")
    code, merged = cli_json(capsys, tmp_path, "merge-tags", str(tmp_path / "log-a.bin"), str(tmp_path / "log-b.bin"))
    assert code == 1 and merged["rows"][0]["tags"] == 2 and merged["rows"][0]["duplicates"] == 2


def test_cli_revoke_blocks(tmp_path, capsys):
    cli(tmp_path, "setup", "--households", "3")
    cli(tmp_path, "register")
    assert cli(tmp_path, "revoke", "1") == 0
    _, dist = cli_json(capsys, tmp_path, "distribute", "--epoch", "1")
    assert dist["totals"]["blocked"] == 1 and dist["totals"]["accepted"] == 2
    assert cli(tmp_path, "audit", "--epoch", "1") == 0
    assert cli(tmp_path, "revoke", "9") == 6


@pytest.mark.parametrize("system", ["card", "phone"])
def test_cli_byte_identical_reruns(tmp_path, system):
    outs = []
    for run in ("x", "y"):
        d = tmp_path / run
        for argv in (["setup", "--households", "3", "--seed", "11"], ["register"], ["distribute"], ["audit"]):
            assert main([*argv, "--system", system, "--out-dir", str(d)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.glob("*.bin"))})
    assert outs[0] == outs[1] and len(outs[0]) == 5


def test_cli_exit_codes(tmp_path, capsys):
    assert cli(tmp_path, "register") == 3
    cli(tmp_path, "setup", "--households", "2")
    assert cli(tmp_path, "setup") == 6
    assert cli(tmp_path, "setup", "--force") == 0
    cli(tmp_path, "register")
    assert cli(tmp_path, "register") == 6
    assert cli(tmp_path, "audit", "--epoch", "4") == 6
    hh = tmp_path / "households.bin"
    data = bytearray(hh.read_bytes())
    data[20] ^= 0xFF
    hh.write_bytes(bytes(data))
    assert cli(tmp_path, "distribute") == 4
    data = bytearray((tmp_path / "setup.bin").read_bytes())
    data[4] = 9
    (tmp_path / "setup.bin").write_bytes(bytes(data))
    assert cli(tmp_path, "distribute") == 5
    with pytest.raises(SystemExit) as exc:
        cli(tmp_path, "setup", "--system", "tablet")
    assert exc.value.code == 2
    assert cli(tmp_path, "game", "--experiment", "ind", "--adversary", "aud-record-duplication") == 2


def test_cli_game_and_bench(tmp_path, capsys):
    code, out = cli_json(capsys, tmp_path, "game", "--experiment", "aud", "--trials", "10")
    assert code == 0 and sum(r["wins"] for r in out["rows"]) == 0
    code, out = cli_json(capsys, tmp_path, "game", "--adversary", "ind-blind-guess", "--trials", "4")
    assert code == 0 and out["rows"][0]["trials"] == 4
    code, out = cli_json(capsys, tmp_path, "bench", "--bl-size", "0", "--bl-size", "16", "--reps", "1")
    assert code == 0 and out["system"] == "phone" and [r["bl_size"] for r in out["rows"]] == [0, 16]
    with pytest.raises(SystemExit) as exc:
        cli(tmp_path, "game")
    assert exc.value.code == 2


def test_cli_tsv_output(tmp_path, capsys):
    cli(tmp_path, "setup", "--households", "2")
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split("\t") == ["system", "seed", "households", "out_dir"]
    assert lines[1].split("\t")[:3] == ["card", "0", "2"]


# -- benchmark -----------------------------------------------------------------------


def test_bench_grows_with_blocklist():
    res = run_bench("phone", (0, 64, 256), reps=3, seed=1)
    assert res.monotone and res.slope > 0
    sizes = [r.bl_size for r in res.rows]
    assert sizes == [0, 64, 256]
    assert res.rows[2].bl_bytes > res.rows[0].bl_bytes
    assert res.rows[2].response_bytes > res.rows[0].response_bytes


def test_bench_card_flat_response():
    res = run_bench("card", (0, 64), reps=1, seed=1)
    assert res.rows[0].response_bytes == res.rows[1].response_bytes
    with pytest.raises(ValueError):
        run_bench("card", (0,), throughput=0)


def test_bench_fit_exact_line():
    from aidist.sim.bench import BenchResult, BenchRow

    res = BenchResult("phone", 1.0, [BenchRow(n, 0, 0.5 + 0.01 * n, 0, 0.0, 0, 0) for n in (0, 10, 20)])
    res.fit()
    assert res.slope == pytest.approx(0.01) and res.intercept == pytest.approx(0.5) and res.r2 == pytest.approx(1.0)
