"""``aidist`` command line: phase-by-phase simulation, benchmark, games.

Output is a tab-separated table with a header row, or one JSON document
with ``--json``.  Exit codes:

    0  success
    1  a verification failed (audit rejected, bench shape off, attack won)
    2  usage error
    3  an input artifact is missing
    4  an input artifact is corrupt
    5  an input artifact has an unsupported format version
    6  the requested step conflicts with the current state
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from aidist.core import AuditError, merge_tag_sets
from aidist.sim import store
from aidist.sim.bench import DEFAULT_SIZES, DEFAULT_THROUGHPUT, run_bench
from aidist.sim.simulation import ScenarioConfig
from aidist.sim.workspace import OUT_DIR_ENV, Workspace, default_out_dir, padded_blocklist

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_MISSING, EXIT_CORRUPT, EXIT_VERSION, EXIT_STATE = range(7)


class StateError(Exception):
    pass


def emit(rows: list[dict], as_json: bool, out=None, meta: dict | None = None) -> None:
    out = out or sys.stdout
    if as_json:
        json.dump({**(meta or {}), "rows": rows}, out, indent=2, sort_keys=True)
        out.write("\n")
        return
    if not rows:
        return
    cols = list(rows[0])
    out.write("\t".join(cols) + "\n")
    for r in rows:
        out.write("\t".join(_cell(r[c]) for c in cols) + "\n")


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict):
        return ",".join(f"{k}={n}" for k, n in sorted(v.items())) or "-"
    return str(v)


# -- phases -----------------------------------------------------------------


def cmd_setup(args) -> int:
    cfg = ScenarioConfig(
        system=args.system,
        households=args.households,
        cards_per_household=args.cards_per_household,
        ent_min=args.ent_min,
        ent_max=args.ent_max,
        epochs=args.epochs,
        revocations_per_epoch=args.revocations_per_epoch,
        seed=args.seed,
    )
    ws = Workspace(args.out_dir)
    if ws.setup_path.exists() and not args.force:
        raise StateError(f"{ws.setup_path} exists; pass --force to start over")
    for stale in ws.root.glob("*.bin"):
        stale.unlink()
    ws.init(cfg)
    emit([{"system": cfg.system, "seed": cfg.seed, "households": cfg.households, "out_dir": str(ws.root)}], args.json)
    return EXIT_OK


def cmd_register(args) -> int:
    ws = Workspace(args.out_dir)
    sim = ws.load()
    if len(sim.households) >= sim.config.households:
        raise StateError("all configured households are already registered")
    sim.register()
    ws.save(sim, households=True)
    emit([{"hid": h.hid, "ent": h.ent, "tokens": len(h.tokens)} for h in sim.households], args.json)
    return EXIT_OK


def cmd_clone(args) -> int:
    ws = Workspace(args.out_dir)
    sim = ws.load()
    if not sim.households:
        raise StateError("no registered households to clone")
    if args.members is not None:
        sim.config.cards_per_household = args.members
    try:
        sim.clone_all()
    except Exception as exc:  # card clone refusals carry the reason
        raise StateError(str(exc)) from exc
    ws.save(sim, households=True)
    emit([{"hid": h.hid, "tokens": len(h.tokens)} for h in sim.households], args.json)
    return EXIT_OK


def cmd_revoke(args) -> int:
    ws = Workspace(args.out_dir)
    sim = ws.load()
    known = {h.hid for h in sim.households}
    bad = [h for h in args.household if h not in known]
    if bad:
        raise StateError(f"unknown household(s): {bad}")
    sim.revoke(args.household)
    ws.save(sim, households=True, blocklist=True)
    emit([{"hid": h, "revoked": True} for h in args.household], args.json, meta={"bl_size": len(sim.bl)})
    return EXIT_OK


def cmd_distribute(args) -> int:
    ws = Workspace(args.out_dir, args.station)
    sim = ws.load()
    if not sim.households:
        raise StateError("no registered households")
    if args.epoch not in sim.epoch_bl:
        sim.epoch_bl[args.epoch] = padded_blocklist(sim, args.bl_size or 0)
    rep = sim.distribute(args.epoch, set(args.member) if args.member else None)
    ws.save(sim, households=True, log=True)
    rows = [
        {"hid": hid, **{k: c.get(k, 0) for k in ("accepted", "duplicate", "blocked", "refused", "rejected")}}
        for hid, c in sorted(rep.per_household.items())
    ]
    emit(rows, args.json, meta={"epoch": args.epoch, "totals": rep.row()})
    return EXIT_OK


def cmd_audit(args) -> int:
    ws = Workspace(args.out_dir, args.station)
    sim = ws.load()
    if args.epoch not in sim.epoch_bl:
        raise StateError(f"station {args.station!r} has no records for epoch {args.epoch}")
    try:
        ent_sum, proof = sim.scheme.gen_audit(sim.log, args.epoch)
    except AuditError as exc:
        raise StateError(str(exc)) from exc
    verdict = sim.scheme.auditor_verify(sim.public, args.epoch, ent_sum, proof, sim.epoch_bl[args.epoch])
    ws.save_audit(sim, args.epoch, ent_sum, proof, verdict)
    emit(
        [{
            "epoch": args.epoch,
            "records": len(proof),
            "ent_sum": ent_sum,
            "verdict": "ok" if verdict else f"fail:{verdict.reason}",
        }],
        args.json,
    )
    return EXIT_OK if verdict else EXIT_VERIFY


def cmd_merge_tags(args) -> int:
    ws = Workspace(args.out_dir)
    sim = ws.load()
    logs = [ws.read_log(sim, Path(p))[0] for p in args.logs]
    epochs = sorted({e for log in logs for e in log.epochs()})
    rows = []
    for eps in epochs:
        union, dups = merge_tag_sets(*(log.tags(eps) for log in logs))
        rows.append({"epoch": eps, "tags": len(union), "duplicates": len(dups),
                     "duplicate_tags": ",".join(sorted(t.hex()[:16] for t in dups)) or "-"})
    emit(rows, args.json)
    return EXIT_OK if not any(r["duplicates"] for r in rows) else EXIT_VERIFY


def cmd_bench(args) -> int:
    sizes = tuple(args.bl_size) if args.bl_size else DEFAULT_SIZES
    res = run_bench(args.system, sizes, args.throughput, args.reps, args.seed)
    rows = [r.as_dict() for r in res.rows]
    meta = {"system": res.system, "throughput": res.throughput, "slope_s_per_entry": res.slope,
            "intercept_s": res.intercept, "r2": res.r2, "monotone": res.monotone}
    emit(rows, args.json, meta=meta)
    if not args.json:
        sys.stdout.write(f"# fit showup+verify = {res.slope:.6g}*|BL| + {res.intercept:.6g} s, R^2={res.r2:.4f}\n")
    return EXIT_OK


def cmd_game(args) -> int:
    from aidist.games.runner import resolve, run_adversary, run_kit, table

    if args.adversary == "kit":
        rows = run_kit(args.experiment, args.system, args.trials, args.seed)
    else:
        cls = resolve(args.adversary)
        if args.experiment and cls.experiment != args.experiment:
            raise ValueError(f"{cls.name} plays the {cls.experiment} experiment")
        if args.system not in cls.systems:
            raise StateError(f"{cls.name} does not apply to the {args.system} system")
        rows = [run_adversary(args.system, cls, args.trials, args.seed)]
    emit(table(rows), args.json)
    baseline = all(r.experiment in ("ind", "ent") and r.guards.total() == 0 for r in rows)
    return EXIT_OK if baseline or not any(r.wins for r in rows) else EXIT_VERIFY


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", choices=("card", "phone"), default=None,
                        help="token system (default card; phone for bench)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", type=Path, default=None,
                        help=f"artifact directory (default ${OUT_DIR_ENV} or ./aidist-out)")
    common.add_argument("--json", action="store_true", help="structured output instead of TSV")

    p = argparse.ArgumentParser(prog="aidist", description="Token-based aid distribution simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("setup", parents=[common], help="create keys and the scenario")
    s.add_argument("--households", type=int, default=10)
    s.add_argument("--cards-per-household", type=int, default=1)
    s.add_argument("--ent-min", type=int, default=1)
    s.add_argument("--ent-max", type=int, default=10)
    s.add_argument("--epochs", type=int, default=1)
    s.add_argument("--revocations-per-epoch", type=int, default=0)
    s.add_argument("--force", action="store_true")
    s.set_defaults(fn=cmd_setup)

    sub.add_parser("register", parents=[common], help="register every configured household").set_defaults(fn=cmd_register)

    s = sub.add_parser("clone", parents=[common], help="copy each household's token onto extra tokens")
    s.add_argument("--members", type=int, default=None, help="tokens per household after cloning")
    s.set_defaults(fn=cmd_clone)

    s = sub.add_parser("revoke", parents=[common], help="blocklist households")
    s.add_argument("household", type=int, nargs="+")
    s.set_defaults(fn=cmd_revoke)

    station = argparse.ArgumentParser(add_help=False)
    station.add_argument("--epoch", type=int, default=1)
    station.add_argument("--station", default="station")

    s = sub.add_parser("distribute", parents=[common, station], help="every token shows up once")
    s.add_argument("--bl-size", type=int, default=0, help="pad the epoch blocklist to this many entries")
    s.add_argument("--member", type=int, action="append",
                   help="only this token index of each household shows up (repeatable)")
    s.set_defaults(fn=cmd_distribute)

    sub.add_parser("audit", parents=[common, station], help="audit proof for one epoch").set_defaults(fn=cmd_audit)

    s = sub.add_parser("merge-tags", parents=[common], help="union of station tag sets with duplicates")
    s.add_argument("logs", nargs="+")
    s.set_defaults(fn=cmd_merge_tags)

    s = sub.add_parser("bench", parents=[common], help="distribution timings over blocklist sizes")
    s.add_argument("--bl-size", type=int, action="append", help="repeat for several sizes")
    s.add_argument("--throughput", type=float, default=DEFAULT_THROUGHPUT, help="bytes per second")
    s.add_argument("--reps", type=int, default=3)
    s.set_defaults(fn=cmd_bench)

    s = sub.add_parser("game", parents=[common], help="run an experiment with a named adversary")
    s.add_argument("--experiment", choices=("ind", "aud", "ent", "sec", "rev"), default=None)
    s.add_argument("--adversary", default="kit", help="adversary name, or 'kit' for the experiment's attacks")
    s.add_argument("--trials", type=int, default=100)
    s.set_defaults(fn=cmd_game)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out_dir is None:
        args.out_dir = default_out_dir()
    if args.system is None:
        args.system = "phone" if args.command == "bench" else "card"
    if args.command == "game" and args.adversary == "kit" and not args.experiment:
        parser.error("--experiment is required with the attack kit")
    try:
        return args.fn(args)
    except store.ArtifactMissing as exc:
        print(f"aidist: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except store.ArtifactVersion as exc:
        print(f"aidist: {exc}", file=sys.stderr)
        return EXIT_VERSION
    except store.ArtifactCorrupt as exc:
        print(f"aidist: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except StateError as exc:
        print(f"aidist: {exc}", file=sys.stderr)
        return EXIT_STATE
    except ValueError as exc:
        print(f"aidist: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
