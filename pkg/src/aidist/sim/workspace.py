"""On-disk state for the command-line phases.

Every phase loads what earlier phases wrote, runs the in-process
:class:`Simulation` step, and writes its artifacts back.  Randomness is
derived from the scenario seed and a per-step label, so re-running the same
command chain writes byte-identical files.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from aidist.core import Blocklist, TransactionLog, bl_revoke
from aidist.crypto.encoding import Reader, Writer
from aidist.phone import revocation_token
from aidist.sim import store
from aidist.sim.simulation import Household, ScenarioConfig, Simulation
from aidist.sim.store import Kind

OUT_DIR_ENV = "AIDIST_OUT_DIR"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "aidist-out"))


class Workspace:
    def __init__(self, root: Path | str, station: str = "station") -> None:
        self.root = Path(root)
        self.station = station

    # paths
    @property
    def setup_path(self) -> Path:
        return self.root / "setup.bin"

    @property
    def households_path(self) -> Path:
        return self.root / "households.bin"

    @property
    def blocklist_path(self) -> Path:
        return self.root / "blocklist.bin"

    @property
    def log_path(self) -> Path:
        return self.log_path_for(self.station)

    def log_path_for(self, station: str) -> Path:
        return self.root / f"log-{station}.bin"

    def audit_path(self, epoch: int, suffix: str = "bin") -> Path:
        return self.root / f"audit-{self.station}-{epoch}.{suffix}"

    # setup ------------------------------------------------------------------
    def init(self, config: ScenarioConfig) -> Simulation:
        sim = Simulation(config)
        sim.setup()
        self.save(sim, households=True, blocklist=True)
        cfg = json.dumps(config.to_dict(), sort_keys=True).encode()
        payload = Writer().blob(cfg).blob(sim.scheme.auth_to_bytes(sim.auth)).getvalue()
        store.write(self.setup_path, Kind.SETUP, int(sim.scheme.bl_kind), payload)
        (self.root / "setup.txt").write_text(
            "".join(f"{k}\t{v}\n" for k, v in sorted(config.to_dict().items()))
        )
        return sim

    def load(self) -> Simulation:
        system, payload = store.read(self.setup_path, Kind.SETUP)

        def parse():
            rd = Reader(payload)
            cfg = json.loads(rd.blob())
            auth_bytes = rd.blob()
            rd.done()
            cfg["bl_sizes"] = tuple(cfg["bl_sizes"])
            return ScenarioConfig(**cfg), auth_bytes

        config, auth_bytes = store.decode(self.setup_path, parse)
        sim = Simulation(config)
        if system != int(sim.scheme.bl_kind):
            raise store.ArtifactCorrupt(f"{self.setup_path}: system byte disagrees with the stored config")
        sim.auth = store.decode(self.setup_path, lambda: sim.scheme.auth_from_bytes(auth_bytes))
        self._load_households(sim)
        self._load_blocklist(sim)
        if self.log_path.exists():
            sim.log, sim.epoch_bl = self.read_log(sim, self.log_path)
        return sim

    # households -------------------------------------------------------------
    def _households_payload(self, sim: Simulation) -> bytes:
        w = Writer().u32(len(sim.households))
        for hh in sim.households:
            w.u32(hh.hid).u32(hh.ent).blob(hh.rev).u8(int(hh.revoked)).u32(len(hh.tokens))
            for t in hh.tokens:
                w.blob(sim.scheme.token_to_bytes(t))
        return w.getvalue()

    def _load_households(self, sim: Simulation) -> None:
        if not self.households_path.exists():
            return
        _, payload = store.read(self.households_path, Kind.HOUSEHOLDS)

        def parse():
            rd = Reader(payload)
            out = []
            for _ in range(rd.u32()):
                hh = Household(rd.u32(), rd.u32(), rev=rd.blob(), revoked=bool(rd.u8()))
                hh.tokens = [sim.scheme.token_from_bytes(rd.blob()) for _ in range(rd.u32())]
                out.append(hh)
            rd.done()
            return out

        sim.households = store.decode(self.households_path, parse)

    def _load_blocklist(self, sim: Simulation) -> None:
        if not self.blocklist_path.exists():
            return
        _, payload = store.read(self.blocklist_path, Kind.BLOCKLIST)
        bl = store.decode(self.blocklist_path, lambda: Blocklist.from_bytes(payload))
        if bl.kind != sim.scheme.bl_kind:
            raise store.ArtifactCorrupt(f"{self.blocklist_path}: blocklist for the other token system")
        sim.bl = bl

    # station log ------------------------------------------------------------
    def log_payload(self, sim: Simulation) -> bytes:
        epochs = sorted(set(sim.epoch_bl) | set(sim.log.epochs()))
        w = Writer().u32(len(epochs))
        for eps in epochs:
            recs = sim.log.records(eps)
            bl = sim.epoch_bl.get(eps, sim.scheme.empty_blocklist())
            w.u64(eps).blob(bl.to_bytes()).u32(len(recs))
            for rec in recs:
                w.blob(sim.scheme.record_to_bytes(rec))
        return w.getvalue()

    def read_log(self, sim: Simulation, path: Path) -> tuple[TransactionLog, dict[int, Blocklist]]:
        _, payload = store.read(path, Kind.LOG)

        def parse():
            rd = Reader(payload)
            log, bls = TransactionLog(), {}
            for _ in range(rd.u32()):
                eps = rd.u64()
                bls[eps] = Blocklist.from_bytes(rd.blob())
                for _ in range(rd.u32()):
                    log.insert(eps, sim.scheme.record_from_bytes(rd.blob()))
            rd.done()
            return log, bls

        return store.decode(path, parse)

    # saving -----------------------------------------------------------------
    def save(self, sim: Simulation, *, households=False, blocklist=False, log=False) -> None:
        kind = int(sim.scheme.bl_kind)
        if households:
            store.write(self.households_path, Kind.HOUSEHOLDS, kind, self._households_payload(sim))
        if blocklist:
            store.write(self.blocklist_path, Kind.BLOCKLIST, kind, sim.bl.to_bytes())
        if log:
            store.write(self.log_path, Kind.LOG, kind, self.log_payload(sim))

    def save_audit(self, sim: Simulation, epoch: int, ent_sum: int, proof, verdict) -> None:
        payload = Writer().u64(epoch).u64(ent_sum).blob(sim.scheme.audit_to_bytes(proof)).getvalue()
        store.write(self.audit_path(epoch), Kind.AUDIT, int(sim.scheme.bl_kind), payload)
        self.audit_path(epoch, "txt").write_text(
            f"epoch\t{epoch}\nrecords\t{len(proof)}\nent_sum\t{ent_sum}\n"
            f"verdict\t{'ok' if verdict else 'fail:' + verdict.reason}\n"
        )


def padded_blocklist(sim: Simulation, size: int) -> Blocklist:
    """The live blocklist topped up with seed-derived entries that match no household."""
    bl = sim.bl
    rng = sim.rng.fork("decoys")
    while len(bl) < size:
        if sim.scheme.name == "card":
            bl = bl_revoke(bl, rng.bytes(32))
        else:
            bl = bl_revoke(bl, revocation_token(rng.nonzero_scalar()).to_bytes())
    return bl
