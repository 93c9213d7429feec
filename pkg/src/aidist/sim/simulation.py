"""In-process end-to-end simulation of registration, distribution and audit."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any

from aidist.core import Blocklist, InsertResult, TransactionLog, Verdict, bl_revoke
from aidist.crypto.rng import Rng
from aidist.schemes import Authority, Scheme, get_scheme


@dataclass
class ScenarioConfig:
    system: str = "card"
    households: int = 10
    cards_per_household: int = 1
    ent_min: int = 1
    ent_max: int = 10
    epochs: int = 1
    revocations_per_epoch: int = 0
    bl_sizes: tuple[int, ...] = (0, 128, 256, 512, 1024)
    seed: int | None = 0

    def __post_init__(self) -> None:
        for name in ("households", "cards_per_household", "ent_min", "ent_max", "epochs", "revocations_per_epoch"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.ent_min > self.ent_max:
            raise ValueError("ent_min exceeds ent_max")
        if self.households and self.cards_per_household < 1:
            raise ValueError("each household needs at least one token")
        if any(b < 0 for b in self.bl_sizes):
            raise ValueError("blocklist sizes must be non-negative")
        self.bl_sizes = tuple(self.bl_sizes)
        get_scheme(self.system)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Household:
    hid: int
    ent: int
    tokens: list = field(default_factory=list)
    rev: bytes = b""
    revoked: bool = False


@dataclass
class EpochReport:
    epoch: int
    accepted: int = 0
    duplicate: int = 0
    blocked: int = 0
    refused: int = 0
    rejected: int = 0
    per_household: dict[int, Counter] = field(default_factory=dict)

    def row(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in ("epoch", "accepted", "duplicate", "blocked", "refused", "rejected")}


class Simulation:
    """Drives one scheme through the four phases with deterministic randomness."""

    def __init__(self, config: ScenarioConfig, scheme: Scheme | None = None) -> None:
        self.config = config
        self.scheme = scheme or get_scheme(config.system)
        self.rng = Rng(config.seed) if config.seed is not None else Rng()
        self.auth: Authority | None = None
        self.households: list[Household] = []
        self.log = TransactionLog()
        self.bl: Blocklist = self.scheme.empty_blocklist()
        self.epoch_bl: dict[int, Blocklist] = {}
        self.reports: dict[int, EpochReport] = {}

    @property
    def public(self) -> Any:
        return self.auth.public

    def setup(self) -> Authority:
        self.auth = self.scheme.setup(self.rng.fork("setup"))
        return self.auth

    def entitlement(self, hid: int) -> int:
        c = self.config
        return c.ent_min + self.rng.fork(f"ent/{hid}").below(c.ent_max - c.ent_min + 1)

    def register(self) -> list[Household]:
        if self.auth is None:
            self.setup()
        for hid in range(len(self.households), self.config.households):
            hh = Household(hid, self.entitlement(hid))
            token = self.scheme.new_token(self.public)
            hh.rev = self.scheme.register(self.auth, token, hh.ent, self.rng.fork(f"reg/{hid}"))
            hh.tokens.append(token)
            self.households.append(hh)
        return self.households

    def clone_all(self) -> None:
        for hh in self.households:
            while len(hh.tokens) < self.config.cards_per_household:
                hh.tokens.append(self.scheme.clone(hh.tokens[0]))

    def revoke(self, hids) -> Blocklist:
        for hid in hids:
            hh = self.households[hid]
            self.bl = bl_revoke(self.bl, hh.rev)
            hh.revoked = True
        return self.bl

    def revoke_random(self, epoch: int, n: int) -> list[int]:
        live = [h.hid for h in self.households if not h.revoked]
        picked = sorted(self.rng.fork(f"revoke/{epoch}").sample(live, min(n, len(live))))
        self.revoke(picked)
        return picked

    def distribute(self, epoch: int, members=None) -> EpochReport:
        """Every token of every household shows up once; the blocklist is frozen for the epoch.

        ``members`` restricts the visit to those token indices, so clones of
        one household can be sent to different stations.
        """
        bl = self.epoch_bl.setdefault(epoch, self.bl)
        rep = EpochReport(epoch)
        rng = self.rng.fork(f"distribute/{epoch}")
        for hh in self.households:
            counts = Counter()
            for i, token in enumerate(hh.tokens):
                if members is not None and i not in members:
                    continue
                resp = self.scheme.showup(token, epoch, bl, rng.fork(f"{hh.hid}/{i}"))
                outcome = self.station_accept(epoch, resp, bl)
                if outcome == "blocked" and hh.rev not in bl:
                    outcome = "refused"  # stale epoch or busy token, not the blocklist
                counts[outcome] += 1
            rep.per_household[hh.hid] = counts
            for k, v in counts.items():
                setattr(rep, k, getattr(rep, k) + v)
        self.reports[epoch] = rep
        return rep

    def station_accept(self, epoch: int, resp, bl: Blocklist) -> str:
        if resp.aborted:
            return "blocked"
        if not self.scheme.verify_ent(self.public, epoch, resp, bl):
            return "rejected"
        res = self.log.insert(epoch, self.scheme.record(resp, bl))
        return "accepted" if res is InsertResult.ACCEPTED else "duplicate"

    def audit(self, epoch: int) -> tuple[int, Verdict]:
        ent_sum, proof = self.scheme.gen_audit(self.log, epoch)
        bl = self.epoch_bl.get(epoch, self.bl)
        return ent_sum, self.scheme.auditor_verify(self.public, epoch, ent_sum, proof, bl)

    def expected_sum(self, epoch: int) -> int:
        """Oracle: entitlements of distinct households not blocked in ``epoch``."""
        bl = self.epoch_bl[epoch]
        return sum(h.ent for h in self.households if h.rev not in bl)

    def run(self) -> list[dict]:
        """All configured epochs.

        Revocations decided during an epoch take effect from the next one,
        since each epoch's blocklist is frozen when the epoch opens.
        """
        self.register()
        self.clone_all()
        rows = []
        for epoch in range(1, self.config.epochs + 1):
            rep = self.distribute(epoch)
            ent_sum, verdict = self.audit(epoch)
            if self.config.revocations_per_epoch:
                self.revoke_random(epoch, self.config.revocations_per_epoch)
            rows.append({
                **rep.row(),
                "ent_sum": ent_sum,
                "expected": self.expected_sum(epoch),
                "audit": "ok" if verdict else f"fail:{verdict.reason}",
            })
        return rows
