"""Batch execution of experiments and the results table."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from aidist.games.adversaries import ALL_ADVERSARIES, kit
from aidist.games.experiments import Adversary, run_trial
from aidist.schemes import get_scheme

COLUMNS = ("experiment", "config", "adversary", "trials", "wins", "seed_range")


@dataclass
class ResultRow:
    experiment: str
    config: str
    adversary: str
    trials: int = 0
    wins: int = 0
    seed_lo: int = 0
    seed_hi: int = -1
    guards: Counter = field(default_factory=Counter)

    @property
    def rate(self) -> float:
        return self.wins / self.trials if self.trials else 0.0

    @property
    def seed_range(self) -> str:
        return f"{self.seed_lo}-{self.seed_hi}"

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in COLUMNS}
        d["rate"] = self.rate
        d["guards"] = dict(self.guards)
        return d


def run_adversary(system: str, adv_cls: type[Adversary], trials: int, seed0: int = 0) -> ResultRow:
    scheme = get_scheme(system)
    row = ResultRow(adv_cls.experiment, system, adv_cls.name, seed_lo=seed0, seed_hi=seed0 + trials - 1)
    for seed in range(seed0, seed0 + trials):
        out = run_trial(scheme, adv_cls(), seed)
        row.trials += 1
        row.wins += int(out.win)
        if out.guard:
            row.guards[out.guard] += 1
    return row


def run_kit(experiment: str, system: str, trials: int, seed0: int = 0) -> list[ResultRow]:
    """``trials`` seeded runs spread round-robin over the experiment's attack kit."""
    scheme = get_scheme(system)
    attacks = kit(experiment, system)
    if not attacks:
        raise ValueError(f"no attacks for {experiment} on {system}")
    # every row reports the kit's whole seed window; row i takes seeds i, i+len(kit), ...
    rows = {a.name: ResultRow(experiment, system, a.name, seed_lo=seed0, seed_hi=seed0 + trials - 1) for a in attacks}
    for i, seed in enumerate(range(seed0, seed0 + trials)):
        cls = attacks[i % len(attacks)]
        row = rows[cls.name]
        out = run_trial(scheme, cls(), seed)
        row.trials += 1
        row.wins += int(out.win)
        if out.guard:
            row.guards[out.guard] += 1
    return list(rows.values())


def resolve(name: str) -> type[Adversary]:
    try:
        return ALL_ADVERSARIES[name]
    except KeyError:
        raise ValueError(f"unknown adversary {name!r}") from None


def table(rows: list[ResultRow]) -> list[dict]:
    return [r.as_dict() for r in rows]
