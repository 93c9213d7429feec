"""Distribution-time benchmark over growing blocklists.

Four costs per blocklist size: sending ``(eps, BL)`` to the token, ShowupT,
sending the response back, and VerifyEntDS.  Transfers are modelled as
size / throughput; the two computations are measured wall-clock (median of
``reps`` runs).
"""

from __future__ import annotations

import statistics
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from aidist.crypto.encoding import epoch_to_bytes
from aidist.sim.simulation import ScenarioConfig, Simulation
from aidist.sim.workspace import padded_blocklist

DEFAULT_SIZES = (0, 128, 256, 512, 1024)
DEFAULT_THROUGHPUT = 1_000_000  # bytes per second


@dataclass
class BenchRow:
    bl_size: int
    to_token_s: float
    showup_s: float
    to_station_s: float
    verify_s: float
    bl_bytes: int
    response_bytes: int

    @property
    def total_s(self) -> float:
        return self.to_token_s + self.showup_s + self.to_station_s + self.verify_s

    def as_dict(self) -> dict:
        return {**asdict(self), "total_s": self.total_s}


@dataclass
class BenchResult:
    system: str
    throughput: float
    rows: list[BenchRow] = field(default_factory=list)
    slope: float = 0.0
    intercept: float = 0.0
    r2: float = 0.0

    def fit(self) -> None:
        """Least-squares line through ShowupT + VerifyEntDS against |BL|."""
        x = np.array([r.bl_size for r in self.rows], dtype=float)
        y = np.array([r.showup_s + r.verify_s for r in self.rows])
        if len(x) < 2 or np.ptp(x) == 0:
            self.slope, self.intercept, self.r2 = 0.0, float(y.mean()) if len(y) else 0.0, 1.0
            return
        self.slope, self.intercept = (float(v) for v in np.polyfit(x, y, 1))
        resid = y - (self.slope * x + self.intercept)
        ss_tot = float(((y - y.mean()) ** 2).sum())
        self.r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot else 1.0

    @property
    def monotone(self) -> bool:
        ys = [r.showup_s + r.verify_s for r in self.rows]
        return all(a <= b for a, b in zip(ys, ys[1:]))


def run_bench(
    system: str = "phone",
    bl_sizes=DEFAULT_SIZES,
    throughput: float = DEFAULT_THROUGHPUT,
    reps: int = 3,
    seed: int = 0,
) -> BenchResult:
    if throughput <= 0:
        raise ValueError("throughput must be positive")
    sim = Simulation(ScenarioConfig(system=system, households=1, ent_min=5, ent_max=5, seed=seed))
    sim.register()
    scheme, token = sim.scheme, sim.households[0].tokens[0]
    out = BenchResult(system, throughput)
    # warm-up: caches, lazy imports, allocator
    scheme.verify_ent(sim.public, 1, scheme.showup(token, 1, sim.bl, sim.rng.fork("warm")), sim.bl)
    epoch = 1
    for size in sorted(bl_sizes):
        bl = padded_blocklist(sim, size)
        if scheme.name == "phone":
            bl.pairs  # decode the points once per list, as a station would
        show, verify = [], []
        for i in range(reps):
            epoch += 1
            rng = sim.rng.fork(f"bench/{size}/{i}")
            t0 = time.perf_counter()
            resp = scheme.showup(token, epoch, bl, rng)
            t1 = time.perf_counter()
            ok = scheme.verify_ent(sim.public, epoch, resp, bl)
            t2 = time.perf_counter()
            if not ok:
                raise RuntimeError(f"honest response rejected at |BL|={size}: {ok.reason}")
            show.append(t1 - t0)
            verify.append(t2 - t1)
        down = len(epoch_to_bytes(epoch)) + len(bl.to_bytes())
        up = len(resp.to_bytes())
        out.rows.append(
            BenchRow(size, down / throughput, statistics.median(show), up / throughput, statistics.median(verify), down, up)
        )
    out.fit()
    return out
