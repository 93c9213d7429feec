"""Three epochs with revocation, run through the simulator.

Households revoked during an epoch are blocked from the next one on, and
the audited total always equals what the remaining households are owed.
"""

import sys

from aidist.sim.simulation import ScenarioConfig, Simulation

system = sys.argv[1] if len(sys.argv) > 1 else "card"
sim = Simulation(ScenarioConfig(system=system, households=40, epochs=3, seed=9))
sim.register()
revoked: set[int] = set()
for epoch in (1, 2, 3):
    rep = sim.distribute(epoch)
    ent_sum, verdict = sim.audit(epoch)
    owed = sum(h.ent for h in sim.households if h.hid not in revoked)
    print(f"epoch {epoch}: {rep.row()} audit={verdict.reason or 'ok'} ent_sum={ent_sum} owed={owed}")
    picked = sim.revoke_random(epoch, 4)
    revoked |= set(picked)
    print(f"  revoked households {sorted(picked)}")
