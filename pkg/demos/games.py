"""Security experiments with scripted adversaries.

The attack kits should never win.  The privacy baselines should sit near
a coin flip.
"""

from aidist.games import adversaries as A
from aidist.games.runner import run_adversary, run_kit

for system in ("card", "phone"):
    for exp in ("aud", "sec", "rev"):
        rows = run_kit(exp, system, 4 * len(A.kit(exp, system)), seed0=1)
        wins = sum(r.wins for r in rows)
        print(f"{system:>5} {exp}: {len(rows)} attacks, {wins} wins")
    for adv in (A.IndBlindGuess, A.EntByteCompare):
        row = run_adversary(system, adv, 60, seed0=1)
        print(f"{system:>5} {adv.name}: success rate {row.rate:.2f}")
