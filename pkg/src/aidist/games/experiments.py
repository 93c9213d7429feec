"""Executable security and privacy experiments.

Each ``run_exp_*`` builds a fresh game from a seed, hands the adversary an
:class:`Oracles` object restricted to the experiment's oracle set, and
evaluates the win condition.  Every experiment returns an :class:`Outcome`;
``outcome.win`` is the experiment's output bit and ``outcome.guard`` names
the trivial-win exclusion that fired, if any (the adversary then loses).

Readings of ambiguous lines:

* IND epoch window: the challenge is excluded exactly when one challenge
  token would run ShowupT at ``eps*`` and the other would refuse as stale,
  that is when ``min(eps_last) < eps* <= max(eps_last)``.
* IND revocation guard: evaluated on behaviour.  It fires when exactly one
  challenge token would be blocked under ``BL*``, which for phones also
  covers pairs with a base other than ``g1``.
* Card attackers never get the malicious-user registration oracle (the card
  is a trusted device); they keep the honest showup oracle in SEC.
"""

from __future__ import annotations

from dataclasses import dataclass

from aidist.core import AuditError, Blocklist, bl_revoke
from aidist.crypto.encoding import FormatError
from aidist.crypto.rng import Rng
from aidist.games.oracles import GameState, Oracles, oracle_showup
from aidist.schemes import Authority, Scheme

IND_ORACLES = frozenset({"prepare_reg", "finish_reg", "showup"})
ENT_ORACLES = frozenset({"honest_reg", "showup_two"})


def aud_oracles(scheme: Scheme) -> frozenset[str]:
    base = {"honest_reg", "showup"}
    if scheme.name == "phone":
        base.add("mal_user_reg")
    return frozenset(base)


def sec_oracles(scheme: Scheme) -> frozenset[str]:
    return aud_oracles(scheme) | {"verify_ent"}


@dataclass
class Outcome:
    win: bool
    guard: str | None = None
    transcript: str = ""
    detail: str = ""

    def __bool__(self) -> bool:
        return self.win


class Adversary:
    """Plugin interface.  Subclasses override the callbacks they need."""

    name = "adversary"
    experiment = ""
    systems: tuple[str, ...] = ("card", "phone")

    def keygen(self, scheme: Scheme, rng: Rng):
        """IND only: act as the registration station and publish a key."""
        self.auth: Authority = scheme.setup(rng)
        return self.auth.public

    def register(self, o: Oracles, rng: Rng) -> None:
        """Revocation game only: the phase before the station blocklist is fixed."""

    def play(self, o: Oracles, rng: Rng):
        raise NotImplementedError

    def guess(self, view, rng: Rng) -> int:
        return 0


def _game(scheme: Scheme, seed: int, label: str) -> tuple[GameState, Rng]:
    root = Rng(f"{label}/{seed}")
    return GameState(scheme, root.fork("game")), root.fork("adversary")


def _setup_rs(gs: GameState) -> None:
    gs.auth = gs.scheme.setup(gs.rng.fork("setup-rs"))
    gs.public = gs.auth.public


def run_exp_ind(scheme: Scheme, adv: Adversary, b: int, seed: int) -> Outcome:
    gs, arng = _game(scheme, seed, "ind")
    gs.public = adv.keygen(scheme, arng.fork("keygen"))
    o = Oracles(gs, IND_ORACLES)
    id0, id1, eps, bl = adv.play(o, arng)
    if id0 not in gs.H or id1 not in gs.H:
        return Outcome(False, "not-honest", gs.digest())
    if gs.Ent[id0] != gs.Ent[id1]:
        return Outcome(False, "entitlement", gs.digest())
    if scheme.is_blocked(gs.tokens[id0][0], bl) != scheme.is_blocked(gs.tokens[id1][0], bl):
        return Outcome(False, "revocation", gs.digest())
    l0, l1 = gs.eps_last[id0], gs.eps_last[id1]
    if min(l0, l1) < eps <= max(l0, l1):
        return Outcome(False, "epoch-window", gs.digest())
    resp = oracle_showup(gs, (id0, id1)[b], eps, bl)
    guess = adv.guess(resp, arng.fork("guess"))
    return Outcome(guess == b, None, gs.digest())


def run_exp_aud(scheme: Scheme, adv: Adversary, seed: int) -> Outcome:
    gs, arng = _game(scheme, seed, "aud")
    _setup_rs(gs)
    o = Oracles(gs, aud_oracles(scheme))
    eps, ent_sum, proof, bl = adv.play(o, arng)
    try:
        if isinstance(proof, (bytes, bytearray)):
            proof = scheme.audit_from_bytes(bytes(proof))
        valid = bool(scheme.auditor_verify(gs.public, eps, ent_sum, proof, bl))
        verdict = "valid" if valid else "invalid"
    except (FormatError, AuditError, TypeError, ValueError, AttributeError) as exc:
        valid, verdict = False, f"malformed:{type(exc).__name__}"
    ent_max = gs.ent_max(eps)
    return Outcome(valid and ent_sum > ent_max, None, gs.digest(), f"{verdict} claimed={ent_sum} max={ent_max}")


def run_exp_ent(scheme: Scheme, adv: Adversary, b: int, seed: int) -> Outcome:
    gs, arng = _game(scheme, seed, "ent")
    _setup_rs(gs)
    o = Oracles(gs, ENT_ORACLES)
    eps = adv.play(o, arng)
    try:
        audits = [scheme.gen_audit(log, eps) for log in (gs.log0, gs.log1)]
    except AuditError:
        return Outcome(False, "mixed-blocklists", gs.digest())
    (s0, p0), (s1, p1) = audits
    if s0 != s1 or len(scheme.audit_to_bytes(p0)) != len(scheme.audit_to_bytes(p1)):
        return Outcome(False, "sum-or-length", gs.digest())
    guess = adv.guess(audits[b][1], arng.fork("guess"))
    return Outcome(guess == b, None, gs.digest())


def run_exp_sec(scheme: Scheme, adv: Adversary, seed: int) -> Outcome:
    gs, arng = _game(scheme, seed, "sec")
    _setup_rs(gs)
    o = Oracles(gs, sec_oracles(scheme))
    eps = adv.play(o, arng)
    seen = sum(r.ent for r in gs.station_log.records(eps))
    ent_max = gs.ent_max(eps)
    return Outcome(seen > ent_max, None, gs.digest(), f"seen={seen} max={ent_max}")


def run_exp_rev(scheme: Scheme, adv: Adversary, seed: int) -> Outcome:
    """Revocation soundness against an honest station.

    Phase one registers households; the adversary may revoke honest ones.
    Every malicious household is revoked too, then the station blocklist is
    fixed.  The adversary wins if the station accepts more than the
    entitlements of non-revoked honest households that showed up.
    """
    gs, arng = _game(scheme, seed, "rev")
    _setup_rs(gs)
    adv.register(Oracles(gs, aud_oracles(scheme) | {"revoke"}), arng.fork("register"))
    bl: Blocklist = scheme.empty_blocklist()
    for id in sorted(gs.revoked | gs.M, key=repr):
        bl = bl_revoke(bl, gs.Rev[id])
    gs.station_base_bl = bl
    gs.revoked |= gs.M
    eps = adv.play(Oracles(gs, frozenset({"showup", "verify_ent"})), arng)
    seen = sum(r.ent for r in gs.station_log.records(eps))
    allowed = sum(gs.Ent[i] for i in gs.showed[eps] if i not in gs.revoked)
    return Outcome(seen > allowed, None, gs.digest(), f"seen={seen} allowed={allowed}")


EXPERIMENTS = {
    "ind": run_exp_ind,
    "aud": run_exp_aud,
    "ent": run_exp_ent,
    "sec": run_exp_sec,
    "rev": run_exp_rev,
}
TWO_WORLD = frozenset({"ind", "ent"})


def run_trial(scheme: Scheme, adv: Adversary, seed: int) -> Outcome:
    """One seeded run; two-world experiments draw ``b`` from the seed."""
    run = EXPERIMENTS[adv.experiment]
    if adv.experiment in TWO_WORLD:
        b = Rng(f"bit/{seed}").bit()
        return run(scheme, adv, b, seed)
    return run(scheme, adv, seed)
