"""Game state and the registration and distribution oracles.

Bookkeeping follows the oracle definitions line by line.  Two readings are
made explicit here:

* ``eps_last[id]`` moves forward only when the token actually ran
  ShowupT.  An aborted run (blocked token) leaves it alone, so the IND
  epoch-window guard sees the token's true state.
* ``ent_sum[eps]`` counts each household once per epoch, so clones of one
  honest household do not raise the honest allowance.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any

from aidist.core import Blocklist, InsertResult, Record, TransactionLog
from aidist.crypto.rng import Rng
from aidist.schemes import Authority, Scheme

ALL_ORACLES = frozenset(
    {"honest_reg", "mal_user_reg", "prepare_reg", "finish_reg", "showup", "showup_two", "verify_ent", "revoke"}
)


class OracleUnavailable(Exception):
    """The experiment's configuration does not grant this oracle."""


@dataclass
class GameState:
    scheme: Scheme
    rng: Rng
    auth: Authority | None = None
    public: Any = None
    H: set = field(default_factory=set)
    M: set = field(default_factory=set)
    H_pre: set = field(default_factory=set)
    Ent: dict = field(default_factory=dict)
    Rev: dict = field(default_factory=dict)
    tokens: dict = field(default_factory=dict)  # id -> list of member tokens
    eps_last: dict = field(default_factory=lambda: defaultdict(int))
    ent_sum: dict = field(default_factory=lambda: defaultdict(int))
    showed: dict = field(default_factory=lambda: defaultdict(set))
    log: dict = field(default_factory=lambda: defaultdict(list))
    log0: TransactionLog = field(default_factory=TransactionLog)
    log1: TransactionLog = field(default_factory=TransactionLog)
    station_log: TransactionLog = field(default_factory=TransactionLog)
    station_bl: dict = field(default_factory=dict)
    station_base_bl: Blocklist | None = None
    revoked: set = field(default_factory=set)
    transcript: list = field(default_factory=list)

    def ent_max(self, epoch: int) -> int:
        return self.ent_sum[epoch] + sum(self.Ent[i] for i in self.M)

    def note(self, label: str, *parts) -> None:
        h = hashlib.sha256(label.encode())
        for p in parts:
            h.update(repr(p).encode() if not isinstance(p, bytes) else p)
        self.transcript.append(h.hexdigest()[:16])

    def digest(self) -> str:
        return hashlib.sha256("".join(self.transcript).encode()).hexdigest()


def _response_bytes(resp) -> bytes:
    try:
        return resp.to_bytes()
    except Exception:
        return repr(resp).encode()


class Oracles:
    """Oracle interface handed to an adversary; only granted oracles work."""

    def __init__(self, gs: GameState, available: frozenset[str]) -> None:
        self._gs = gs
        self._available = frozenset(available)
        self.scheme = gs.scheme

    @property
    def public(self):
        return self._gs.public

    @property
    def station_blocklist(self) -> Blocklist:
        """The honest station's published blocklist."""
        return self._gs.station_base_bl or self._gs.scheme.empty_blocklist()

    def empty_blocklist(self) -> Blocklist:
        return self._gs.scheme.empty_blocklist()

    def _grant(self, name: str) -> None:
        if name not in self._available:
            raise OracleUnavailable(name)

    # -- registration -------------------------------------------------------

    def honest_reg(self, id, ent: int, members: int = 1):
        """Register an honest household; ``members`` cards are whispered from the first."""
        self._grant("honest_reg")
        gs = self._gs
        if id in gs.H or id in gs.M or id in gs.H_pre:
            return None
        rng = gs.rng.fork(f"honest_reg/{id}")
        token = gs.scheme.new_token(gs.public)
        request = gs.scheme.prepare(token, rng)
        response, _ = gs.scheme.rs_process(gs.auth, ent, request, rng)
        ent_h, rev = gs.scheme.finish(token, response, rng)
        tokens = [token] + [gs.scheme.clone(token) for _ in range(members - 1)]
        gs.tokens[id] = tokens
        gs.H.add(id)
        gs.Ent[id], gs.Rev[id] = ent_h, rev
        gs.note("honest_reg", id, ent_h)
        return None

    def mal_user_reg(self, id, ent: int, request):
        self._grant("mal_user_reg")
        gs = self._gs
        if id in gs.H or id in gs.M or id in gs.H_pre:
            return None
        try:
            response, rev = gs.scheme.rs_process(gs.auth, ent, request, gs.rng.fork(f"mal_reg/{id}"))
        except Exception:
            return None
        gs.M.add(id)
        gs.Ent[id], gs.Rev[id] = ent, rev
        gs.note("mal_user_reg", id, ent, _response_bytes(response))
        return response

    def prepare_reg(self, id):
        self._grant("prepare_reg")
        gs = self._gs
        if id in gs.H or id in gs.M:
            return None
        token = gs.scheme.new_token(gs.public)
        request = gs.scheme.prepare(token, gs.rng.fork(f"prepare/{id}"))
        gs.tokens[id] = [token]
        gs.H_pre.add(id)
        gs.note("prepare_reg", id, _response_bytes(request) if request is not None else b"")
        return request

    def finish_reg(self, id, response):
        self._grant("finish_reg")
        gs = self._gs
        if id not in gs.H_pre or id in gs.H:
            return None
        try:
            ent_h, rev = gs.scheme.finish(gs.tokens[id][0], response, gs.rng.fork(f"finish/{id}"))
        except Exception:
            return None
        gs.H.add(id)
        gs.Ent[id], gs.Rev[id] = ent_h, rev
        gs.note("finish_reg", id, ent_h)
        return ent_h

    # -- distribution -------------------------------------------------------

    def showup(self, id, epoch: int, bl: Blocklist, member: int = 0):
        self._grant("showup")
        return oracle_showup(self._gs, id, epoch, bl, member)

    def showup_two(self, id0, id1, epoch: int, bl: Blocklist):
        self._grant("showup_two")
        gs = self._gs
        if id0 not in gs.H or id1 not in gs.H:
            return None
        for idx, (id_, log) in enumerate(((id0, gs.log0), (id1, gs.log1))):
            resp = _run_showup(gs, id_, epoch, bl, 0, f"showup_two{idx}")
            if resp.aborted:
                continue
            if gs.scheme.verify_ent(gs.public, epoch, resp, bl):
                log.insert(epoch, gs.scheme.record(resp, bl))
        return None

    def verify_ent(self, epoch: int, response) -> bool:
        """Honest station.  Its blocklist for an epoch is fixed on first use."""
        self._grant("verify_ent")
        gs = self._gs
        bl = gs.station_bl.setdefault(epoch, gs.station_base_bl or gs.scheme.empty_blocklist())
        try:
            ok = not response.aborted and bool(gs.scheme.verify_ent(gs.public, epoch, response, bl))
            if ok:
                rec = Record(response.ent, gs.scheme.tag(response), response.proof, bl.digest)
                ok = gs.station_log.insert(epoch, rec) is InsertResult.ACCEPTED
        except (AttributeError, TypeError, ValueError):
            ok = False
        gs.note("verify_ent", epoch, ok)
        return ok

    def revoke(self, id) -> bool:
        """Put a registered household on the station blocklist (revocation game only)."""
        self._grant("revoke")
        gs = self._gs
        if id not in gs.Rev:
            return False
        gs.revoked.add(id)
        gs.note("revoke", id)
        return True


def _run_showup(gs: GameState, id, epoch: int, bl: Blocklist, member: int, label: str):
    token = gs.tokens[id][member]
    resp = gs.scheme.showup(token, epoch, bl, gs.rng.fork(f"{label}/{id}/{member}/{epoch}/{len(gs.transcript)}"))
    gs.note(label, id, epoch, _response_bytes(resp))
    return resp


def oracle_showup(gs: GameState, id, epoch: int, bl: Blocklist, member: int = 0):
    """The showup oracle body; experiments call it directly for the challenge run."""
    if id not in gs.H or member >= len(gs.tokens[id]):
        return None
    resp = _run_showup(gs, id, epoch, bl, member, "showup")
    gs.log[epoch].append((bl, resp))
    if not resp.aborted:
        gs.eps_last[id] = max(gs.eps_last[id], epoch)
        if id not in gs.showed[epoch]:
            gs.showed[epoch].add(id)
            gs.ent_sum[epoch] += resp.ent
    return resp
