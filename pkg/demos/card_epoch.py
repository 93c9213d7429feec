"""One smart-card household, start to finish.

The authority sets up keys, a registration station loads a card, the card
collects aid in epoch 1, and an auditor checks the station's books.
"""

from aidist.core import TransactionLog
from aidist.crypto.rng import Rng
from aidist.schemes import get_scheme

card = get_scheme("card")
auth = card.setup(Rng("demo-card"))

token = card.new_token(auth.public)
v = card.register(auth, token, 4, Rng("register"))
print(f"registered a card entitled to 4 units; revocation value {v.hex()[:16]}...")

bl = card.empty_blocklist()
resp = card.showup(token, 1, bl, Rng("showup"))
print("station accepts:", bool(card.verify_ent(auth.public, 1, resp, bl)))

log = TransactionLog()
print("log insert:", log.insert(1, card.record(resp, bl)).name)

# a second visit in the same epoch is refused by the card itself
again = card.showup(token, 1, bl, Rng("again"))
print("second visit aborted:", again.aborted)

ent_sum, proof = card.gen_audit(log, 1)
verdict = bool(card.auditor_verify(auth.public, 1, ent_sum, proof, bl))
print(f"audit: {len(proof)} record(s), ent_sum={ent_sum}, verdict={verdict}")
