"""A household copies its phone credential onto a second phone.

Both phones produce valid proofs, but they carry the same per-epoch tag,
so the station pays out once and flags the copy.
"""

from aidist.core import TransactionLog
from aidist.crypto.rng import Rng
from aidist.schemes import get_scheme

phone = get_scheme("phone")
auth = phone.setup(Rng("demo-phone"))
original = phone.new_token(auth.public)
phone.register(auth, original, 6, Rng("register"))
copy = phone.clone(original)

bl = phone.empty_blocklist()
log = TransactionLog()
for name, token in (("original", original), ("copy", copy)):
    resp = phone.showup(token, 1, bl, Rng(name))
    ok = bool(phone.verify_ent(auth.public, 1, resp, bl))
    result = log.insert(1, phone.record(resp, bl))
    print(f"{name:>8}: proof {ok}, tag {phone.tag(resp).hex()[:16]}..., log {result.name}")

ent_sum, proof = phone.gen_audit(log, 1)
print(f"audit pays out {ent_sum} units:", bool(phone.auditor_verify(auth.public, 1, ent_sum, proof, bl)))

# next epoch the tag is fresh, so the two showups cannot be linked across epochs
r2 = phone.showup(original, 2, bl, Rng("epoch-2"))
print("epoch 2 tag differs:", phone.tag(r2) != phone.tag(resp))
