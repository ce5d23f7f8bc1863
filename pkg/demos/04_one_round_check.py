# One-round adaptivity as a checkable property.
#
# Two runs with the same seed but perturbed oracle answers must issue the
# same round-1 queries. A tester that picks a round-1 set from an answer
# fails the check.

from cond_equiv import (
    CondOracle,
    IndexSet,
    QueryLog,
    TesterConfig,
    equiv_tester,
    gen_disjoint_halves,
    round_barrier,
    verify_one_round,
)
from cond_equiv.harness import run_verify

p, q = gen_disjoint_halves(32)
cfg = TesterConfig.desk()

a = equiv_tester(p, q, cfg, seed=3, salt=0)
b = equiv_tester(p, q, cfg, seed=3, salt=1)
print("answers differ:     ", a.log.fingerprint() != b.log.fingerprint())
print("round 1 identical:  ", verify_one_round(a.log, b.log))
print("round 2 identical:  ", a.log.set_multiset(2) == b.log.set_multiset(2))


def adaptive(salt):
    log = QueryLog()
    o = CondOracle(p, "P", log, root_seed=3, salt=salt)
    first = o.sample(IndexSet.full(32), 8, o.stream("first"))
    o.sample(IndexSet(first.tolist()), 10, o.stream("follow"))  # depends on answers
    round_barrier(log)
    return log


print("adaptive control passes:", verify_one_round(adaptive(0), adaptive(1)))

print()
for check in run_verify(32, cfg, seed=3):
    print(check.line())
