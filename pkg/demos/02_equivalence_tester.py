# The one-round tester on three benchmark pairs at the desk profile.
#
# Each run issues exactly query_budget(n, cfg) queries: round 1 draws the
# sample list E and the first-stage tail draws, round 2 everything else.

import time

from cond_equiv import (
    TesterConfig,
    equiv_tester,
    gen_disjoint_halves,
    gen_heavy_point,
    gen_uniform,
    query_budget,
    total_variation,
)

n = 32
cfg = TesterConfig.desk()
print(cfg)
print("queries per run:", query_budget(n, cfg))

pairs = {
    "identical uniform": (gen_uniform(n), gen_uniform(n)),
    "heavy point 0.9 vs 0.1": (gen_heavy_point(n, 0.9), gen_heavy_point(n, 0.1)),
    "disjoint halves": gen_disjoint_halves(n),
}

for name, (p, q) in pairs.items():
    start = time.perf_counter()
    v = equiv_tester(p, q, cfg, seed=1)
    took = time.perf_counter() - start
    print(f"\n{name}: tv={total_variation(p, q):.3f} -> {v.decision} ({took:.2f}s)")
    if v.witness:
        w = v.witness
        print(f"  witness: tuple {w.tuple_index}, i={w.i}, t={w.t}, branch={w.branch}")
        print(f"  ep=({w.ep1:.3f}, {w.ep2:.3f}) et=({w.et1:.3f}, {w.et2:.3f})")
    print("  queries by round:", v.queries_used)

# Sequential mode stops at the first witness
p, q = gen_disjoint_halves(n)
v = equiv_tester(p, q, cfg, seed=1, sequential=True)
print(f"\nsequential on disjoint halves: {v.decision} after {v.log.total} queries")
