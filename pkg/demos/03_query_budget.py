# Query budgets: desk constants versus the constants as stated for the theorem.
#
# The paper profile sets gamma = eps^4 / 1e15, which makes m astronomically
# large. Python ints keep the budget exact anyway.

from cond_equiv import TesterConfig, budget_ratio, query_budget

desk = TesterConfig.desk()
for n in (8, 32, 64):
    print(f"desk n={n:3d}: {query_budget(n, desk):,}")

print()
for eps in (0.5, 0.1):
    for k in (4, 10, 20):
        n = 2**k
        cfg = TesterConfig.paper(eps, n)
        print(f"paper eps={eps} n=2^{k:<2d} m={cfg.m:.3e} budget={query_budget(n, cfg):.3e} "
              f"budget/(log n loglog n log(1/eps)/eps^9)={budget_ratio(n, cfg):.3e}")

# The ratio is flat in n: the budget has the right asymptotic shape, with a
# constant dominated by L^2 * b.
