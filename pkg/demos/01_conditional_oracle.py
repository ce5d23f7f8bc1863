# Conditional sampling and the exact quantities it estimates.
#
# A COND oracle takes a subset S of the domain and returns an element of S
# drawn in proportion to its mass. Run with:  python demos/01_conditional_oracle.py

import numpy as np

from cond_equiv import (
    CondOracle,
    Distribution,
    IndexSet,
    TailParams,
    cond_prob_exact,
    est_prob,
    est_tail,
    tp_exact,
)

d = Distribution([0.4, 0.3, 0.2, 0.1])
oracle = CondOracle(d, root_seed=2024)

# Conditioning on {2, 3}: element 2 should come back 0.3 / 0.5 = 60% of the time
answers = oracle.sample(IndexSet([2, 3]), 10_000, oracle.stream("demo"))
print("freq of 2 given {2,3}:", np.mean(answers == 2))

# A set carrying no mass falls back to uniform
zero = CondOracle(Distribution([0.5, 0.5, 0, 0]))
answers = zero.sample(IndexSet([3, 4]), 10_000, zero.stream("demo"))
print("freq of 3 given {3,4} (zero mass):", np.mean(answers == 3))

# The probability estimator: d(i) / d(i u S)
s = IndexSet([2, 3])
print("exact d(1)/d({1,2,3}):", cond_prob_exact(d, 1, s))
print("estimate, m=2000     :", est_prob(oracle, 1, s, 2000))

# The tail estimator: draw j from S, then play b pairwise queries of j vs i.
# The indicator fires when j wins at most floor((1/2 + beta) b) of them.
tp = TailParams(beta=0.25, b=4)
print("exact tail prob :", tp_exact(d, 1, s, tp))
print("estimate, m=2000:", est_tail(oracle, 1, s, tp, 2000))

print("queries issued so far:", oracle.log.total)
