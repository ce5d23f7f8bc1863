from fractions import Fraction
from math import comb
from types import SimpleNamespace

import pytest

from cond_equiv import CondOracle, IndexSet, QueryLog, round_barrier


def exact_binom_cdf(b, p, k):
    """Pr[Bin(b, p) <= k] by direct pmf summation in rationals."""
    p = Fraction(p)
    return sum(comb(b, x) * p**x * (1 - p) ** (b - x) for x in range(k + 1))


def exact_tp(probs, i, s, beta, b):
    """Tail probability by explicit enumeration in rationals.

    Walks every j in s and every win count of j against i; the set {j, i}
    collapses to {i} when j == i, so j then wins all b queries.
    """
    probs = [Fraction(x) for x in probs]
    threshold = int((Fraction(1, 2) + Fraction(str(beta))) * b)
    total = sum(probs[j - 1] for j in s)
    out = Fraction(0)
    for j in s:
        w = Fraction(1, len(s)) if total == 0 else probs[j - 1] / total
        if j == i:
            win = Fraction(1)
        elif probs[j - 1] + probs[i - 1] == 0:
            win = Fraction(1, 2)
        else:
            win = probs[j - 1] / (probs[j - 1] + probs[i - 1])
        out += w * exact_binom_cdf(b, win, threshold)
    return out


def adaptive_dummy_tester(p, q, cfg, seed, salt=0):
    """Negative control: a round-1 set is built from a round-1 answer."""
    log = QueryLog()
    oracle = CondOracle(p, "P", log, seed, salt)
    full = IndexSet.full(p.n)
    first = oracle.sample(full, 8, oracle.stream("first"))
    # depends on answers just received, which a one-round tester may not do
    follow = IndexSet(first.tolist())
    oracle.sample(follow, 10, oracle.stream("follow"))
    round_barrier(log)
    oracle.sample(full, 10, oracle.stream("second"))
    return SimpleNamespace(decision="Accept", witness=None, log=log)


@pytest.fixture
def adaptive_tester():
    return adaptive_dummy_tester


def mp_binom_cdf(b, p, k, dps=40):
    """Pr[Bin(b, p) <= k] summed in mpmath over the mean +- 40 sd window."""
    import mpmath

    with mpmath.workdps(dps):
        P = mpmath.mpf(p)
        sd = (b * p * (1 - p)) ** 0.5
        lo = max(0, int(b * p - 40 * sd) - 1)
        hi = min(b, int(b * p + 40 * sd) + 1)
        term = mpmath.binomial(b, lo) * P**lo * (1 - P) ** (b - lo)
        ratio = P / (1 - P)
        head = mpmath.mpf(0)
        for x in range(lo, min(k, hi) + 1):
            head += term
            term *= (b - x) * ratio / (x + 1)
        return float(head) if k < hi else 1.0
