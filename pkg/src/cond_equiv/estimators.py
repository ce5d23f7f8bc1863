"""Conditional-probability and tail-probability estimators, plus their exact counterparts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dist import Distribution, IndexSet, _as_set, mass
from .oracle import CondOracle, RandomStream


@dataclass(frozen=True)
class TailParams:
    """Tail event "j wins at most floor((1/2 + beta) * b) of b pairwise queries"."""

    beta: float
    b: int

    def __post_init__(self):
        if not 0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 1/2), got {self.beta}")
        if int(self.b) != self.b or self.b < 1:
            raise ValueError(f"b must be a positive integer, got {self.b}")
        if self.threshold >= self.b:
            raise ValueError("tail threshold must be below b")

    @property
    def threshold(self) -> int:
        # exact in the decimal value of beta, so (0.5 + 0.3) * 5 gives 4
        return math.floor((Fraction(1, 2) + Fraction(repr(float(self.beta)))) * int(self.b))


def _binom_terms(b: int, p: float) -> np.ndarray:
    """Unnormalised Bin(b, p) pmf over 0..b, scaled so the mode has weight 1.

    Terms are built by multiplying consecutive pmf ratios outward from the
    mode, so every ratio is <= 1 and nothing overflows; far tails underflow
    to 0 harmlessly.
    """
    mode = min(b, math.floor((b + 1) * p))
    odds = p / (1.0 - p)
    terms = np.empty(b + 1)
    terms[mode] = 1.0
    if mode < b:
        x = np.arange(mode, b, dtype=np.float64)
        terms[mode + 1:] = np.cumprod((b - x) / (x + 1.0) * odds)
    if mode > 0:
        x = np.arange(mode, 0, -1, dtype=np.float64)
        terms[mode - 1::-1] = np.cumprod(x / (b - x + 1.0) / odds)
    return terms


def binom_cdf(b: int, p: float, k: int) -> float:
    """Pr[Bin(b, p) <= k].

    Absolute error stays around 1e-13 for b up to 1e5: the pmf is built by
    ratio recurrence from the mode and summed with ``math.fsum``.
    """
    if b < 1 or int(b) != b:
        raise ValueError("b must be a positive integer")
    if not 0 <= k <= b:
        raise ValueError(f"k={k} outside [0, {b}]")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if k == b or p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    terms = _binom_terms(int(b), float(p))
    head = math.fsum(terms[: k + 1])
    return min(1.0, head / (head + math.fsum(terms[k + 1:])))


def tp_exact(d: Distribution, i: int, s, tp: TailParams) -> float:
    """Exact probability that EstTail's indicator fires for one first-stage draw.

    Sums, over j in s weighted by COND_d(s), the probability that j wins at
    most ``tp.threshold`` of ``tp.b`` queries on {j, i}. Degenerate cases
    follow the oracle: uniform weights when d(s) = 0, a fair coin when
    d(i) = d(j) = 0, and a certain win for j when j == i (the set is {i}).
    """
    s = _as_set(s)
    if not len(s):
        raise ValueError("conditioning set must be nonempty")
    d._check_index(i)
    s.check_domain(d.n)
    pj = d.probs[s.positions]
    total = mass(d, s)
    weights = np.full(pj.size, 1.0 / pj.size) if total == 0 else pj / total
    pi = d[i]
    out = []
    for j, w, pjj in zip(s.members, weights, pj):
        if w == 0:
            continue
        if j == i:
            win = 1.0
        elif pjj + pi == 0:
            win = 0.5
        else:
            win = pjj / (pjj + pi)
        out.append(w * binom_cdf(tp.b, win, tp.threshold))
    return min(1.0, math.fsum(out))


def est_prob(oracle: CondOracle, i: int, s, m: int, stream: RandomStream | None = None) -> float:
    """Fraction of ``m`` draws from COND(i ∪ s) that return i."""
    if m < 1:
        raise ValueError("m must be positive")
    union = _as_set(s).with_element(i)
    stream = oracle.fresh_stream("est_prob") if stream is None else stream
    answers = oracle.sample(union, m, stream)
    return float(np.count_nonzero(answers == i)) / m


def tail_first_stage(oracle: CondOracle, s, m: int, stream: RandomStream) -> np.ndarray:
    """The ``m`` draws j_1..j_m from COND(s). These never depend on i."""
    return oracle.sample(s, m, stream)


def tail_second_stage(oracle: CondOracle, i: int, js: np.ndarray, tp: TailParams,
                      stream: RandomStream) -> float:
    """Mean over k of 1[j_k wins at most threshold of b queries on {j_k, i}]."""
    wins = oracle.sample_pairs(i, js, tp.b, stream)
    z = np.count_nonzero(wins, axis=1) <= tp.threshold
    return float(np.count_nonzero(z)) / len(js)


def est_tail(oracle: CondOracle, i: int, s, tp: TailParams, m: int,
             stream: RandomStream | None = None) -> float:
    """EstTail: m * (b + 1) queries estimating ``tp_exact(d, i, s, tp)``."""
    if m < 1:
        raise ValueError("m must be positive")
    s = _as_set(s)
    if stream is None:
        first, second = oracle.fresh_stream("tail1"), oracle.fresh_stream("tail2")
    else:
        first = second = stream
    js = tail_first_stage(oracle, s, m, first)
    return tail_second_stage(oracle, i, js, tp, second)
