"""One-round adaptive equivalence tester for the COND model.

Round 1 draws the sample list E from P and, for every tuple (i, S) and
both targets, the first-stage tail draws from S. None of these sets depend
on an answer. Round 2 issues the conditional-probability queries on i ∪ S
and the pairwise queries on {j, i}, which do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import NamedTuple

from .dist import Distribution, IndexSet, cond_prob_exact
from .estimators import TailParams, tail_first_stage, tail_second_stage, tp_exact
from .oracle import CondOracle, QueryLog, build_sets, round_barrier

PAPER_L = 10**15
PAPER_BETA = 0.05

ACCEPT = "Accept"
REJECT = "Reject"


def _frac(x) -> Fraction:
    # repr keeps 0.05 as 1/20 rather than its binary expansion
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


def _loglog(n: int) -> float:
    return max(1.0, math.log(math.log(n))) if n > 2 else 1.0


@dataclass(frozen=True)
class TesterConfig:
    """Every constant the tester uses.

    Build one with :meth:`paper` or :meth:`desk`; :meth:`override` returns
    a copy with ``profile="custom"``.
    """

    eps: float
    gamma: float
    m: int
    beta: float
    b: int
    e_size: int
    L: int | None = None
    profile: str = "custom"

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 < self.gamma < 0.5:
            raise ValueError(f"gamma must lie in (0, 1/2) so that 2*gamma < 1, got {self.gamma}")
        for name in ("m", "b", "e_size"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        self.tail  # validates beta against b

    @property
    def tail(self) -> TailParams:
        return TailParams(self.beta, self.b)

    @classmethod
    def paper(cls, eps: float, n: int, L: int = PAPER_L, beta: float = PAPER_BETA) -> "TesterConfig":
        """Constants exactly as the algorithm states them (m depends on n)."""
        gamma = _frac(eps) ** 4 / L
        m = math.ceil(100 * _frac(_loglog(n)) * _frac(math.log(1 / eps)) / gamma**2)
        b = math.ceil(100 / _frac(beta) ** 2)
        e_size = math.ceil(20 / _frac(eps))
        return cls(eps=eps, gamma=float(gamma), m=m, beta=beta, b=b, e_size=e_size, L=L, profile="paper")

    @classmethod
    def desk(cls) -> "TesterConfig":
        """Scaled-down constants that keep every structural property."""
        return cls(eps=0.5, gamma=0.1, m=2000, beta=0.25, b=160, e_size=10, profile="desk")

    @classmethod
    def from_profile(cls, profile: str, eps: float | None = None, n: int | None = None) -> "TesterConfig":
        if profile == "desk":
            cfg = cls.desk()
            return cfg if eps is None or eps == cfg.eps else cfg.override(eps=eps)
        if profile == "paper":
            if eps is None or n is None:
                raise ValueError("paper profile needs eps and n")
            return cls.paper(eps, n)
        raise ValueError(f"unknown profile {profile!r}")

    def override(self, **changes) -> "TesterConfig":
        if not changes:
            return self
        return replace(self, profile="custom", **changes)

    def as_dict(self) -> dict:
        return {
            "profile": self.profile, "eps": self.eps, "L": self.L, "gamma": self.gamma,
            "m": self.m, "beta": self.beta, "b": self.b, "e_size": self.e_size,
        }


class Witness(NamedTuple):
    tuple_index: int
    i: int
    t: float
    branch: str
    ep1: float
    ep2: float
    et1: float | None
    et2: float | None


class TupleEstimates(NamedTuple):
    tuple_index: int
    i: int
    set_index: int
    ep1: float
    ep2: float
    et1: float
    et2: float


@dataclass
class Verdict:
    decision: str
    witness: Witness | None
    queries_used: dict
    log: QueryLog = field(repr=False)
    sets: list = field(repr=False, default_factory=list)
    samples: list = field(repr=False, default_factory=list)
    estimates: list = field(repr=False, default_factory=list)

    @property
    def rejected(self) -> bool:
        return self.decision == REJECT


def num_sets(n: int) -> int:
    return (math.ceil(math.log2(n)) if n > 1 else 0) + 1


def query_budget(n: int, cfg: TesterConfig) -> int:
    """Exact number of oracle calls of a one-round run, as a python int."""
    tuples = cfg.e_size * num_sets(n)
    m, b = int(cfg.m), int(cfg.b)
    return cfg.e_size + tuples * (2 * m + 2 * m * (b + 1))


def complexity_scale(n: int, eps: float) -> float:
    """log n * log log n * log(1/eps) / eps^9, the asymptotic budget shape."""
    return math.log2(n) * _loglog(n) * math.log(1 / eps) / eps**9


def budget_ratio(n: int, cfg: TesterConfig) -> float:
    return float(Fraction(query_budget(n, cfg)) / _frac(complexity_scale(n, cfg.eps)))


class DistinguisherResult(NamedTuple):
    found: bool
    branch: str | None
    prob_gap: float
    tail_gap: float


def distinguisher_check(p: Distribution, q: Distribution, i: int, s, cfg: TesterConfig) -> DistinguisherResult:
    """Whether (i, s) separates p and q by more than 4*gamma, computed exactly."""
    s = s if isinstance(s, IndexSet) else IndexSet(s)
    prob_gap = abs(cond_prob_exact(p, i, s) - cond_prob_exact(q, i, s))
    if len(s):
        tail_gap = abs(tp_exact(p, i, s, cfg.tail) - tp_exact(q, i, s, cfg.tail))
    else:
        tail_gap = 0.0
    limit = 4 * cfg.gamma
    branch = "prob" if prob_gap > limit else "tail" if tail_gap > limit else None
    return DistinguisherResult(branch is not None, branch, prob_gap, tail_gap)


def equiv_tester(p: Distribution, q: Distribution, cfg: TesterConfig, seed: int, *,
                 sequential: bool = False, salt: int = 0) -> Verdict:
    """Decide whether p == q or p, q are eps-far, using COND queries only.

    In the default one-round mode every query is issued (round 1, barrier,
    round 2) and the decision is a post-hoc scan in tuple order: E index
    ascending, then t descending; within a tuple the probability branch is
    checked before the tail branch. ``sequential=True`` follows the literal
    early-exit control flow instead. ``salt`` perturbs answer streams only.
    """
    if p.n != q.n:
        raise ValueError(f"domain sizes differ: {p.n} vs {q.n}")
    n = p.n
    log = QueryLog()
    oracles = {
        "P": CondOracle(p, "P", log, seed, salt),
        "Q": CondOracle(q, "Q", log, seed, salt),
    }
    tp = cfg.tail
    m = int(cfg.m)
    two_gamma = 2 * cfg.gamma

    sets = build_sets(n, seed, nonempty=True)
    E = oracles["P"].sample(IndexSet.full(n), cfg.e_size, oracles["P"].stream("E")).tolist()
    tuples = [(e, k) for e in range(len(E)) for k in range(len(sets))]

    def first_stage(idx, target):
        o = oracles[target]
        return tail_first_stage(o, sets[tuples[idx][1]], m, o.stream("tail1", idx))

    def estimate_prob(idx, target):
        e, k = tuples[idx]
        o = oracles[target]
        answers = o.sample(sets[k].with_element(E[e]), m, o.stream("prob", idx))
        return float((answers == E[e]).sum()) / m

    def estimate_tail(idx, target, js):
        o = oracles[target]
        return tail_second_stage(o, E[tuples[idx][0]], js, tp, o.stream("tail2", idx))

    def witness(idx, branch, ep1, ep2, et1=None, et2=None):
        e, k = tuples[idx]
        return Witness(idx, E[e], 2.0**-k, branch, ep1, ep2, et1, et2)

    estimates = []
    found = None
    if not sequential:
        first = {(idx, t): first_stage(idx, t) for idx in range(len(tuples)) for t in ("P", "Q")}
        round_barrier(log)
        for idx, (e, k) in enumerate(tuples):
            ep1, ep2 = estimate_prob(idx, "P"), estimate_prob(idx, "Q")
            et1 = estimate_tail(idx, "P", first[idx, "P"])
            et2 = estimate_tail(idx, "Q", first[idx, "Q"])
            estimates.append(TupleEstimates(idx, E[e], k, ep1, ep2, et1, et2))
            if found is None:
                if abs(ep1 - ep2) > two_gamma:
                    found = witness(idx, "prob", ep1, ep2, et1, et2)
                elif abs(et1 - et2) > two_gamma:
                    found = witness(idx, "tail", ep1, ep2, et1, et2)
    else:
        round_barrier(log)
        for idx, (e, k) in enumerate(tuples):
            ep1, ep2 = estimate_prob(idx, "P"), estimate_prob(idx, "Q")
            if abs(ep1 - ep2) > two_gamma:
                found = witness(idx, "prob", ep1, ep2)
                break
            et1 = estimate_tail(idx, "P", first_stage(idx, "P"))
            et2 = estimate_tail(idx, "Q", first_stage(idx, "Q"))
            estimates.append(TupleEstimates(idx, E[e], k, ep1, ep2, et1, et2))
            if abs(et1 - et2) > two_gamma:
                found = witness(idx, "tail", ep1, ep2, et1, et2)
                break

    return Verdict(
        decision=REJECT if found else ACCEPT,
        witness=found,
        queries_used={1: log.round_total(1), 2: log.round_total(2)},
        log=log,
        sets=sets,
        samples=E,
        estimates=estimates,
    )
