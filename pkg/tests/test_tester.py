import math

import numpy as np
import pytest

from cond_equiv import (
    ACCEPT,
    REJECT,
    Distribution,
    IndexSet,
    TesterConfig,
    budget_ratio,
    cond_prob_exact,
    distinguisher_check,
    equiv_tester,
    gen_disjoint_halves,
    gen_heavy_point,
    gen_perturbed_pair,
    gen_uniform,
    query_budget,
    tp_exact,
    verify_one_round,
)

DESK = TesterConfig.desk()
SMALL = DESK.override(m=40, b=12, e_size=3)


def test_desk_profile_constants():
    assert (DESK.eps, DESK.gamma, DESK.m, DESK.beta, DESK.b, DESK.e_size) == (0.5, 0.1, 2000, 0.25, 160, 10)
    assert DESK.tail.threshold == 120
    assert DESK.override(m=5).profile == "custom"


@pytest.mark.parametrize("eps", [0.1, 0.5])
@pytest.mark.parametrize("n", [16, 1024, 2**20])
def test_paper_profile_constants(eps, n):
    cfg = TesterConfig.paper(eps, n)
    assert cfg.L == 10**15 and cfg.beta == 0.05
    assert cfg.b == 40_000
    assert cfg.e_size == round(20 / eps)
    assert cfg.gamma == pytest.approx(eps**4 / 1e15, rel=1e-15)
    # m = 100 * ln ln n * ln(1/eps) / gamma^2, far beyond 64 bits
    expect = 100 * math.log(math.log(n)) * math.log(1 / eps) / (eps**4 / 1e15) ** 2
    assert cfg.m == pytest.approx(expect, rel=1e-12)
    assert cfg.m > 2**64


@pytest.mark.parametrize("bad", [dict(gamma=0.5), dict(gamma=0), dict(beta=0.5), dict(m=0),
                                 dict(b=0), dict(e_size=0), dict(eps=1.0)])
def test_config_invariants(bad):
    with pytest.raises(ValueError):
        DESK.override(**bad)


def test_query_budget_values():
    assert query_budget(32, DESK) == 38_880_010
    unit = DESK.override(e_size=1, m=1, b=1)
    assert query_budget(1, unit) == 7


@pytest.mark.parametrize("n", [1, 2, 5, 16, 33])
def test_budget_matches_log(n):
    p = gen_uniform(n)
    q = Distribution(np.random.default_rng(n).dirichlet(np.ones(n)))
    for seed in range(3):
        v = equiv_tester(p, q, SMALL, seed)
        assert v.log.total == query_budget(n, SMALL)
        assert v.log.counts == v.log.recount()
        assert v.queries_used[1] == SMALL.e_size + SMALL.e_size * len(v.sets) * 2 * SMALL.m


def test_paper_budget_is_constant_shaped():
    """Budget over the log n loglog n log(1/eps)/eps^9 scale stays flat in n."""
    for eps in (0.1, 0.5):
        ratios = [budget_ratio(2**k, TesterConfig.paper(eps, 2**k)) for k in range(4, 21)]
        assert max(ratios) / min(ratios) < 1.25


@pytest.mark.xfail(strict=True, reason="paper constants (L=1e15) put the ratio near 1.7e38, not <= 1e7")
def test_paper_budget_constant_below_1e7():
    for eps in (0.1, 0.5):
        for k in range(4, 21):
            assert budget_ratio(2**k, TesterConfig.paper(eps, 2**k)) <= 1e7


def test_domain_mismatch():
    with pytest.raises(ValueError):
        equiv_tester(gen_uniform(4), gen_uniform(6), SMALL, 0)


def test_verdict_invariants():
    pairs = [(gen_uniform(16), gen_uniform(16)), gen_disjoint_halves(16),
             (gen_heavy_point(16, 0.9), gen_heavy_point(16, 0.1)), gen_perturbed_pair(16, 0.6, 1)]
    for p, q in pairs:
        for seed in range(4):
            v = equiv_tester(p, q, SMALL, seed)
            assert v.decision in (ACCEPT, REJECT)
            if v.decision == REJECT:
                w = v.witness
                gap = abs(w.ep1 - w.ep2) if w.branch == "prob" else abs(w.et1 - w.et2)
                assert gap > 2 * SMALL.gamma
                # first trigger in scan order
                for est in v.estimates[: w.tuple_index]:
                    assert abs(est.ep1 - est.ep2) <= 0.2 and abs(est.et1 - est.et2) <= 0.2
            else:
                assert v.witness is None


def test_witness_fields():
    v = equiv_tester(*gen_disjoint_halves(32), DESK, 4)
    w = v.witness
    assert v.decision == REJECT and w.branch == "tail"
    assert w.i == v.samples[0] and w.t == 1.0 and w.tuple_index == 0


def test_determinism():
    p, q = gen_perturbed_pair(16, 0.8, 3)
    a = equiv_tester(p, q, SMALL, 9)
    b = equiv_tester(p, q, SMALL, 9)
    assert a.decision == b.decision and a.witness == b.witness
    assert a.log.export_text() == b.log.export_text()


def test_one_round_under_perturbation():
    p, q = gen_perturbed_pair(32, 0.8, 0)
    for seed in range(5):
        a = equiv_tester(p, q, SMALL, seed, salt=0)
        b = equiv_tester(p, q, SMALL, seed, salt=17)
        assert a.log.fingerprint() != b.log.fingerprint()
        assert verify_one_round(a.log, b.log)
        # round 2 does depend on the answers
        assert a.log.set_multiset(2) != b.log.set_multiset(2)


def test_sequential_mode():
    p, q = gen_disjoint_halves(32)
    v = equiv_tester(p, q, DESK, 0, sequential=True)
    assert v.decision == REJECT and v.witness.branch == "tail"
    assert v.log.total < query_budget(32, DESK)
    same = equiv_tester(gen_uniform(8), gen_uniform(8), SMALL.override(m=400), 0, sequential=True)
    assert same.decision == ACCEPT
    assert same.log.total == query_budget(8, SMALL.override(m=400))


def test_distinguisher_check_examples():
    u = gen_uniform(8)
    for i in range(1, 9):
        for s in (IndexSet.full(8), IndexSet([1, 2, 3]), IndexSet([5])):
            assert not distinguisher_check(u, u, i, s, DESK).found

    p, q = gen_disjoint_halves(32)
    r = distinguisher_check(p, q, 3, IndexSet.full(32), DESK)
    assert r.found and r.branch == "tail"
    # P: 15 of 16 draws are fair coins far below the 120/160 threshold; Q: all j win outright
    assert r.tail_gap == pytest.approx(15 / 16, abs=1e-9)

    hp, hq = gen_heavy_point(32, 0.9), gen_heavy_point(32, 0.1)
    r = distinguisher_check(hp, hq, 1, IndexSet.full(32), DESK)
    assert r.found and r.branch == "prob" and r.prob_gap == pytest.approx(0.8, abs=1e-12)


@pytest.mark.slow
def test_distinguisher_soundness_on_halves():
    """A run that misses a distinguisher must show an estimator off by > gamma."""
    p, q = gen_disjoint_halves(32)
    tp = DESK.tail
    failures = 0
    for seed in range(200):
        v = equiv_tester(p, q, DESK, seed)
        if v.decision == REJECT:
            continue
        failures += 1
        deviated = False
        for est in v.estimates:
            s = v.sets[est.set_index]
            if not distinguisher_check(p, q, est.i, s, DESK).found:
                continue
            exact = [cond_prob_exact(p, est.i, s), cond_prob_exact(q, est.i, s),
                     tp_exact(p, est.i, s, tp), tp_exact(q, est.i, s, tp)]
            got = [est.ep1, est.ep2, est.et1, est.et2]
            deviated |= any(abs(g - e) > DESK.gamma for g, e in zip(got, exact))
        assert deviated, f"seed {seed} accepted with no estimator deviation"
    print(f"acceptances on the far pair: {failures}/200")
