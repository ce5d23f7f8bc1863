import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cond_equiv import (
    Distribution,
    IndexSet,
    cond_prob_exact,
    gen_disjoint_halves,
    gen_heavy_point,
    gen_perturbed_pair,
    gen_uniform,
    mass,
    total_variation,
)


def test_constructor_normalizes_small_drift():
    d = Distribution([0.5, 0.5 + 5e-10])
    assert abs(d.probs.sum() - 1) < 1e-15


@pytest.mark.parametrize("bad", [[0.5, 0.6], [1.1, -0.1], [float("nan"), 1.0], []])
def test_constructor_rejects(bad):
    with pytest.raises(ValueError):
        Distribution(bad)


def test_probs_read_only():
    d = gen_uniform(4)
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


def test_indexset_rejects_zero_and_dedups():
    assert IndexSet([3, 1, 3]).members == (1, 3)
    with pytest.raises(ValueError):
        IndexSet([0, 1])
    with pytest.raises(ValueError):
        IndexSet([5]).check_domain(4)


def test_text_roundtrip(tmp_path):
    d = Distribution([0.4, 0.3, 0.2, 0.1])
    path = tmp_path / "d.txt"
    d.save(path)
    assert Distribution.load(path).equals(d, atol=0)
    assert gen_uniform(4).to_text() == "[0.25, 0.25, 0.25, 0.25]"


@pytest.mark.parametrize("text", ["{\"a\": 1}", "[0.5, \"x\"]", "[0.2, 0.2]", "not json"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        Distribution.from_text(text)


def test_total_variation_examples():
    assert total_variation(gen_uniform(4), gen_uniform(4)) == 0
    assert total_variation(Distribution([1, 0]), Distribution([0, 1])) == 1
    # 0.5 * (0.15 + 0.05 + 0.05 + 0.15)
    assert total_variation(Distribution([0.4, 0.3, 0.2, 0.1]), gen_uniform(4)) == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(ValueError):
        total_variation(gen_uniform(3), gen_uniform(4))


def test_mass_examples():
    d = gen_uniform(4)
    assert mass(d, IndexSet([1, 2])) == 0.5
    assert mass(d, IndexSet()) == 0
    assert mass(d, IndexSet.full(4)) == 1


def test_cond_prob_exact_examples():
    assert cond_prob_exact(gen_uniform(4), 1, IndexSet([2, 3])) == pytest.approx(1 / 3, abs=1e-15)
    assert cond_prob_exact(Distribution([0, 0.5, 0.5]), 1, IndexSet([2])) == 0
    assert cond_prob_exact(Distribution([1, 0, 0]), 1, IndexSet([2, 3])) == 1
    # zero mass on i ∪ s: uniform convention
    assert cond_prob_exact(Distribution([0, 0, 1]), 1, IndexSet([2])) == 0.5
    with pytest.raises(IndexError):
        cond_prob_exact(gen_uniform(4), 5, IndexSet([1]))


def test_generators():
    p, q = gen_disjoint_halves(4)
    assert list(p.probs) == [0.5, 0.5, 0, 0] and list(q.probs) == [0, 0, 0.5, 0.5]
    assert total_variation(p, q) == 1
    h = gen_heavy_point(4, 0.9)
    assert h.probs == pytest.approx([0.9, 0.1 / 3, 0.1 / 3, 0.1 / 3], abs=1e-15)
    for seed in range(5):
        assert total_variation(*gen_perturbed_pair(4, 0.4, seed)) == pytest.approx(0.2, abs=1e-12)
    for bad in [lambda: gen_heavy_point(4, 1.0), lambda: gen_disjoint_halves(5),
                lambda: gen_perturbed_pair(4, 0.0), lambda: gen_uniform(0)]:
        with pytest.raises(ValueError):
            bad()


dists = st.integers(2, 12).flatmap(
    lambda n: st.lists(st.floats(0, 1), min_size=n, max_size=n).filter(lambda xs: sum(xs) > 1e-3)
).map(lambda xs: np.asarray(xs) / np.sum(xs))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_tv_metric_properties(seed, n):
    rng = np.random.default_rng(seed)
    p, q, r = (Distribution(rng.dirichlet(np.ones(n))) for _ in range(3))
    assert total_variation(p, q) == pytest.approx(total_variation(q, p), abs=1e-15)
    assert total_variation(p, r) <= total_variation(p, q) + total_variation(q, r) + 1e-12
    assert 0 <= total_variation(p, q) <= 1
    assert total_variation(p, p) == 0


@settings(max_examples=60, deadline=None)
@given(dists, st.data())
def test_cond_prob_partition(probs, data):
    d = Distribution(probs)
    i = data.draw(st.integers(1, d.n))
    s = IndexSet(data.draw(st.sets(st.integers(1, d.n))))
    union = s.with_element(i)
    denom = mass(d, union)
    if denom > 0:
        rest = sum(d[j] / denom for j in s if j != i)
        assert cond_prob_exact(d, i, s) + rest == pytest.approx(1, abs=1e-12)
