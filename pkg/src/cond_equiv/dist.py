"""Finite discrete distributions over the domain {1, ..., n}.

Indices are 1-based everywhere in the public API. Internally the masses
live in a read-only float64 numpy array with 0-based positions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

NORMALIZE_TOL = 1e-9

_MASK64 = (1 << 64) - 1
_HASH_SEED = 0x243F6A8885A308D3


def _mix64(x):
    """splitmix64 finalizer; works on python ints and uint64 arrays."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = x ^ (x >> np.uint64(30))
        x = x * np.uint64(0xBF58476D1CE4E5B9)
        x = x ^ (x >> np.uint64(27))
        x = x * np.uint64(0x94D049BB133111EB)
        x = x ^ (x >> np.uint64(31))
    return x


def hash_members(members: Sequence[int]) -> int:
    """Stable 64-bit hash of a sorted sequence of domain indices."""
    h = _mix64(np.uint64(_HASH_SEED ^ len(members)))
    for x in members:
        h = _mix64(h ^ np.uint64(x))
    return int(h)


def hash_pairs(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorised ``hash_members`` for sets {lo, hi} (size 1 where lo == hi).

    ``lo <= hi`` elementwise is assumed.
    """
    lo = np.asarray(lo, dtype=np.uint64)
    hi = np.asarray(hi, dtype=np.uint64)
    single = lo == hi
    h1 = _mix64(_mix64(np.uint64(_HASH_SEED ^ 1)) ^ lo)
    h2 = _mix64(_mix64(_mix64(np.uint64(_HASH_SEED ^ 2)) ^ lo) ^ hi)
    return np.where(single, h1, h2)


@dataclass(frozen=True)
class IndexSet:
    """An immutable subset of the domain, stored as a sorted tuple."""

    members: tuple[int, ...] = ()

    def __init__(self, members: Iterable[int] = ()):
        ms = sorted({int(x) for x in members})
        if ms and ms[0] < 1:
            raise ValueError(f"domain indices are 1-based, got {ms[0]}")
        object.__setattr__(self, "members", tuple(ms))

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls(range(1, n + 1))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i) -> bool:
        return int(i) in self._lookup

    def __or__(self, other) -> "IndexSet":
        return IndexSet(set(self.members) | set(other))

    def with_element(self, i: int) -> "IndexSet":
        """The set i ∪ S."""
        if i in self:
            return self
        return IndexSet(self.members + (int(i),))

    @cached_property
    def _lookup(self) -> frozenset:
        return frozenset(self.members)

    @cached_property
    def positions(self) -> np.ndarray:
        """0-based positions of the members, as an int64 array."""
        arr = np.asarray(self.members, dtype=np.int64) - 1
        arr.setflags(write=False)
        return arr

    @cached_property
    def digest(self) -> int:
        return hash_members(self.members)

    def check_domain(self, n: int) -> None:
        if self.members and self.members[-1] > n:
            raise ValueError(f"index {self.members[-1]} outside domain [1, {n}]")

    def __repr__(self) -> str:
        if len(self) > 8:
            return f"IndexSet(<{len(self)} members>)"
        return f"IndexSet({set(self.members) or '{}'})"


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability mass function over {1, ..., n}.

    Inputs whose total deviates from 1 by at most ``NORMALIZE_TOL`` are
    renormalised; larger deviations, negative or non-finite masses raise
    ``ValueError``.
    """

    probs: np.ndarray = field(repr=False)

    def __init__(self, probs: Sequence[float]):
        p = np.array(probs, dtype=np.float64).reshape(-1)
        if p.size == 0:
            raise ValueError("distribution needs at least one element")
        if not np.all(np.isfinite(p)):
            raise ValueError("masses must be finite")
        if np.any(p < 0):
            raise ValueError("masses must be nonnegative")
        total = math.fsum(p)
        if abs(total - 1.0) > NORMALIZE_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> float:
        """Mass of the 1-based element ``i``."""
        self._check_index(i)
        return float(self.probs[i - 1])

    def _check_index(self, i) -> None:
        if not 1 <= int(i) <= self.n:
            raise IndexError(f"index {i} outside domain [1, {self.n}]")

    def __repr__(self) -> str:
        head = ", ".join(f"{x:.4g}" for x in self.probs[:6])
        more = ", ..." if self.n > 6 else ""
        return f"Distribution(n={self.n}, [{head}{more}])"

    def equals(self, other: "Distribution", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(np.all(np.abs(self.probs - other.probs) <= atol))

    # text format: a single JSON-style array of decimal masses
    def to_text(self) -> str:
        return "[" + ", ".join(repr(float(x)) for x in self.probs) + "]"

    @classmethod
    def from_text(cls, text: str) -> "Distribution":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"not a mass array: {exc}") from None
        if not isinstance(data, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in data
        ):
            raise ValueError("distribution file must hold a single array of numbers")
        return cls(data)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text() + "\n")

    @classmethod
    def load(cls, path) -> "Distribution":
        return cls.from_text(Path(path).read_text())


def _as_set(s) -> IndexSet:
    return s if isinstance(s, IndexSet) else IndexSet(s)


def total_variation(p: Distribution, q: Distribution) -> float:
    if p.n != q.n:
        raise ValueError(f"domain sizes differ: {p.n} vs {q.n}")
    return 0.5 * math.fsum(np.abs(p.probs - q.probs))


def mass(d: Distribution, s) -> float:
    s = _as_set(s)
    s.check_domain(d.n)
    if not len(s):
        return 0.0
    return math.fsum(d.probs[s.positions])


def cond_prob_exact(d: Distribution, i: int, s) -> float:
    """d(i) / d(i ∪ s), with the oracle's uniform convention on zero mass."""
    d._check_index(i)
    union = _as_set(s).with_element(i)
    denom = mass(d, union)
    if denom == 0.0:
        return 1.0 / len(union)
    return d[i] / denom


# -- benchmark generators ---------------------------------------------------

def gen_uniform(n: int) -> Distribution:
    if n < 1:
        raise ValueError("n must be positive")
    return Distribution(np.full(n, 1.0 / n))


def gen_heavy_point(n: int, p1: float) -> Distribution:
    """Mass ``p1`` on element 1, the rest spread evenly."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < p1 < 1:
        raise ValueError("p1 must lie in (0, 1)")
    p = np.full(n, (1.0 - p1) / (n - 1))
    p[0] = p1
    return Distribution(p)


def gen_disjoint_halves(n: int) -> tuple[Distribution, Distribution]:
    """Uniform on the first half vs uniform on the second half."""
    if n < 2 or n % 2:
        raise ValueError("n must be a positive even number")
    half = n // 2
    p = np.zeros(n)
    q = np.zeros(n)
    p[:half] = 1.0 / half
    q[half:] = 1.0 / half
    return Distribution(p), Distribution(q)


def gen_perturbed_pair(n: int, eps: float, seed: int = 0) -> tuple[Distribution, Distribution]:
    """Uniform vs a pairwise ±eps/n perturbation of uniform.

    Adjacent elements (1,2), (3,4), ... are shifted in opposite directions,
    the sign of each pair drawn from ``seed``. Total variation is eps/2.
    """
    if n < 2 or n % 2:
        raise ValueError("n must be a positive even number")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=n // 2)
    delta = np.repeat(signs, 2) * np.tile([1.0, -1.0], n // 2) * (eps / n)
    base = np.full(n, 1.0 / n)
    return Distribution(base), Distribution(base + delta)
