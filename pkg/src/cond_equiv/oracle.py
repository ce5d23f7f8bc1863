"""Simulated conditional-sampling (COND) oracle with round-tagged accounting.

A ``CondOracle`` wraps one distribution. Several oracles (one per target,
usually "P" and "Q") share a ``QueryLog``; the log owns the round counter,
so ``round_barrier`` applies to every oracle writing into it.

Queries are logged in batches rather than one object per call. A desk-scale
tester run issues ~4e7 queries, and per-record python objects would
dominate both time and memory.
"""

from __future__ import annotations

import hashlib
import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .dist import Distribution, IndexSet, hash_pairs, _as_set


def stream_id(purpose: str, *parts) -> int:
    """Stable 64-bit id for a logical sampling stream."""
    key = "\x1f".join([purpose, *map(str, parts)]).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


class RandomStream:
    """Independent random stream keyed by (root_seed, stream_id).

    ``counter`` tracks how many uniform variates have been consumed.
    ``salt`` perturbs the stream without changing its identity; it is how
    answer streams are deliberately altered for the one-round check.
    """

    def __init__(self, root_seed: int, stream_id: int, salt: int = 0):
        self.root_seed = int(root_seed)
        self.stream_id = int(stream_id)
        self.salt = int(salt)
        self.counter = 0
        entropy = [self.root_seed & ((1 << 64) - 1), self.salt & ((1 << 64) - 1)]
        ss = np.random.SeedSequence(entropy, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def random(self, size=None):
        self.counter += 1 if size is None else int(np.prod(size))
        return self._gen.random(size)

    def __repr__(self):
        return f"RandomStream(root_seed={self.root_seed}, stream_id={self.stream_id:#x}, counter={self.counter})"


class AliasTable:
    """Vose alias table: O(k) setup, O(1) per draw.

    ``weights`` need not be normalised. All-zero weights give the uniform
    table, which is the oracle's convention for zero-mass sets.
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        k = w.size
        if k == 0:
            raise ValueError("alias table needs at least one outcome")
        total = math.fsum(w)
        scaled = np.full(k, 1.0) if total == 0 else w * (k / total)
        prob = np.ones(k)
        alias = np.arange(k)
        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            l = large.pop()
            prob[s] = scaled[s]
            alias[s] = l
            scaled[l] = (scaled[l] + scaled[s]) - 1.0
            (small if scaled[l] < 1.0 else large).append(l)
        # leftovers are 1 up to rounding
        for i in small + large:
            prob[i] = 1.0
        self.prob = prob
        self.alias = alias
        self.k = k

    def draw(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in [0, 1) to outcome positions 0..k-1."""
        x = u * self.k
        col = x.astype(np.int64)
        np.minimum(col, self.k - 1, out=col)
        frac = x - col
        return np.where(frac < self.prob[col], col, self.alias[col])


class QueryRecord(NamedTuple):
    round: int
    target: str
    set: IndexSet
    answer: int


@dataclass
class _SetBatch:
    """``answers.size`` queries on one fixed set."""

    round: int
    target: str
    set: IndexSet
    answers: np.ndarray

    def __len__(self):
        return int(self.answers.size)


@dataclass
class _PairBatch:
    """``b`` queries on each set {js[k], i}; ``wins[k, l]`` means answer js[k]."""

    round: int
    target: str
    i: int
    js: np.ndarray
    wins: np.ndarray

    def __len__(self):
        return int(self.wins.size)


class QueryLog:
    """Append-only log of oracle calls with per-round, per-target counts."""

    def __init__(self):
        self.batches: list = []
        self.counts: Counter = Counter()
        self.round = 1
        self._barrier_crossed = False

    def _append(self, batch) -> None:
        if batch.round < self.round:
            raise RuntimeError("cannot log a round-1 query after the barrier")
        self.batches.append(batch)
        self.counts[(batch.round, batch.target)] += len(batch)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def round_total(self, rnd: int) -> int:
        return sum(c for (r, _), c in self.counts.items() if r == rnd)

    def recount(self) -> Counter:
        c: Counter = Counter()
        for batch in self.batches:
            c[(batch.round, batch.target)] += len(batch)
        return c

    def records(self) -> Iterator[QueryRecord]:
        """Expand batches into individual records (slow for big logs)."""
        for batch in self.batches:
            if isinstance(batch, _SetBatch):
                for a in batch.answers:
                    yield QueryRecord(batch.round, batch.target, batch.set, int(a))
            else:
                for j, row in zip(batch.js, batch.wins):
                    pair = IndexSet((int(j), batch.i))
                    for w in row:
                        yield QueryRecord(batch.round, batch.target, pair, int(j) if w else batch.i)

    def set_multiset(self, rnd: int) -> Counter:
        """Multiset of (target, set_size, set_hash) over queries in round ``rnd``."""
        c: Counter = Counter()
        for batch in self.batches:
            if batch.round != rnd:
                continue
            if isinstance(batch, _SetBatch):
                c[(batch.target, len(batch.set), batch.set.digest)] += len(batch)
            else:
                sizes, hashes = _pair_keys(batch)
                # the hash already encodes the set size
                uniq, first, cnt = np.unique(hashes, return_index=True, return_counts=True)
                for h, at, k in zip(uniq.tolist(), first.tolist(), cnt.tolist()):
                    c[(batch.target, int(sizes[at]), h)] += k * batch.wins.shape[1]
        return c

    def _lines(self) -> Iterator[str]:
        for batch in self.batches:
            head = f"{batch.round},{batch.target},"
            if isinstance(batch, _SetBatch):
                prefix = f"{head}{len(batch.set)},{batch.set.digest},"
                yield "".join(f"{prefix}{a}\n" for a in batch.answers.tolist())
            else:
                sizes, hashes = _pair_keys(batch)
                for j, size, h, row in zip(batch.js.tolist(), sizes.tolist(), hashes.tolist(), batch.wins):
                    prefix = f"{head}{size},{h},"
                    ans = np.where(row, j, batch.i).tolist()
                    yield "".join(f"{prefix}{a}\n" for a in ans)

    def export(self, fp) -> None:
        """Write one ``round,target,set_size,set_hash,answer`` line per query."""
        for chunk in self._lines():
            fp.write(chunk)

    def export_text(self) -> str:
        buf = io.StringIO()
        self.export(buf)
        return buf.getvalue()

    def fingerprint(self) -> str:
        """sha256 over the raw batch contents; fast enough for full-size runs."""
        h = hashlib.sha256()
        for batch in self.batches:
            h.update(f"{batch.round},{batch.target},".encode())
            if isinstance(batch, _SetBatch):
                h.update(f"S{len(batch.set)},{batch.set.digest},".encode())
                h.update(batch.answers.astype("<i8").tobytes())
            else:
                h.update(f"T{batch.i},".encode())
                h.update(batch.js.astype("<i8").tobytes())
                h.update(np.packbits(batch.wins).tobytes())
        return h.hexdigest()

    def digest(self) -> str:
        """sha256 of the export, computed without materialising it."""
        h = hashlib.sha256()
        for chunk in self._lines():
            h.update(chunk.encode())
        return h.hexdigest()


def _pair_keys(batch: _PairBatch):
    js = batch.js.astype(np.int64)
    lo = np.minimum(js, batch.i)
    hi = np.maximum(js, batch.i)
    sizes = np.where(lo == hi, 1, 2)
    return sizes, hash_pairs(lo, hi)


def round_barrier(log: QueryLog) -> None:
    """Close round 1: every later query on ``log`` is tagged round 2."""
    if log._barrier_crossed:
        raise RuntimeError("round barrier already crossed")
    log._barrier_crossed = True
    log.round = 2


def verify_one_round(run_a: QueryLog, run_b: QueryLog) -> bool:
    """True iff both runs issued the same multiset of round-1 (target, set) pairs."""
    return run_a.set_multiset(1) == run_b.set_multiset(1)


class CondOracle:
    """COND oracle for one distribution, logging into a shared ``QueryLog``.

    Parameters
    ----------
    d : Distribution
    target : str
        Label recorded with every query, e.g. "P" or "Q".
    log : QueryLog, optional
        A fresh log is created if omitted.
    root_seed : int
        Root of every stream returned by :meth:`stream`.
    salt : int
        Perturbs all answer streams while keeping their ids; 0 by default.
    """

    def __init__(self, d: Distribution, target: str = "P", log: QueryLog | None = None,
                 root_seed: int = 0, salt: int = 0):
        self.d = d
        self.target = target
        self.log = QueryLog() if log is None else log
        self.root_seed = int(root_seed)
        self.salt = int(salt)
        self._tables: dict[IndexSet, AliasTable] = {}
        self._fresh = 0

    @property
    def n(self) -> int:
        return self.d.n

    def stream(self, purpose: str, *parts) -> RandomStream:
        return RandomStream(self.root_seed, stream_id(purpose, self.target, *parts), self.salt)

    def fresh_stream(self, purpose: str) -> RandomStream:
        """A new stream per call, numbered in call order."""
        self._fresh += 1
        return self.stream(purpose, "fresh", self._fresh)

    def _table(self, s: IndexSet) -> AliasTable:
        table = self._tables.get(s)
        if table is None:
            table = AliasTable(self.d.probs[s.positions])
            self._tables[s] = table
        return table

    def sample(self, s, size: int, stream: RandomStream) -> np.ndarray:
        """``size`` independent draws from COND_d(s), as 1-based indices."""
        s = _as_set(s)
        if not len(s):
            raise ValueError("conditioning set must be nonempty")
        s.check_domain(self.n)
        pos = self._table(s).draw(stream.random(int(size)))
        answers = s.positions[pos] + 1
        self.log._append(_SetBatch(self.log.round, self.target, s, answers))
        return answers

    def query(self, s, stream: RandomStream) -> int:
        """A single COND_d(s) draw."""
        return int(self.sample(s, 1, stream)[0])

    def sample_pairs(self, i: int, js, b: int, stream: RandomStream) -> np.ndarray:
        """For each j in ``js``, ``b`` draws from COND_d({j, i}).

        Returns a bool array of shape (len(js), b), True where the answer
        was j. When j == i the set is {i} and every answer is j.
        """
        js = np.asarray(js, dtype=np.int64)
        self.d._check_index(i)
        if js.size and (js.min() < 1 or js.max() > self.n):
            raise IndexError("pair member outside domain")
        pj = self.d.probs[js - 1]
        pi = self.d.probs[i - 1]
        denom = pj + pi
        with np.errstate(invalid="ignore", divide="ignore"):
            win_p = np.where(denom > 0, pj / denom, 0.5)
        win_p = np.where(js == i, 1.0, win_p)
        wins = stream.random((js.size, int(b))) < win_p[:, None]
        self.log._append(_PairBatch(self.log.round, self.target, int(i), js, wins))
        return wins


def build_sets(n: int, seed: int, nonempty: bool = False) -> list[IndexSet]:
    """The family of random sets S_t for t = 1, 1/2, ..., 2^-K, K = ceil(log2 n).

    Each element of [n] joins S_t independently with probability t; S_1 is
    always the full domain. Uses no oracle queries. With ``nonempty`` an
    empty draw is redrawn, i.e. S_t is conditioned on being nonempty.
    """
    if n < 1:
        raise ValueError("n must be positive")
    K = math.ceil(math.log2(n)) if n > 1 else 0
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream_id("sets"),)))
    sets = [IndexSet.full(n)]
    for k in range(1, K + 1):
        t = 2.0 ** -k
        while True:
            picked = np.flatnonzero(rng.random(n) < t) + 1
            if picked.size or not nonempty:
                break
        sets.append(IndexSet(picked.tolist()))
    return sets
