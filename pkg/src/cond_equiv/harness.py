"""Seeded trial batches, CSV results and structural self-checks."""

from __future__ import annotations

import csv
import io
import os
import tempfile
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .dist import Distribution, gen_perturbed_pair, gen_uniform
from .oracle import verify_one_round
from .tester import TesterConfig, equiv_tester, query_budget

CSV_COLUMNS = ["trial", "seed", "decision", "branch", "tuple_index",
               "queries_round1", "queries_round2", "wall_ms"]


@dataclass
class TrialStats:
    trials: int = 0
    accepts: int = 0
    rejects: int = 0
    reject_branch_counts: dict = field(default_factory=dict)
    mean_queries: float = 0.0
    mean_wall_ms: float = 0.0
    seeds: list = field(default_factory=list)

    @classmethod
    def from_rows(cls, rows: list[dict]) -> "TrialStats":
        if not rows:
            return cls()
        k = len(rows)
        branches = Counter(r["branch"] for r in rows if r["decision"] == "Reject")
        return cls(
            trials=k,
            accepts=sum(r["decision"] == "Accept" for r in rows),
            rejects=sum(r["decision"] == "Reject" for r in rows),
            reject_branch_counts=dict(sorted(branches.items())),
            mean_queries=sum(r["queries_round1"] + r["queries_round2"] for r in rows) / k,
            mean_wall_ms=sum(r["wall_ms"] for r in rows) / k,
            seeds=[r["seed"] for r in rows],
        )

    def summary(self) -> str:
        branches = ", ".join(f"{b}={c}" for b, c in self.reject_branch_counts.items()) or "-"
        return (f"trials={self.trials} accepts={self.accepts} rejects={self.rejects} "
                f"branches[{branches}] mean_queries={self.mean_queries:.1f} "
                f"mean_wall_ms={self.mean_wall_ms:.3f}")


def run_one(p: Distribution, q: Distribution, cfg: TesterConfig, trial: int, seed: int,
            sequential: bool = False, timing: bool = True) -> dict:
    start = time.perf_counter()
    v = equiv_tester(p, q, cfg, seed, sequential=sequential)
    wall = (time.perf_counter() - start) * 1e3 if timing else 0.0
    w = v.witness
    return {
        "trial": trial,
        "seed": seed,
        "decision": v.decision,
        "branch": w.branch if w else "",
        "tuple_index": w.tuple_index if w else -1,
        "queries_round1": v.queries_used[1],
        "queries_round2": v.queries_used[2],
        # rounded so stats recomputed from the CSV match exactly
        "wall_ms": round(wall, 3),
    }


def _run_one_star(args):
    return run_one(*args)


def run_trials(p: Distribution, q: Distribution, cfg: TesterConfig, trials: int, seed: int,
               jobs: int = 1, sequential: bool = False, timing: bool = True):
    """Run ``trials`` seeded tester runs; trial k uses seed ``seed + k``.

    Returns ``(stats, rows)`` with rows in trial order.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if p.n != q.n:
        raise ValueError(f"domain sizes differ: {p.n} vs {q.n}")
    work = [(p, q, cfg, k, seed + k, sequential, timing) for k in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one_star, work))
    else:
        rows = [run_one(*w) for w in work]
    return TrialStats.from_rows(rows), rows


def csv_header(cfg: TesterConfig, n: int, seed: int, sequential: bool) -> str:
    consts = " ".join(f"{k}={v}" for k, v in cfg.as_dict().items())
    mode = "sequential" if sequential else "one-round"
    return f"# cond-equiv {consts} n={n} seed={seed} mode={mode}"


def format_csv(rows: list[dict], header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(header + "\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({**r, "wall_ms": f"{r['wall_ms']:.3f}"})
    return buf.getvalue()


def write_csv(path, rows: list[dict], header: str | None = None) -> None:
    """Write atomically: a temp file in the target directory, then rename."""
    path = Path(path)
    text = format_csv(rows, header)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def read_csv(path) -> tuple[TrialStats, list[dict]]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = []
    for r in csv.DictReader(lines):
        rows.append({
            "trial": int(r["trial"]),
            "seed": int(r["seed"]),
            "decision": r["decision"],
            "branch": r["branch"],
            "tuple_index": int(r["tuple_index"]),
            "queries_round1": int(r["queries_round1"]),
            "queries_round2": int(r["queries_round2"]),
            "wall_ms": float(r["wall_ms"]),
        })
    return TrialStats.from_rows(rows), rows


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"


def run_verify(n: int, cfg: TesterConfig, seed: int, tester=equiv_tester) -> list[CheckResult]:
    """Round-1 invariance under perturbed answers, budget exactness, determinism.

    ``tester`` must accept ``(p, q, cfg, seed, salt=...)`` and return an
    object with ``decision``, ``witness`` and ``log``.
    """
    if n >= 2 and n % 2 == 0:
        p, q = gen_perturbed_pair(n, min(1.0, 2 * cfg.eps), seed)
    else:
        p = q = gen_uniform(n)
    run_a = tester(p, q, cfg, seed, salt=0)
    run_b = tester(p, q, cfg, seed, salt=1)
    run_c = tester(p, q, cfg, seed, salt=0)

    same_round1 = verify_one_round(run_a.log, run_b.log)
    answers_differ = run_a.log.fingerprint() != run_b.log.fingerprint()
    checks = [CheckResult(
        "round1-invariance",
        same_round1 and answers_differ,
        f"round-1 (target, set) multiset {'identical' if same_round1 else 'differs'} "
        f"under perturbed answers (answers {'perturbed' if answers_differ else 'unchanged'})",
    )]

    budget = query_budget(n, cfg)
    totals = [run_a.log.total, run_b.log.total]
    checks.append(CheckResult(
        "budget-exactness",
        all(t == budget for t in totals),
        f"logged totals {totals} vs query_budget {budget}",
    ))

    fp_a, fp_c = run_a.log.fingerprint(), run_c.log.fingerprint()
    same = fp_a == fp_c and run_a.decision == run_c.decision and run_a.witness == run_c.witness
    checks.append(CheckResult(
        "determinism",
        same,
        f"repeat run decision={run_c.decision} log sha256 {fp_c[:16]} "
        f"{'matches' if same else 'differs from'} {fp_a[:16]}",
    ))
    return checks
