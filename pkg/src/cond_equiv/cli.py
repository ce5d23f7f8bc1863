"""``cond-equiv`` command line: gen | run | verify | budget."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .dist import (
    Distribution,
    gen_disjoint_halves,
    gen_heavy_point,
    gen_perturbed_pair,
    gen_uniform,
    total_variation,
)
from .harness import csv_header, run_trials, run_verify, write_csv
from .tester import TesterConfig, budget_ratio, complexity_scale, query_budget

INT_KEYS = {"m", "b", "e_size", "L"}
FLOAT_KEYS = {"eps", "gamma", "beta"}
# refuse runs whose exact budget would take days on one core
MAX_RUN_QUERIES = 10**10


class CliError(Exception):
    pass


def _default_seed() -> int:
    env = os.environ.get("COND_EQUIV_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"COND_EQUIV_SEED must be an integer, got {env!r}") from None


def _parse_sets(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise CliError(f"--set expects key=value, got {item!r}")
        if key in INT_KEYS:
            out[key] = int(value)
        elif key in FLOAT_KEYS:
            out[key] = float(value)
        else:
            raise CliError(f"unknown constant {key!r}; choose from {sorted(INT_KEYS | FLOAT_KEYS)}")
    return out


def _config(args, n: int) -> TesterConfig:
    try:
        cfg = TesterConfig.from_profile(args.profile, eps=args.eps, n=n)
        return cfg.override(**_parse_sets(args.set))
    except (ValueError, TypeError) as exc:
        raise CliError(str(exc)) from None


def cmd_gen(args) -> int:
    n = args.n
    try:
        if args.kind == "uniform":
            dists = [gen_uniform(n)]
        elif args.kind == "heavy-point":
            dists = [gen_heavy_point(n, args.p1)]
        elif args.kind == "disjoint-halves":
            dists = list(gen_disjoint_halves(n))
        elif args.kind == "perturbed-pair":
            dists = list(gen_perturbed_pair(n, args.eps, args.seed))
        else:
            raise CliError(f"unknown generator {args.kind!r}")
    except ValueError as exc:
        raise CliError(str(exc)) from None

    stem = args.out or f"{args.kind}-{n}"
    if len(dists) == 1:
        paths = [Path(stem if stem.endswith(".txt") else stem + ".txt")]
    else:
        base = stem[:-4] if stem.endswith(".txt") else stem
        paths = [Path(f"{base}-p.txt"), Path(f"{base}-q.txt")]
    for d, path in zip(dists, paths):
        d.save(path)
        print(f"wrote {path}")
    if len(dists) == 2:
        print(f"tv = {total_variation(*dists)!r}")
    return 0


def cmd_run(args) -> int:
    try:
        p, q = Distribution.load(args.p), Distribution.load(args.q)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read distribution: {exc}") from None
    if p.n != q.n:
        raise CliError(f"domain sizes differ: {p.n} vs {q.n}")
    if args.trials < 1:
        raise CliError("--trials must be at least 1")
    cfg = _config(args, p.n)
    budget = query_budget(p.n, cfg)
    if budget > MAX_RUN_QUERIES:
        raise CliError(f"query budget {budget} per trial is not simulable; use --profile desk or --set")
    seed = args.seed if args.seed is not None else _default_seed()
    stats, rows = run_trials(p, q, cfg, args.trials, seed, jobs=args.jobs,
                             sequential=args.sequential, timing=not args.no_timing)
    if args.out:
        write_csv(args.out, rows, csv_header(cfg, p.n, seed, args.sequential))
    print(stats.summary())
    if not args.sequential:
        print(f"query_budget = {budget}")
    return 0


def cmd_verify(args) -> int:
    cfg = _config(args, args.n)
    seed = args.seed if args.seed is not None else _default_seed()
    checks = run_verify(args.n, cfg, seed)
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.ok]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_budget(args) -> int:
    cfg = _config(args, args.n)
    budget = query_budget(args.n, cfg)
    print(f"budget = {budget}")
    if args.n > 1:
        print(f"scale = {complexity_scale(args.n, cfg.eps):.6g}")
        print(f"ratio = {budget_ratio(args.n, cfg):.6g}")
    return 0


def _add_config_flags(sp, default_profile="desk"):
    sp.add_argument("--profile", choices=["desk", "paper"], default=default_profile)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a constant (profile becomes custom)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cond-equiv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write benchmark distribution files")
    g.add_argument("kind", choices=["uniform", "heavy-point", "disjoint-halves", "perturbed-pair"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p1", type=float, default=0.9)
    g.add_argument("--eps", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None, help="output file (or stem for pairs)")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run seeded tester trials and write a CSV")
    r.add_argument("p")
    r.add_argument("q")
    _add_config_flags(r)
    r.add_argument("--trials", type=int, default=20)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=None, help="CSV path")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--sequential", action="store_true", help="early-exit control flow")
    r.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-stable CSVs")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="check one-round structure, budget and determinism")
    v.add_argument("--n", type=int, default=32)
    _add_config_flags(v)
    v.add_argument("--seed", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("budget", help="print the exact query budget")
    b.add_argument("--n", type=int, required=True)
    _add_config_flags(b)
    b.set_defaults(func=cmd_budget)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"cond-equiv {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
