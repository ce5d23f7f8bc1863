"""One-round adaptive equivalence testing of discrete distributions with conditional samples."""

from .dist import (
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
from .estimators import TailParams, binom_cdf, est_prob, est_tail, tp_exact
from .oracle import (
    AliasTable,
    CondOracle,
    QueryLog,
    QueryRecord,
    RandomStream,
    build_sets,
    round_barrier,
    stream_id,
    verify_one_round,
)
from .tester import (
    ACCEPT,
    REJECT,
    TesterConfig,
    Verdict,
    Witness,
    budget_ratio,
    distinguisher_check,
    equiv_tester,
    query_budget,
)
from .harness import TrialStats, run_trials, run_verify

__version__ = "0.1.0"
