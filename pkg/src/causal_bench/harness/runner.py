"""Per-experiment pipeline and the block x replicate grid."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

from .._random import block_key, make_rng, mix64
from ..estimators import estimate_matched, estimate_multivariate, estimate_unadjusted
from ..psm import estimate_propensity, match, matched_cohort
from ..simulation import simulate_cohort
from ..stats import chi2_homogeneity
from .config import RunConfig, resolve_workers

log = logging.getLogger(__name__)

NA = math.nan


@dataclass(frozen=True)
class ExperimentRecord:
    block_effect: float
    rep_index: int
    seed: int
    n_total: int
    n_treated: int
    t_ua: float
    t_match: float
    t_multi: float
    chi2_full: float
    chi2_matched: float
    n_matched: int
    pct_matched: float
    pct_excluded: float
    fail_ua: str = ""
    fail_match: str = ""
    fail_multi: str = ""

    @property
    def true_t(self) -> float:
        return -self.block_effect


RECORD_FIELDS = tuple(f.name for f in fields(ExperimentRecord))


def experiment_seed(base_seed: int, block_effect: float, rep_index: int) -> int:
    return mix64(base_seed, block_key(block_effect), rep_index)


def _reason(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")


def run_experiment(config: RunConfig, block_effect: float, rep_index: int) -> ExperimentRecord:
    """Simulate one cohort and apply all three estimators.

    Estimator failures are captured as NaN plus a reason string; they never
    propagate.
    """
    seed = experiment_seed(config.base_seed, block_effect, rep_index)
    rng = make_rng(seed)
    cohort = simulate_cohort(config.cohort_spec, -block_effect, rng)

    def attempt(fn, *args):
        try:
            return fn(*args).coefficient, ""
        except (ValueError, ArithmeticError) as exc:
            return NA, _reason(exc)

    t_ua, fail_ua = attempt(estimate_unadjusted, cohort)
    t_multi, fail_multi = attempt(estimate_multivariate, cohort)

    try:
        chi2_full = chi2_homogeneity(cohort.covariates, cohort.treatment).statistic
    except ValueError:
        chi2_full = NA

    chi2_matched = NA
    n_matched = 0
    try:
        result = match(estimate_propensity(cohort), cohort.treatment, config.match_spec, rng)
        n_matched = result.n_matched
        t_match, fail_match = attempt(estimate_matched, cohort, result)
        if result.n_pairs:
            sub = matched_cohort(cohort, result)
            chi2_matched = chi2_homogeneity(sub.covariates, sub.treatment).statistic
    except (ValueError, ArithmeticError) as exc:
        t_match, fail_match = NA, _reason(exc)

    n = len(cohort)
    return ExperimentRecord(
        block_effect=float(block_effect),
        rep_index=int(rep_index),
        seed=seed,
        n_total=n,
        n_treated=cohort.n_treated,
        t_ua=float(t_ua),
        t_match=float(t_match),
        t_multi=float(t_multi),
        chi2_full=float(chi2_full),
        chi2_matched=float(chi2_matched),
        n_matched=int(n_matched),
        pct_matched=100.0 * n_matched / n,
        pct_excluded=100.0 * (n - n_matched) / n,
        fail_ua=fail_ua,
        fail_match=fail_match,
        fail_multi=fail_multi,
    )


def _run_task(args):
    config, effect, rep = args
    return run_experiment(config, effect, rep)


def run_records(config: RunConfig, workers: int | None = None) -> list[ExperimentRecord]:
    """Run every (block, rep) experiment; the result is sorted by (block, rep)."""
    workers = resolve_workers(workers, config)
    tasks = [(config, e, r) for e in config.effect_grid for r in range(config.reps_per_block)]
    log.info("running %d experiments on %d worker(s)", len(tasks), workers)
    if workers == 1 or len(tasks) <= 1:
        records = [_run_task(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=chunk))
    records.sort(key=lambda r: (r.block_effect, r.rep_index))
    return records


def run_grid(config: RunConfig, workers: int | None = None, output_dir=None):
    """Run the grid, summarize each block and (optionally) write all outputs.

    Returns ``(records, summaries)``.
    """
    from .outputs import emit_outputs
    from .summary import summarize_records

    records = run_records(config, workers)
    summaries = summarize_records(records)
    if output_dir is not None:
        emit_outputs(records, summaries, output_dir)
    return records, summaries
