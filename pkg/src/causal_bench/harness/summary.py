"""Block-level aggregation of experiment records.

Relative errors are aggregated in two forms. ``errors``/``reductions`` use the
signed per-experiment error ``1 - t_hat / t``; its block mean is the relative
error of the mean estimate and its interval may cross zero. ``abs_errors`` /
``abs_reductions`` use ``|t_hat - t| / |t|``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import groupby

import numpy as np

from ..stats import (
    MeanCI,
    TestResult,
    anova_oneway,
    mean_ci,
    paired_t_test,
    relative_rte_error,
    signed_relative_error,
)

METHOD_COLUMNS = {"unadjusted": "t_ua", "matched": "t_match", "multivariate": "t_multi"}


@dataclass
class BlockSummary:
    block_effect: float
    n_records: int
    estimates: dict = field(default_factory=dict)  # method -> MeanCI | None
    errors: dict = field(default_factory=dict)  # method -> MeanCI of signed errors
    abs_errors: dict = field(default_factory=dict)  # method -> MeanCI of absolute errors
    error_of_mean: dict = field(default_factory=dict)  # method -> float
    reductions: dict = field(default_factory=dict)  # "matched"/"multivariate" -> MeanCI (signed)
    abs_reductions: dict = field(default_factory=dict)
    chi2_full: MeanCI | None = None
    chi2_matched: MeanCI | None = None
    bias_reduction: MeanCI | None = None
    pct_matched: MeanCI | None = None
    pct_excluded: MeanCI | None = None
    anova_estimates: TestResult | None = None
    anova_errors: TestResult | None = None
    anova_abs_errors: TestResult | None = None
    paired_reduction: TestResult | None = None
    paired_abs_reduction: TestResult | None = None
    paired_chi2: TestResult | None = None
    n_ok: dict = field(default_factory=dict)
    n_failed: dict = field(default_factory=dict)


def _ci(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    return mean_ci(v) if v.size >= 2 else None


def _safe(test, *args):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return test(*args)
    except ValueError:
        return None


def _rel_errors(estimates, true_t, metric):
    if true_t == 0:
        return np.full(len(estimates), math.nan)
    return np.array([metric(e, true_t) if np.isfinite(e) else math.nan for e in estimates])


def block_arrays(records) -> dict:
    """Column arrays (estimates, errors, reductions, ...) for one block."""
    effect = records[0].block_effect
    true_t = -effect
    out = {}
    for method, col in METHOD_COLUMNS.items():
        out[f"est_{method}"] = np.array([getattr(r, col) for r in records], dtype=float)
        out[f"err_{method}"] = _rel_errors(out[f"est_{method}"], true_t, signed_relative_error)
        out[f"abserr_{method}"] = _rel_errors(out[f"est_{method}"], true_t, relative_rte_error)
    for method in ("matched", "multivariate"):
        out[f"red_{method}"] = out["err_unadjusted"] - out[f"err_{method}"]
        out[f"absred_{method}"] = out["abserr_unadjusted"] - out[f"abserr_{method}"]
    chi2_full = np.array([r.chi2_full for r in records], dtype=float)
    chi2_matched = np.array([r.chi2_matched for r in records], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out["bias_reduction"] = np.where(chi2_full > 0, 1.0 - chi2_matched / chi2_full, math.nan)
    out["chi2_full"] = chi2_full
    out["chi2_matched"] = chi2_matched
    out["pct_matched"] = np.array([r.pct_matched for r in records], dtype=float)
    out["pct_excluded"] = np.array([r.pct_excluded for r in records], dtype=float)
    return out


def summarize_block(records) -> BlockSummary:
    """Aggregate one block. Every statistic uses only its non-missing values."""
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    effect = records[0].block_effect
    if any(r.block_effect != effect for r in records):
        raise ValueError("records span more than one block")
    a = block_arrays(records)
    s = BlockSummary(block_effect=effect, n_records=len(records))
    for method in METHOD_COLUMNS:
        est = a[f"est_{method}"]
        ok = np.isfinite(est)
        s.n_ok[method] = int(ok.sum())
        s.n_failed[method] = int((~ok).sum())
        s.estimates[method] = _ci(est)
        s.errors[method] = _ci(a[f"err_{method}"])
        s.abs_errors[method] = _ci(a[f"abserr_{method}"])
        s.error_of_mean[method] = (
            relative_rte_error(float(est[ok].mean()), -effect) if ok.any() and effect != 0 else math.nan
        )
    for method in ("matched", "multivariate"):
        s.reductions[method] = _ci(a[f"red_{method}"])
        s.abs_reductions[method] = _ci(a[f"absred_{method}"])
    s.chi2_full = _ci(a["chi2_full"])
    s.chi2_matched = _ci(a["chi2_matched"])
    s.bias_reduction = _ci(a["bias_reduction"])
    s.pct_matched = _ci(a["pct_matched"])
    s.pct_excluded = _ci(a["pct_excluded"])
    s.anova_estimates = _safe(anova_oneway, [a[f"est_{m}"] for m in METHOD_COLUMNS])
    s.anova_errors = _safe(anova_oneway, [a[f"err_{m}"] for m in METHOD_COLUMNS])
    s.anova_abs_errors = _safe(anova_oneway, [a[f"abserr_{m}"] for m in METHOD_COLUMNS])
    s.paired_reduction = _safe(paired_t_test, a["red_matched"], a["red_multivariate"])
    s.paired_abs_reduction = _safe(paired_t_test, a["absred_matched"], a["absred_multivariate"])
    s.paired_chi2 = _safe(paired_t_test, a["chi2_full"], a["chi2_matched"])
    return s


def summarize_records(records) -> list[BlockSummary]:
    records = sorted(records, key=lambda r: (r.block_effect, r.rep_index))
    return [summarize_block(list(g)) for _, g in groupby(records, key=lambda r: r.block_effect)]


def pooled_tests(records) -> dict:
    """The same tests as per block, pooled over every record of the grid."""
    records = sorted(records, key=lambda r: (r.block_effect, r.rep_index))
    parts = [block_arrays(list(g)) for _, g in groupby(records, key=lambda r: r.block_effect)]
    if not parts:
        return {}
    cat = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    return {
        "anova_estimates": _safe(anova_oneway, [cat[f"est_{m}"] for m in METHOD_COLUMNS]),
        "anova_errors": _safe(anova_oneway, [cat[f"err_{m}"] for m in METHOD_COLUMNS]),
        "anova_abs_errors": _safe(anova_oneway, [cat[f"abserr_{m}"] for m in METHOD_COLUMNS]),
        "paired_reduction": _safe(paired_t_test, cat["red_matched"], cat["red_multivariate"]),
        "paired_abs_reduction": _safe(paired_t_test, cat["absred_matched"], cat["absred_multivariate"]),
        "paired_chi2": _safe(paired_t_test, cat["chi2_full"], cat["chi2_matched"]),
    }
