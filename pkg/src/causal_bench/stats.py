"""Error metrics, balance statistics and the hypothesis tests for the study."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

CI_LEVEL = 0.95


@dataclass(frozen=True)
class MeanCI:
    mean: float
    lower: float
    upper: float
    n: int
    level: float = CI_LEVEL

    @property
    def half_width(self) -> float:
        return self.upper - self.mean


@dataclass(frozen=True)
class TestResult:
    statistic: float
    dof: float | tuple
    p_value: float
    test_kind: str
    flags: tuple = field(default=())


# ---------------------------------------------------------------- tails

def _check_dof(*dofs):
    for d in dofs:
        if not (np.isfinite(d) and d > 0):
            raise ValueError(f"degrees of freedom must be positive and finite, got {d!r}")


def chi2_tail(x: float, dof: float) -> float:
    """P(chi2_dof >= x) = Q(dof/2, x/2), the regularized upper incomplete gamma."""
    _check_dof(dof)
    if x <= 0:
        return 1.0
    return float(special.gammaincc(dof / 2.0, x / 2.0))


def t_tail(x: float, dof: float) -> float:
    """Upper tail P(T_dof >= x)."""
    _check_dof(dof)
    if np.isinf(x):
        return 0.0 if x > 0 else 1.0
    half = 0.5 * float(special.betainc(dof / 2.0, 0.5, dof / (dof + x * x)))
    return half if x >= 0 else 1.0 - half


def t_two_sided(x: float, dof: float) -> float:
    _check_dof(dof)
    if np.isinf(x):
        return 0.0
    return float(special.betainc(dof / 2.0, 0.5, dof / (dof + x * x)))


def f_tail(x: float, dof1: float, dof2: float) -> float:
    """Upper tail P(F_{dof1,dof2} >= x) via the regularized incomplete beta."""
    _check_dof(dof1, dof2)
    if x <= 0:
        return 1.0
    if np.isinf(x):
        return 0.0
    return float(special.betainc(dof2 / 2.0, dof1 / 2.0, dof2 / (dof2 + dof1 * x)))


def t_quantile(prob: float, dof: float) -> float:
    _check_dof(dof)
    return float(special.stdtrit(dof, prob))


# ---------------------------------------------------------------- metrics

def relative_rte_error(estimated_t: float, true_t: float) -> float:
    """|estimate - truth| / |truth| on the log-odds scale."""
    if true_t == 0:
        raise ValueError("undefined relative error: true effect is zero")
    return abs(estimated_t - true_t) / abs(true_t)


def signed_relative_error(estimated_t: float, true_t: float) -> float:
    """``1 - estimate / truth``: positive when the estimate is shrunk toward
    zero, negative when it overshoots. Its absolute value is
    :func:`relative_rte_error`, and its mean over experiments equals the
    relative error of the mean estimate whenever that error is positive."""
    if true_t == 0:
        raise ValueError("undefined relative error: true effect is zero")
    return (true_t - estimated_t) / true_t


def bias_reduction(chi2_unadjusted: float, chi2_matched: float) -> float:
    if not chi2_unadjusted > 0:
        raise ValueError("chi2_unadjusted must be positive")
    return 1.0 - chi2_matched / chi2_unadjusted


def _pearson_2x2(a, b, c, d) -> float | None:
    n = a + b + c + d
    margins = (a + b) * (c + d) * (a + c) * (b + d)
    if margins == 0:
        return None
    return n * (a * d - b * c) ** 2 / margins


def chi2_homogeneity(covariates, treatment) -> TestResult:
    """Pooled Pearson chi-squared of treatment x covariate, summed over columns.

    Each binary column gives one 2x2 table (1 dof). A table with an empty
    margin contributes 0 and adds ``"zero_margin:<col>"`` to ``flags``.
    """
    cov = np.asarray(covariates)
    if cov.ndim == 1:
        cov = cov[:, None]
    x = np.asarray(treatment).astype(bool)
    if cov.shape[0] != x.shape[0]:
        raise ValueError("covariates and treatment lengths differ")
    if x.all() or not x.any():
        raise ValueError("both treatment arms must be non-empty")
    if not np.all((cov == 0) | (cov == 1)):
        raise ValueError("covariates must be binary")
    cov = cov.astype(bool)
    total = 0.0
    flags = []
    for j in range(cov.shape[1]):
        col = cov[:, j]
        a = int(np.sum(x & col))
        b = int(np.sum(x & ~col))
        c = int(np.sum(~x & col))
        d = int(np.sum(~x & ~col))
        stat = _pearson_2x2(a, b, c, d)
        if stat is None:
            flags.append(f"zero_margin:{j}")
            continue
        total += stat
    dof = cov.shape[1]
    return TestResult(total, dof, chi2_tail(total, dof), "chi2_homogeneity", tuple(flags))


def mean_ci(samples, level: float = CI_LEVEL) -> MeanCI:
    """Student-t confidence interval for the mean."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("mean_ci needs at least two samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    n = x.size
    m = float(x.mean())
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        return MeanCI(m, m, m, n, level)
    hw = t_quantile(0.5 + level / 2.0, n - 1) * sd / math.sqrt(n)
    return MeanCI(m, m - hw, m + hw, n, level)


def paired_t_test(a, b) -> TestResult:
    """Two-sided paired t-test on ``a - b``; pairs with a NaN on either side are dropped."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-d and of equal length")
    keep = np.isfinite(a) & np.isfinite(b)
    d = a[keep] - b[keep]
    n = d.size
    if n < 2:
        raise ValueError("paired t-test needs at least two complete pairs")
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TestResult(0.0, n - 1, 1.0, "paired_t", ("zero_differences",))
        return TestResult(math.copysign(math.inf, mean), n - 1, 0.0, "paired_t", ("zero_variance",))
    t = mean / (sd / math.sqrt(n))
    return TestResult(t, n - 1, t_two_sided(t, n - 1), "paired_t")


def anova_oneway(groups) -> TestResult:
    """Classical one-way ANOVA F test. NaNs are dropped within each group."""
    gs = [np.asarray(g, dtype=float) for g in groups]
    gs = [g[np.isfinite(g)] for g in gs]
    k = len(gs)
    if k < 2 or any(g.size < 2 for g in gs):
        raise ValueError("ANOVA needs at least two groups of at least two values")
    n_total = sum(g.size for g in gs)
    grand = np.concatenate(gs).mean()
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in gs)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in gs)
    dof = (k - 1, n_total - k)
    if ss_within == 0.0:
        warnings.warn("ANOVA with zero within-group variance", RuntimeWarning, stacklevel=2)
        if ss_between == 0.0:
            return TestResult(math.nan, dof, 1.0, "anova_f", ("degenerate",))
        return TestResult(math.inf, dof, 0.0, "anova_f", ("degenerate",))
    f = (ss_between / dof[0]) / (ss_within / dof[1])
    return TestResult(float(f), dof, f_tail(f, *dof), "anova_f")
