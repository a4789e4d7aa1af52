"""Propensity scores and greedy 1:1 nearest-neighbour caliper matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import EmptyMatchError
from .glm import DesignMatrix, fit_logistic, predict_logit

ORDER_POLICIES = ("descending_ps", "data_order", "random")
DISTANCE_SCALES = ("logit_ps_sd", "absolute")


@dataclass(frozen=True)
class MatchSpec:
    """Matching configuration.

    ``caliper_multiplier`` is in units of the full-cohort SD of the logit
    propensity score when ``distance_scale="logit_ps_sd"``, or in raw logit
    units when ``distance_scale="absolute"``. Matching is always 1:1 without
    replacement.
    """

    caliper_multiplier: float = 0.2
    distance_scale: str = "logit_ps_sd"
    order_policy: str = "descending_ps"

    def __post_init__(self):
        if not (np.isfinite(self.caliper_multiplier) and self.caliper_multiplier >= 0):
            raise ValueError("caliper_multiplier must be finite and >= 0")
        if self.distance_scale not in DISTANCE_SCALES:
            raise ValueError(f"distance_scale must be one of {DISTANCE_SCALES}")
        if self.order_policy not in ORDER_POLICIES:
            raise ValueError(f"order_policy must be one of {ORDER_POLICIES}")

    @property
    def ratio(self) -> int:
        return 1

    @property
    def replacement(self) -> bool:
        return False

    def caliper_width(self, logit_ps) -> float:
        if self.distance_scale == "absolute":
            return float(self.caliper_multiplier)
        logit_ps = np.asarray(logit_ps, dtype=float)
        sd = float(np.std(logit_ps, ddof=1)) if logit_ps.size > 1 else 0.0
        return self.caliper_multiplier * sd


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple  # of (treated_index, control_index, distance)
    unmatched_treated: tuple
    unmatched_controls: tuple
    n_total: int
    caliper_width: float

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    @property
    def n_matched(self) -> int:
        return 2 * len(self.pairs)

    @property
    def percent_matched(self) -> float:
        return 100.0 * self.n_matched / self.n_total

    @property
    def percent_excluded(self) -> float:
        return 100.0 * (self.n_total - self.n_matched) / self.n_total

    @property
    def treated_indices(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=np.intp)

    @property
    def control_indices(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=np.intp)

    @property
    def matched_indices(self) -> np.ndarray:
        """Indices of every matched patient, sorted ascending."""
        return np.sort(np.concatenate([self.treated_indices, self.control_indices]))


def estimate_propensity(cohort) -> np.ndarray:
    """Logit propensity from a logistic fit of treatment on every covariate."""
    return propensity_logit(cohort.covariates, cohort.treatment)


def propensity_logit(covariates, treatment) -> np.ndarray:
    """Covariate columns that are constant carry no information and would make
    the design singular, so they are left out of the fit."""
    treatment = np.asarray(treatment)
    if treatment.min() == treatment.max():
        raise ValueError("propensity model needs both treated and control patients")
    cov = np.asarray(covariates, dtype=float)
    varying = np.ptp(cov, axis=0) > 0 if cov.size else np.zeros(0, dtype=bool)
    labels = [f"x{j}" for j in np.flatnonzero(varying)]
    design = DesignMatrix.from_columns(list(cov[:, varying].T), labels) if varying.any() else \
        DesignMatrix(np.ones((len(treatment), 1)), ("intercept",))
    fit = fit_logistic(design, treatment)
    return predict_logit(fit, design)


def _treated_order(logit_ps, treated_idx, policy, rng):
    if policy == "data_order":
        return treated_idx
    if policy == "descending_ps":
        # lexsort: last key is primary; ties fall back to ascending index
        return treated_idx[np.lexsort((treated_idx, -logit_ps[treated_idx]))]
    if rng is None:
        raise ValueError("order_policy='random' requires an rng")
    return rng.permutation(treated_idx)


def match(logit_ps, treatment, spec: MatchSpec = MatchSpec(), rng=None) -> MatchResult:
    """Greedy nearest-neighbour 1:1 matching without replacement.

    Treated patients are visited in ``spec.order_policy`` order. Each takes the
    closest still-unused control (lowest index on ties); the pair is kept only
    if the distance is within the caliper, otherwise the treated patient stays
    unmatched and the control remains available.
    """
    logit_ps = np.asarray(logit_ps, dtype=float)
    treatment = np.asarray(treatment)
    if logit_ps.shape != treatment.shape or logit_ps.ndim != 1:
        raise ValueError("logit_ps and treatment must be 1-d arrays of equal length")
    treated_idx = np.flatnonzero(treatment == 1)
    control_idx = np.flatnonzero(treatment == 0)
    if treated_idx.size == 0 or control_idx.size == 0:
        raise ValueError("matching needs at least one treated and one control patient")

    width = spec.caliper_width(logit_ps)
    control_ps = logit_ps[control_idx]
    available = np.ones(control_idx.size, dtype=bool)
    pairs = []
    unmatched_treated = []
    for t in _treated_order(logit_ps, treated_idx, spec.order_policy, rng):
        if not available.any():
            unmatched_treated.append(int(t))
            continue
        dist = np.where(available, np.abs(control_ps - logit_ps[t]), np.inf)
        j = int(np.argmin(dist))
        if dist[j] <= width:
            available[j] = False
            pairs.append((int(t), int(control_idx[j]), float(dist[j])))
        else:
            unmatched_treated.append(int(t))
    return MatchResult(
        pairs=tuple(pairs),
        unmatched_treated=tuple(sorted(unmatched_treated)),
        unmatched_controls=tuple(int(c) for c in control_idx[available]),
        n_total=int(treatment.size),
        caliper_width=width,
    )


def matched_cohort(cohort, result: MatchResult):
    if result.n_pairs == 0:
        raise EmptyMatchError("empty matched sample")
    return cohort.subset(result.matched_indices)


class PropensityScoreMatcher(BaseEstimator):
    """Scikit-learn style wrapper: ``fit(X, treatment)`` estimates propensity
    scores and forms the matched sample; ``transform`` returns matched rows.

    Attributes
    ----------
    logit_ps_ : ndarray of shape (n_samples,)
    match_result_ : MatchResult
    matched_indices_ : ndarray
    """

    def __init__(self, caliper=0.2, distance_scale="logit_ps_sd", order_policy="descending_ps",
                 random_state=None):
        self.caliper = caliper
        self.distance_scale = distance_scale
        self.order_policy = order_policy
        self.random_state = random_state

    def fit(self, X, treatment):
        X = np.asarray(X, dtype=float)
        treatment = np.asarray(treatment)
        if X.ndim != 2 or X.shape[0] != treatment.shape[0]:
            raise ValueError("X must be 2-d with one row per treatment entry")
        spec = MatchSpec(self.caliper, self.distance_scale, self.order_policy)
        rng = np.random.default_rng(self.random_state)
        self.n_features_in_ = X.shape[1]
        self.logit_ps_ = propensity_logit(X, treatment)
        self.match_result_ = match(self.logit_ps_, treatment, spec, rng)
        self.matched_indices_ = self.match_result_.matched_indices
        return self

    def transform(self, X):
        """Rows of ``X`` belonging to the matched sample, in index order."""
        check_is_fitted(self, "match_result_")
        return np.asarray(X)[self.matched_indices_]

    def fit_transform(self, X, treatment):
        return self.fit(X, treatment).transform(X)
