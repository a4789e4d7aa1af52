"""Treatment-effect estimates for one simulated experiment.

Three estimators of the treatment log-odds ratio:

``unadjusted``    events ~ 1 + treatment, whole cohort
``multivariate``  events ~ 1 + treatment + every covariate, whole cohort
``matched``       events ~ 1 + treatment, propensity-matched sample only
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import DegenerateTreatmentError, EmptyMatchError
from .glm import DesignMatrix, fit_logistic
from .psm import MatchSpec, match, matched_cohort, propensity_logit

METHODS = ("unadjusted", "multivariate", "matched")


@dataclass(frozen=True)
class EffectEstimate:
    method: str
    coefficient: float
    odds_ratio: float
    n_used: int


def _treatment_fit(treatment, events, covariates=None, labels=()):
    treatment = np.asarray(treatment)
    if treatment.min() == treatment.max():
        raise DegenerateTreatmentError("degenerate treatment: only one arm present")
    columns = [treatment]
    names = ["treatment"]
    if covariates is not None:
        columns += list(np.asarray(covariates, dtype=float).T)
        names += list(labels)
    design = DesignMatrix.from_columns(columns, names)
    return fit_logistic(design, events)


def _estimate(method, treatment, events, covariates=None, labels=()):
    fit = _treatment_fit(treatment, events, covariates, labels)
    coef = fit.coefficient("treatment")
    return EffectEstimate(method, coef, float(np.exp(coef)), len(treatment)), fit


def estimate_unadjusted(cohort) -> EffectEstimate:
    return _estimate("unadjusted", cohort.treatment, cohort.events)[0]


def estimate_multivariate(cohort) -> EffectEstimate:
    labels = cohort.spec.column_labels()
    return _estimate("multivariate", cohort.treatment, cohort.events, cohort.covariates, labels)[0]


def estimate_matched(cohort, match_result) -> EffectEstimate:
    sub = matched_cohort(cohort, match_result)
    return _estimate("matched", sub.treatment, sub.events)[0]


class TreatmentEffectEstimator(BaseEstimator):
    """Estimate a treatment log-odds ratio from ``(X, treatment, y)``.

    Parameters
    ----------
    method : {"unadjusted", "multivariate", "matched"}
    caliper : float, default=0.2
        Only used by ``method="matched"``; width in SDs of the logit propensity.
    order_policy : str, default="descending_ps"
    random_state : int or None

    Attributes
    ----------
    coef_ : float
        Estimated treatment coefficient on the log-odds scale.
    odds_ratio_ : float
    n_used_ : int
    fit_ : LogisticFit
    match_result_ : MatchResult, only for ``method="matched"``
    """

    def __init__(self, method="multivariate", caliper=0.2, order_policy="descending_ps",
                 random_state=None):
        self.method = method
        self.caliper = caliper
        self.order_policy = order_policy
        self.random_state = random_state

    def fit(self, X, treatment, y):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        X = np.asarray(X, dtype=float)
        treatment = np.asarray(treatment)
        y = np.asarray(y)
        if X.ndim != 2 or not (X.shape[0] == treatment.shape[0] == y.shape[0]):
            raise ValueError("X, treatment and y must have matching first dimensions")
        self.n_features_in_ = X.shape[1]
        if self.method == "unadjusted":
            est, fit = _estimate("unadjusted", treatment, y)
        elif self.method == "multivariate":
            labels = [f"x{j}" for j in range(X.shape[1])]
            est, fit = _estimate("multivariate", treatment, y, X, labels)
        else:
            spec = MatchSpec(self.caliper, "logit_ps_sd", self.order_policy)
            result = match(propensity_logit(X, treatment), treatment, spec,
                           np.random.default_rng(self.random_state))
            if result.n_pairs == 0:
                raise EmptyMatchError("empty matched sample")
            rows = result.matched_indices
            est, fit = _estimate("matched", treatment[rows], y[rows])
            self.match_result_ = result
        self.estimate_ = est
        self.coef_ = est.coefficient
        self.odds_ratio_ = est.odds_ratio
        self.n_used_ = est.n_used
        self.fit_ = fit
        return self
