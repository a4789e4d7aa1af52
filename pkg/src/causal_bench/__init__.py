"""Monte Carlo comparison of propensity score matching and multivariate
logistic regression for treatment-effect estimation."""

from .estimators import (
    EffectEstimate,
    TreatmentEffectEstimator,
    estimate_matched,
    estimate_multivariate,
    estimate_unadjusted,
)
from .glm import DesignMatrix, LogisticFit, LogisticRegressionIRLS, fit_logistic, odds_ratio, predict_logit
from .psm import MatchResult, MatchSpec, PropensityScoreMatcher, estimate_propensity, match, matched_cohort
from .simulation import Cohort, CohortSpec, simulate_cohort

__version__ = "0.1.0"

__all__ = [
    "Cohort",
    "CohortSpec",
    "DesignMatrix",
    "EffectEstimate",
    "LogisticFit",
    "LogisticRegressionIRLS",
    "MatchResult",
    "MatchSpec",
    "PropensityScoreMatcher",
    "TreatmentEffectEstimator",
    "estimate_matched",
    "estimate_multivariate",
    "estimate_propensity",
    "estimate_unadjusted",
    "fit_logistic",
    "match",
    "matched_cohort",
    "odds_ratio",
    "predict_logit",
    "simulate_cohort",
]
