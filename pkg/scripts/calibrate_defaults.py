"""Grid search for default cohort weights.

Scales the outcome weights (A, B) by ``alpha`` and the treatment weights
(A, C) by ``beta`` from base shapes, sets the treatment intercept for a target
treated prevalence, then compares desk-scale averages at effect magnitude 5
against the published row: unadjusted chi2 220.7, ~70% matched, estimates
-2.225 (unadjusted), -2.922 (matched), -4.521 (multivariate).

    python scripts/calibrate_defaults.py --reps 40
"""

import argparse
import itertools

import numpy as np
from scipy.optimize import brentq

from causal_bench._random import make_rng
from causal_bench.estimators import estimate_matched, estimate_multivariate, estimate_unadjusted
from causal_bench.psm import MatchSpec, estimate_propensity, match, matched_cohort
from causal_bench.simulation import CohortSpec, simulate_cohort
from causal_bench.stats import chi2_homogeneity

Q, S = np.array([0.5, 0.8]), np.array([0.4, 0.6])
TA, TC = np.array([0.8, 1.0]), np.array([0.6, 0.9])
TARGET = {"chi2": 220.7, "pct": 70.0, "ua": -2.225, "match": -2.922, "multi": -4.521}
SCALE = {"chi2": 20.0, "pct": 3.0, "ua": 0.1, "match": 0.1, "multi": 0.1}


def intercept_for(prevalence, wa, wc):
    w = np.r_[wa, wc]
    pats = np.array(list(itertools.product([0, 1], repeat=len(w))))
    return brentq(lambda b: np.mean(1 / (1 + np.exp(-(b + pats @ w)))) - prevalence, -30, 30)


def make_spec(alpha, beta, prevalence):
    wa, wc = beta * TA, beta * TC
    return CohortSpec(q_weights=tuple(alpha * Q), s_weights=tuple(alpha * S),
                      treat_a_weights=tuple(wa), treat_c_weights=tuple(wc),
                      treat_intercept=intercept_for(prevalence, wa, wc))


def evaluate(spec, reps, effect=5.0):
    rows = []
    for s in range(reps):
        c = simulate_cohort(spec, -effect, make_rng(10_000 + s))
        try:
            res = match(estimate_propensity(c), c.treatment, MatchSpec())
            sub = matched_cohort(c, res)
            rows.append((chi2_homogeneity(c.covariates, c.treatment).statistic, res.percent_matched,
                         estimate_unadjusted(c).coefficient, estimate_matched(c, res).coefficient,
                         estimate_multivariate(c).coefficient))
        except ValueError:
            continue
    return dict(zip(TARGET, np.mean(rows, axis=0))), len(rows)


def loss(stats):
    return sum(((stats[k] - TARGET[k]) / SCALE[k]) ** 2 for k in TARGET)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=40)
    ap.add_argument("--alpha", type=float, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--beta", type=float, nargs="+", default=[1, 1.5, 2, 2.5, 3])
    ap.add_argument("--prevalence", type=float, nargs="+", default=[0.35, 0.4, 0.45, 0.5])
    args = ap.parse_args()
    results = []
    for alpha, beta, prev in itertools.product(args.alpha, args.beta, args.prevalence):
        spec = make_spec(alpha, beta, prev)
        stats, n = evaluate(spec, args.reps)
        results.append((loss(stats), alpha, beta, prev, spec.treat_intercept, stats, n))
    results.sort(key=lambda r: r[0])
    for l, alpha, beta, prev, b0, stats, n in results[:10]:
        print(f"loss {l:8.2f} alpha {alpha:.2f} beta {beta:.2f} prev {prev:.2f} b0 {b0:.4f} ok {n} "
              + " ".join(f"{k} {v:.3f}" for k, v in stats.items()))


if __name__ == "__main__":
    main()
