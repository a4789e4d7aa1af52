"""Independent reference computations used only by the tests.

Nothing here imports from causal_bench, so a bug in the package cannot leak
into the expected values.
"""

import math

import mpmath
import numpy as np


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def coordinate_mle(X, y, tol=1e-13, max_cycles=20000):
    """Logistic MLE by cyclic coordinate ascent.

    Each 1-d subproblem is solved by bisection on that coordinate's score,
    which is strictly decreasing in the coordinate. No Hessian is used.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.zeros(X.shape[1])
    for _ in range(max_cycles):
        biggest = 0.0
        for j in range(X.shape[1]):
            rest = X @ beta - X[:, j] * beta[j]

            def g(b):
                return float(X[:, j] @ (y - _expit(rest + X[:, j] * b)))

            lo, hi = beta[j] - 1.0, beta[j] + 1.0
            while g(lo) < 0:
                lo -= 2.0 * (hi - lo)
            while g(hi) > 0:
                hi += 2.0 * (hi - lo)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if g(mid) > 0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-15:
                    break
            new = 0.5 * (lo + hi)
            biggest = max(biggest, abs(new - beta[j]))
            beta[j] = new
        if biggest < tol:
            break
    return beta


def log_odds_ratio_2x2(events_treated, n_treated, events_control, n_control):
    a, b = events_treated, n_treated - events_treated
    c, d = events_control, n_control - events_control
    return math.log((a * d) / (b * c))


def data_from_2x2(events_treated, n_treated, events_control, n_control):
    x = np.r_[np.ones(n_treated), np.zeros(n_control)]
    y = np.r_[
        np.ones(events_treated), np.zeros(n_treated - events_treated),
        np.ones(events_control), np.zeros(n_control - events_control),
    ]
    return x, y


mpmath.mp.dps = 30


def _chi2_pdf(x, k):
    k = mpmath.mpf(k)
    return mpmath.exp((k / 2 - 1) * mpmath.log(x) - x / 2 - (k / 2) * mpmath.log(2) - mpmath.loggamma(k / 2))


def _t_pdf(x, v):
    v = mpmath.mpf(v)
    return mpmath.exp(
        mpmath.loggamma((v + 1) / 2) - mpmath.loggamma(v / 2)
        - 0.5 * mpmath.log(v * mpmath.pi) - (v + 1) / 2 * mpmath.log(1 + x * x / v)
    )


def _f_pdf(x, d1, d2):
    d1, d2 = mpmath.mpf(d1), mpmath.mpf(d2)
    return mpmath.exp(
        (d1 / 2) * mpmath.log(d1 / d2) + (d1 / 2 - 1) * mpmath.log(x)
        - (d1 + d2) / 2 * mpmath.log(1 + d1 * x / d2) - mpmath.log(mpmath.beta(d1 / 2, d2 / 2))
    )


def _upper(pdf, x, centre):
    # split at the bulk of the density so the quadrature sees the peak
    pts = sorted({mpmath.mpf(x), *[mpmath.mpf(p) for p in centre if p > x]})
    return float(mpmath.quad(pdf, pts + [mpmath.inf]))


def chi2_upper_quad(x, k):
    if x <= 0:
        return 1.0
    return _upper(lambda s: _chi2_pdf(s, k), x, [k, k + 5 * math.sqrt(2 * k), k + 20 * math.sqrt(2 * k)])


def t_upper_quad(x, v):
    if x < 0:
        return 1.0 - t_upper_quad(-x, v)
    return _upper(lambda s: _t_pdf(s, v), x, [1.0, 5.0, 50.0])


def f_upper_quad(x, d1, d2):
    if x <= 0:
        return 1.0
    return _upper(lambda s: _f_pdf(s, d1, d2), x, [1.0, 3.0, 10.0, 100.0])
