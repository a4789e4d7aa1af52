"""Binary logistic regression fitted by iteratively reweighted least squares.

``fit_logistic`` is the functional core used by every regression in the
simulation study; :class:`LogisticRegressionIRLS` wraps it in the scikit-learn
estimator protocol.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import (
    ConvergenceError,
    DegenerateOutcomeError,
    SeparationError,
    SingularDesignError,
)
from .simulation import event_probability

TOL = 1e-8
MAX_ITER = 50
SEPARATION_THRESHOLD = 30.0
DIVERGING_STEP = 0.5


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    column_labels: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"design must be 2-d, got shape {values.shape}")
        if values.shape[0] < values.shape[1]:
            raise ValueError(f"design has fewer rows ({values.shape[0]}) than columns ({values.shape[1]})")
        if not np.all(np.isfinite(values)):
            raise ValueError("design contains non-finite entries")
        if len(self.column_labels) != values.shape[1]:
            raise ValueError("column_labels length does not match design width")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_labels", tuple(self.column_labels))

    @classmethod
    def from_columns(cls, columns, labels: Sequence[str], intercept: bool = True) -> "DesignMatrix":
        """Stack predictor columns, optionally prefixed by an all-ones column."""
        cols = np.column_stack([np.asarray(c, dtype=float) for c in columns]) if len(columns) else None
        labels = list(labels)
        if intercept:
            n = len(columns[0]) if len(columns) else 0
            ones = np.ones((n, 1))
            cols = ones if cols is None else np.hstack([ones, cols])
            labels = ["intercept"] + labels
        return cls(cols, tuple(labels))

    @property
    def shape(self):
        return self.values.shape

    def index(self, label: str) -> int:
        return self.column_labels.index(label)


@dataclass(frozen=True)
class LogisticFit:
    coefficients: np.ndarray
    converged: bool
    iterations: int
    log_likelihood: float
    singular: bool = False
    column_labels: tuple = ()
    score: np.ndarray | None = None
    fitted: np.ndarray | None = None

    def coefficient(self, label: str) -> float:
        return float(self.coefficients[self.column_labels.index(label)])


def log_likelihood(X, y, beta) -> float:
    """Bernoulli log-likelihood, computed as sum(y*eta - log(1 + e^eta))."""
    eta = np.asarray(X, dtype=float) @ np.asarray(beta, dtype=float)
    return float(np.sum(np.asarray(y) * eta - np.logaddexp(0.0, eta)))


def fit_logistic(
    design,
    outcomes,
    *,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    separation_threshold: float = SEPARATION_THRESHOLD,
) -> LogisticFit:
    """Maximum-likelihood logistic regression by IRLS (Newton-Raphson).

    Parameters
    ----------
    design : DesignMatrix or array of shape (n_obs, n_cols)
        Regressors; include an intercept column yourself when passing a raw array.
    outcomes : array of {0, 1}

    Returns
    -------
    LogisticFit

    Raises
    ------
    DegenerateOutcomeError
        Outcomes contain a single class.
    SingularDesignError
        The design is rank deficient.
    SeparationError
        A coefficient exceeds ``separation_threshold`` in magnitude, or the
        score vanishes while Newton steps are still large. Both signal
        (quasi-)complete separation.

    Notes
    -----
    Iteration stops when ``max|delta beta| <= tol`` or ``max|score| <= tol``.
    The Newton system is solved by Cholesky; if that fails numerically a tiny
    ridge is added to that single solve and ``singular`` is set on the result.
    A step that lowers the likelihood is halved until it does not.
    """
    if isinstance(design, DesignMatrix):
        X, labels = design.values, design.column_labels
    else:
        X = np.asarray(design, dtype=float)
        labels = tuple(f"x{i}" for i in range(X.shape[1]))
    y = np.asarray(outcomes, dtype=float)
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError(f"outcomes must have shape ({n},), got {y.shape}")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("outcomes must be 0/1")
    if y.min() == y.max():
        raise DegenerateOutcomeError("degenerate outcome: only one class present")
    if np.linalg.matrix_rank(X) < p:
        raise SingularDesignError("singular design: columns are linearly dependent")

    beta = np.zeros(p)
    ll = log_likelihood(X, y, beta)
    converged = False
    singular = False
    iterations = 0
    last_step = 0.0
    for iterations in range(1, max_iter + 1):
        mu = event_probability(X @ beta)
        score = X.T @ (y - mu)
        if np.max(np.abs(score)) <= tol:
            if last_step > DIVERGING_STEP:
                # score vanished only because fitted probabilities hit 0 or 1
                raise SeparationError(
                    f"separation detected: coefficients still moving by {last_step:.3g} per step"
                )
            converged = True
            iterations -= 1
            break
        hessian = (X * (mu * (1.0 - mu))[:, None]).T @ X
        try:
            step = linalg.cho_solve(linalg.cho_factor(hessian), score)
        except linalg.LinAlgError:
            ridge = 1e-10 * max(np.trace(hessian), 1.0)
            step = linalg.solve(hessian + ridge * np.eye(p), score, assume_a="pos")
            singular = True
        new_beta = beta + step
        new_ll = log_likelihood(X, y, new_beta)
        halvings = 0
        while new_ll < ll - 1e-12 * abs(ll) and halvings < 30:
            step = step / 2.0
            new_beta = beta + step
            new_ll = log_likelihood(X, y, new_beta)
            halvings += 1
        if np.max(np.abs(new_beta)) > separation_threshold:
            raise SeparationError(
                f"separation detected: |coefficient| reached {np.max(np.abs(new_beta)):.3g}"
            )
        beta, ll = new_beta, new_ll
        last_step = float(np.max(np.abs(step)))
        if last_step <= tol:
            converged = True
            break

    if converged and not singular:
        # one more Newton step: the score test can stop ~tol/curvature short of the optimum
        mu = event_probability(X @ beta)
        hessian = (X * (mu * (1.0 - mu))[:, None]).T @ X
        try:
            polished = beta + linalg.cho_solve(linalg.cho_factor(hessian), X.T @ (y - mu))
            ll = log_likelihood(X, y, beta)
            # likelihood gains here are below rounding, so only guard against real losses
            if log_likelihood(X, y, polished) >= ll - 1e-12 * abs(ll):
                beta = polished
        except linalg.LinAlgError:
            pass

    fitted = event_probability(X @ beta)
    score = X.T @ (y - fitted)
    if not converged:
        warnings.warn(f"IRLS did not converge in {max_iter} iterations", RuntimeWarning, stacklevel=2)
    return LogisticFit(
        coefficients=beta,
        converged=converged,
        iterations=iterations,
        log_likelihood=log_likelihood(X, y, beta),
        singular=singular,
        column_labels=tuple(labels),
        score=score,
        fitted=fitted,
    )


def predict_logit(fit: LogisticFit, design) -> np.ndarray:
    X = design.values if isinstance(design, DesignMatrix) else np.atleast_2d(np.asarray(design, dtype=float))
    if X.shape[1] != len(fit.coefficients):
        raise ValueError(
            f"design has {X.shape[1]} columns but the fit has {len(fit.coefficients)} coefficients"
        )
    return X @ fit.coefficients


def odds_ratio(coefficient: float) -> float:
    if not np.isfinite(coefficient):
        raise ValueError("coefficient must be finite")
    return float(np.exp(coefficient))


class LogisticRegressionIRLS(ClassifierMixin, BaseEstimator):
    """Unpenalized logistic regression fitted by IRLS.

    Parameters
    ----------
    fit_intercept : bool, default=True
    tol : float, default=1e-8
    max_iter : int, default=50
    separation_threshold : float, default=30.0
    require_convergence : bool, default=True
        Raise :class:`ConvergenceError` instead of warning when IRLS stops at
        ``max_iter``.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    fit_ : LogisticFit
    n_iter_ : int
    classes_ : ndarray
    """

    def __init__(self, fit_intercept=True, tol=TOL, max_iter=MAX_ITER,
                 separation_threshold=SEPARATION_THRESHOLD, require_convergence=True):
        self.fit_intercept = fit_intercept
        self.tol = tol
        self.max_iter = max_iter
        self.separation_threshold = separation_threshold
        self.require_convergence = require_convergence

    def _design(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if self.fit_intercept:
            X = np.hstack([np.ones((X.shape[0], 1)), X])
        return X

    def fit(self, X, y):
        y = np.asarray(y)
        self.classes_ = np.unique(y)
        if not np.all(np.isin(self.classes_, (0, 1))):
            raise ValueError(f"y must be binary 0/1, got classes {self.classes_}")
        X = np.asarray(X, dtype=float)
        self.n_features_in_ = 1 if X.ndim == 1 else X.shape[1]
        with warnings.catch_warnings():
            if self.require_convergence:
                warnings.simplefilter("ignore", RuntimeWarning)
            fit = fit_logistic(
                self._design(X), y,
                tol=self.tol, max_iter=self.max_iter,
                separation_threshold=self.separation_threshold,
            )
        if self.require_convergence and not fit.converged:
            raise ConvergenceError(f"IRLS did not converge in {self.max_iter} iterations")
        self.fit_ = fit
        self.n_iter_ = fit.iterations
        if self.fit_intercept:
            self.intercept_ = float(fit.coefficients[0])
            self.coef_ = fit.coefficients[1:].copy()
        else:
            self.intercept_ = 0.0
            self.coef_ = fit.coefficients.copy()
        return self

    def decision_function(self, X):
        check_is_fitted(self, "fit_")
        return predict_logit(self.fit_, self._design(X))

    def predict_proba(self, X):
        p = event_probability(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)
