"""Logistic-regression classifier for the probability of a feasible outcome.

Plain linear logits on unit-cube encodings, trained by Newton iterations
(iteratively reweighted least squares) with step halving on the L2-regularized
negative log-likelihood. The bias is never regularized. One-class data skips
the fit and falls back to the Laplace-smoothed constant classifier
(k + 1) / (n + 2), since Newton steps diverge without both label classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FitError

MAX_ITERATIONS = 100
GRADIENT_TOL = 1e-10
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class LogisticModel:
    """Fitted weights and bias plus a convergence report."""

    weights: np.ndarray
    bias: float
    reg: float
    iterations: int
    grad_norm: float
    degenerate: bool = False


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def predict_probability(model: LogisticModel, x):
    """sigmoid(w . x + b), clamped away from exact 0 and 1.

    ``x`` may be a single point or an (n, d) array.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    logits = np.atleast_2d(x) @ model.weights + model.bias
    p = np.clip(sigmoid(logits), PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
    return float(p[0]) if single else p


def _objective_and_gradient(X, y, w, b, reg):
    logits = X @ w + b
    p = sigmoid(logits)
    p_safe = np.clip(p, 1e-300, 1.0 - 1e-16)
    nll = -float(y @ np.log(p_safe) + (1.0 - y) @ np.log1p(-p_safe))
    nll += 0.5 * reg * float(w @ w)
    grad_w = X.T @ (p - y) + reg * w
    grad_b = float(np.sum(p - y))
    return nll, grad_w, grad_b, p


def fit_logistic(X, labels, reg: float = 1e-3, max_iter: int = MAX_ITERATIONS) -> LogisticModel:
    """Minimize the L2-regularized negative log-likelihood.

    Deterministic; raises FitError (with the convergence report in the
    message) if the gradient has not reached the documented tolerance within
    the iteration cap.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(labels, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise DomainError("X and labels must have matching lengths")
    if len(y) < 1:
        raise DomainError("need at least one labeled point")
    if reg < 0.0:
        raise DomainError("regularization strength must be non-negative")

    positives = int(y.sum())
    if positives == 0 or positives == len(y):
        return _constant_fallback(X, y, reg, positives)

    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    nll, grad_w, grad_b, p = _objective_and_gradient(X, y, w, b, reg)
    grad_norm = max(float(np.max(np.abs(grad_w))) if d else 0.0, abs(grad_b))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if grad_norm <= GRADIENT_TOL:
            iterations -= 1
            break
        weights_irls = np.clip(p * (1.0 - p), 1e-12, None)
        H = np.empty((d + 1, d + 1))
        Xw = X * weights_irls[:, None]
        H[:d, :d] = X.T @ Xw + reg * np.eye(d)
        H[:d, d] = Xw.sum(axis=0)
        H[d, :d] = H[:d, d]
        H[d, d] = weights_irls.sum()
        grad = np.append(grad_w, grad_b)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError as exc:
            raise FitError(f"singular Newton system at iteration {iterations}") from exc
        scale = 1.0
        for _ in range(40):
            w_new = w - scale * step[:d]
            b_new = b - scale * step[d]
            nll_new, gw_new, gb_new, p_new = _objective_and_gradient(X, y, w_new, b_new, reg)
            if nll_new <= nll:
                break
            scale *= 0.5
        w, b, nll, grad_w, grad_b, p = w_new, b_new, nll_new, gw_new, gb_new, p_new
        grad_norm = max(float(np.max(np.abs(grad_w))), abs(grad_b))

    if grad_norm > 1e-6:
        raise FitError(
            f"logistic fit did not converge: {iterations} iterations, "
            f"gradient norm {grad_norm:.3e}"
        )
    return LogisticModel(
        weights=w, bias=b, reg=reg, iterations=iterations, grad_norm=grad_norm
    )


def _constant_fallback(X, y, reg, positives) -> LogisticModel:
    n, d = X.shape
    p_hat = (positives + 1.0) / (n + 2.0)
    w = np.zeros(d)
    b = math.log(p_hat / (1.0 - p_hat))
    _, grad_w, grad_b, _ = _objective_and_gradient(X, y, w, b, reg)
    grad_norm = max(float(np.max(np.abs(grad_w))) if d else 0.0, abs(grad_b))
    return LogisticModel(
        weights=w, bias=b, reg=reg, iterations=0, grad_norm=grad_norm, degenerate=True
    )
