"""Gaussian-process regression with per-point observation variances.

The covariance of the modeled response splits into a smooth spatial part
(anisotropic squared-exponential kernel with process variance ``sigma2``
and per-dimension lengthscales) and a fixed diagonal of observation
variances supplied by the caller, estimated from replications:

    K = sigma2 * R(lengthscales) + diag(v) + jitter * I

Predictions return the spatial posterior only, i.e. the mean and the
noise-free variance at the query point; the query's own observation noise is
never added back. With all v = 0 the posterior mean interpolates the
training responses.

Hyperparameters maximize the log marginal likelihood by derivative-free
multistart local search over a log-scale box; the constant trend ``mu`` is
profiled out in closed form (generalized least squares). When no variance
estimates are available at all (``v=None``), a homoscedastic nugget is fitted
as an extra hyperparameter instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from threadpoolctl import threadpool_limits

from .errors import DomainError, FitError

LENGTHSCALE_BOUNDS = (1e-2, 10.0)
SIGMA2_REL_BOUNDS = (1e-6, 10.0)
NUGGET_REL_BOUNDS = (1e-8, 1.0)
JITTER_FACTOR = 1e-8
JITTER_CAP_FACTOR = 1e-2
N_STARTS = 10
MAX_FEVALS_PER_START = 120


@dataclass
class KrigingModel:
    """A fitted model: training data, hyperparameters and cached factorization."""

    X: np.ndarray
    y: np.ndarray
    v: np.ndarray
    lengthscales: np.ndarray
    sigma2: float
    mu: float
    nugget: float
    jitter: float
    chol: np.ndarray
    alpha: np.ndarray
    log_likelihood: float

    @property
    def n(self) -> int:
        return len(self.y)


def _check_training_data(X, y, v):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise DomainError("X and y must have matching lengths")
    if v is not None:
        v = np.asarray(v, dtype=float).ravel()
        if v.shape != y.shape:
            raise DomainError("v must match y in length")
        if np.any(v < 0.0):
            raise DomainError("observation variances must be non-negative")
    return X, y, v


def _has_duplicate_rows(X: np.ndarray) -> bool:
    n = len(X)
    for i in range(n):
        if np.any(np.all(np.abs(X[i + 1 :] - X[i]) < 1e-12, axis=1)):
            return True
    return False


def _sq_dist_flat(X: np.ndarray) -> np.ndarray:
    # (n*n, d) per-dimension squared differences, computed once per fit
    diff = X[:, None, :] - X[None, :, :]
    return (diff**2).reshape(-1, X.shape[1])


def _correlation_from_flat(D2: np.ndarray, n: int, lengthscales: np.ndarray) -> np.ndarray:
    r2 = D2 @ (1.0 / lengthscales**2)
    return np.exp(-0.5 * r2).reshape(n, n)


def correlation(X1: np.ndarray, X2: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Squared-exponential correlation matrix between two point sets."""
    Z1 = X1 / lengthscales
    Z2 = X2 / lengthscales
    r2 = (
        np.sum(Z1**2, axis=1)[:, None]
        + np.sum(Z2**2, axis=1)[None, :]
        - 2.0 * Z1 @ Z2.T
    )
    return np.exp(-0.5 * np.maximum(r2, 0.0))


def _loglik_from_factor(L: np.ndarray, y: np.ndarray, mu: float) -> float:
    resid = y - mu
    alpha = cho_solve((L, True), resid, check_finite=False)
    return float(
        -0.5 * resid @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * len(y) * np.log(2.0 * np.pi)
    )


def _profiled_mu_from_factor(L: np.ndarray, y: np.ndarray) -> float:
    ones = np.ones_like(y)
    solved = cho_solve((L, True), np.column_stack([y, ones]), check_finite=False)
    return float(ones @ solved[:, 0] / (ones @ solved[:, 1]))


def log_marginal_likelihood(
    X,
    y,
    v,
    lengthscales,
    sigma2: float,
    mu: float,
    nugget: float = 0.0,
    jitter_factor: float = JITTER_FACTOR,
) -> float:
    """Exact Gaussian log marginal likelihood of the given hyperparameters."""
    X, y, v = _check_training_data(X, y, v)
    if v is None:
        v = np.zeros_like(y)
    lengthscales = np.asarray(lengthscales, dtype=float)
    R = correlation(X, X, lengthscales)
    K = sigma2 * R + np.diag(v) + (nugget + jitter_factor * sigma2) * np.eye(len(y))
    try:
        L = cholesky(K, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise FitError(f"covariance matrix not positive definite: {exc}") from exc
    return _loglik_from_factor(L, y, mu)


def build(
    X,
    y,
    v,
    lengthscales,
    sigma2: float,
    mu: float | None = None,
    nugget: float = 0.0,
    initial_jitter_factor: float = JITTER_FACTOR,
) -> KrigingModel:
    """Assemble a model from fixed hyperparameters, escalating jitter if needed.

    ``mu=None`` profiles the constant trend by generalized least squares.
    """
    X, y, v = _check_training_data(X, y, v)
    if v is None:
        v = np.zeros_like(y)
    lengthscales = np.asarray(lengthscales, dtype=float)
    R = correlation(X, X, lengthscales)
    base = sigma2 * R + np.diag(v) + nugget * np.eye(len(y))
    jitter_factor = initial_jitter_factor
    while True:
        K = base + jitter_factor * sigma2 * np.eye(len(y))
        try:
            L = cholesky(K, lower=True, check_finite=False)
            trend = _profiled_mu_from_factor(L, y) if mu is None else mu
            alpha = cho_solve((L, True), y - trend, check_finite=False)
            loglik = _loglik_from_factor(L, y, trend)
            return KrigingModel(
                X=X,
                y=y,
                v=v,
                lengthscales=lengthscales,
                sigma2=float(sigma2),
                mu=float(trend),
                nugget=float(nugget),
                jitter=float(jitter_factor * sigma2),
                chol=L,
                alpha=alpha,
                log_likelihood=loglik,
            )
        except LinAlgError:
            jitter_factor *= 10.0
            if jitter_factor > JITTER_CAP_FACTOR:
                raise FitError(
                    "covariance matrix stayed indefinite up to jitter "
                    f"{JITTER_CAP_FACTOR:g} * sigma2; conditioning failure"
                ) from None


def fit(
    X,
    y,
    v,
    seed: int = 0,
    n_starts: int | None = None,
    max_fevals: int | None = None,
    warm_start: tuple | None = None,
    initial_jitter_factor: float = JITTER_FACTOR,
) -> KrigingModel:
    """Maximize the log marginal likelihood over the documented search box.

    Derivative-free (Nelder-Mead) multistart in log space; deterministic for
    a given seed. ``v=None`` switches to homoscedastic mode with a fitted
    nugget. ``warm_start`` optionally seeds one start with
    (lengthscales, sigma2, nugget) from a previous fit.
    """
    X, y, v = _check_training_data(X, y, v)
    if n_starts is None:
        n_starts = N_STARTS
    if max_fevals is None:
        max_fevals = MAX_FEVALS_PER_START
    if len(y) < 2:
        raise DomainError("need at least two training points")
    if _has_duplicate_rows(X):
        raise DomainError("duplicate training inputs; pool replications upstream")

    fit_nugget = v is None
    v_arr = np.zeros_like(y) if fit_nugget else v
    d = X.shape[1]
    y_scale = float(np.var(y))
    if y_scale <= 0.0:
        y_scale = 1.0

    n = len(y)
    D2 = _sq_dist_flat(X)
    diag_idx = np.arange(n)
    log2pi_term = 0.5 * n * np.log(2.0 * np.pi)
    ones = np.ones(n)
    rhs = np.column_stack([y, ones])

    def unpack(theta):
        ell = np.exp(theta[:d])
        sigma2 = np.exp(theta[d])
        nugget = np.exp(theta[d + 1]) * y_scale if fit_nugget else 0.0
        return ell, sigma2, nugget

    def negative_loglik(theta):
        ell, sigma2, nugget = unpack(theta)
        K = sigma2 * _correlation_from_flat(D2, n, ell)
        K[diag_idx, diag_idx] += v_arr + nugget + initial_jitter_factor * sigma2
        try:
            L = cholesky(K, lower=True, check_finite=False)
        except LinAlgError:
            return np.inf
        solved = cho_solve((L, True), rhs, check_finite=False)
        # trend profiled out by generalized least squares
        mu = (ones @ solved[:, 0]) / (ones @ solved[:, 1])
        quad = y @ solved[:, 0] - 2.0 * mu * (ones @ solved[:, 0]) + mu**2 * (
            ones @ solved[:, 1]
        )
        return 0.5 * quad + np.sum(np.log(np.diag(L))) + log2pi_term

    lo = [np.log(LENGTHSCALE_BOUNDS[0])] * d + [np.log(SIGMA2_REL_BOUNDS[0] * y_scale)]
    hi = [np.log(LENGTHSCALE_BOUNDS[1])] * d + [np.log(SIGMA2_REL_BOUNDS[1] * y_scale)]
    if fit_nugget:
        lo.append(np.log(NUGGET_REL_BOUNDS[0]))
        hi.append(np.log(NUGGET_REL_BOUNDS[1]))
    lo = np.array(lo)
    hi = np.array(hi)
    bounds = list(zip(lo, hi))

    rng = np.random.default_rng(seed)
    starts = [np.clip(_default_start(d, y_scale, fit_nugget), lo, hi)]
    for _ in range(n_starts - 1):
        starts.append(rng.uniform(lo, hi))
    if warm_start is not None and n_starts >= 2:
        ell0, sigma20, nugget0 = warm_start
        theta0 = list(np.log(ell0)) + [np.log(sigma20)]
        if fit_nugget:
            theta0.append(np.log(max(nugget0, NUGGET_REL_BOUNDS[0] * y_scale) / y_scale))
        starts[1] = np.clip(np.array(theta0), lo, hi)

    best_theta = None
    best_value = np.inf
    # matrices this small run faster on one BLAS thread
    with threadpool_limits(limits=1, user_api="blas"):
        for theta0 in starts:
            result = minimize(
                negative_loglik,
                theta0,
                method="Nelder-Mead",
                bounds=bounds,
                options={"maxfev": max_fevals, "xatol": 1e-3, "fatol": 1e-4},
            )
            if result.fun < best_value:
                best_value = result.fun
                best_theta = result.x
    if best_theta is None or not np.isfinite(best_value):
        raise FitError("likelihood search failed from every start")

    ell, sigma2, nugget = unpack(best_theta)
    return build(
        X,
        y,
        v_arr,
        lengthscales=ell,
        sigma2=sigma2,
        mu=None,
        nugget=nugget,
        initial_jitter_factor=initial_jitter_factor,
    )


def _default_start(d: int, y_scale: float, fit_nugget: bool) -> np.ndarray:
    theta = [np.log(0.5)] * d + [np.log(y_scale)]
    if fit_nugget:
        theta.append(np.log(1e-2))
    return np.array(theta)


def predict(model: KrigingModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and noise-free variance at query points.

    ``x`` may be a single d-vector or an (m, d) array; returns matching
    scalars or length-m arrays. Variance is clamped at zero.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    Xq = np.atleast_2d(x)
    k = model.sigma2 * correlation(Xq, model.X, model.lengthscales)
    mean = model.mu + k @ model.alpha
    w = solve_triangular(model.chol, k.T, lower=True, check_finite=False)
    var = np.maximum(model.sigma2 - np.sum(w**2, axis=0), 0.0)
    if single:
        return float(mean[0]), float(var[0])
    return mean, var
