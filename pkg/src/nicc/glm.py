"""Maximum-likelihood linear and logistic regression.

Fits carry everything the criteria need: per-observation log-likelihoods,
per-observation score rows, and the observed information (negated Hessian
of the total log-likelihood at the MLE). For the gaussian family the
dispersion is profiled out (sigma2 = RSS/N, the MLE) and scores/information
are taken with respect to the mean coefficients only, with sigma2 plugged
in, so every criterion shares one parameter count across families.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    EmptyDataError,
    RankDeficientError,
)

LOG_2PI = float(np.log(2.0 * np.pi))

# Gaussian dispersion floor: keeps a perfect (noiseless) fit finite so the
# selection loop can still rank it instead of dividing by zero.
MIN_DISPERSION = 1e-12

# Held-out probabilities are clamped to [PROB_CLAMP, 1 - PROB_CLAMP] before
# logging so one separated cluster cannot make a CV deviance infinite.
PROB_CLAMP = 1e-12

IRLS_MAX_ITER = 25
IRLS_TOL = 1e-8
# |linear predictor| beyond this marks quasi-separation when it persists.
ETA_SEPARATION = 30.0
# Gradient polish target; IRLS keeps stepping (within the cap) until the
# score equations hold this tightly even after the deviance has settled.
GRAD_TOL = 1e-7


@dataclass(frozen=True)
class GlmFit:
    """Immutable MLE fit; safe to share across threads."""

    family: str
    columns: tuple[int, ...]          # dataset pool columns, model-matrix order
    theta_hat: np.ndarray             # (p,) coefficients
    loglik: float                     # total log-likelihood at the MLE
    loglik_per_obs: np.ndarray        # (N,)
    scores: np.ndarray                # (N, p) per-observation gradient rows
    hessian: np.ndarray               # (p, p) negated second derivative, PSD
    dispersion: float                 # gaussian sigma2 (MLE); 1.0 for binomial
    converged: bool
    iterations: int
    cluster_id: np.ndarray            # labels of the training rows
    deviance_trace: tuple[float, ...] = ()
    names: tuple[str, ...] | None = None

    @property
    def n_params(self) -> int:
        return self.theta_hat.shape[0]

    @property
    def n_obs(self) -> int:
        return self.loglik_per_obs.shape[0]


def _sigmoid(eta):
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _bernoulli_loglik_per_obs(y, eta):
    # y*log(p) + (1-y)*log(1-p), evaluated stably from the linear predictor
    return y * eta - np.logaddexp(0.0, eta)


def _gaussian_loglik_per_obs(y, mu, sigma2):
    return -0.5 * (LOG_2PI + np.log(sigma2) + (y - mu) ** 2 / sigma2)


class _FitCore:
    """Array-level fit result, shared by fit_glm and the CV fast path."""

    __slots__ = ("theta", "mu", "eta", "dispersion", "converged", "iterations", "deviance_trace")

    def __init__(self, theta, mu, eta, dispersion, converged, iterations, deviance_trace):
        self.theta = theta
        self.mu = mu
        self.eta = eta
        self.dispersion = dispersion
        self.converged = converged
        self.iterations = iterations
        self.deviance_trace = deviance_trace


def _fit_gaussian(A, y):
    theta, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < A.shape[1]:
        raise RankDeficientError(f"model matrix rank {rank} < {A.shape[1]} columns")
    mu = A @ theta
    rss = float(np.dot(y - mu, y - mu))
    sigma2 = max(rss / A.shape[0], MIN_DISPERSION)
    return _FitCore(theta, mu, mu, sigma2, True, 1, ())


def _fit_binomial(A, y, theta0, max_iter, tol):
    n, p = A.shape
    theta = np.zeros(p) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if theta.shape != (p,):
        raise DimensionMismatchError("theta0 has the wrong length")
    eta = A @ theta
    mu = _sigmoid(eta)
    dev = -2.0 * float(np.sum(_bernoulli_loglik_per_obs(y, eta)))
    trace = [dev]
    eta_max_hist = [float(np.max(np.abs(eta)))]
    theta_norm_hist = [float(np.linalg.norm(theta))]
    tol_met = False

    it = 0
    while it < max_iter:
        grad = A.T @ (y - mu)
        if tol_met and float(np.max(np.abs(grad))) < GRAD_TOL:
            break
        it += 1
        w = mu * (1.0 - mu)
        H = (A * w[:, None]).T @ A
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            if np.linalg.matrix_rank(A) < p:
                raise RankDeficientError("model matrix columns are collinear") from None
            raise ConvergenceError("weighted information is singular (all weights degenerate)") from None

        # Step-halve until the deviance stops increasing; keeps the
        # deviance trace monotone even when a full Newton step overshoots.
        eta_step = A @ step
        new_dev = np.inf
        for half in range(31):
            scale = 0.5 ** half
            cand_eta = eta + scale * eta_step
            cand_dev = -2.0 * float(np.sum(_bernoulli_loglik_per_obs(y, cand_eta)))
            if np.isfinite(cand_dev) and cand_dev <= dev + 1e-12 * (abs(dev) + 1.0):
                theta = theta + scale * step
                eta = cand_eta
                new_dev = cand_dev
                break
        else:
            # No direction of improvement: already at the optimum resolution.
            tol_met = True
            break
        mu = _sigmoid(eta)
        rel_change = abs(dev - new_dev) / (abs(dev) + 0.1)
        dev = new_dev
        trace.append(dev)
        eta_max_hist.append(float(np.max(np.abs(eta))))
        theta_norm_hist.append(float(np.linalg.norm(theta)))
        if rel_change < tol:
            tol_met = True

    separated = len(eta_max_hist) >= 2 and all(m > ETA_SEPARATION for m in eta_max_hist[-2:])
    if not tol_met:
        growing = len(theta_norm_hist) >= 4 and all(
            theta_norm_hist[-k] > theta_norm_hist[-k - 1] for k in (1, 2, 3)
        )
        if separated and growing:
            raise ConvergenceError(
                f"IRLS cap hit with diverging coefficients (max |eta| = {eta_max_hist[-1]:.1f})"
            )
    converged = tol_met and not separated
    return _FitCore(theta, mu, eta, 1.0, converged, it, tuple(trace))


def _fit_core(family, A, y, theta0=None, max_iter=IRLS_MAX_ITER, tol=IRLS_TOL):
    n, p = A.shape
    if n == 0:
        raise EmptyDataError("no observations")
    if n <= p:
        raise EmptyDataError(f"{n} observations cannot identify {p} parameters")
    if family == "gaussian":
        return _fit_gaussian(A, y)
    return _fit_binomial(A, y, theta0, max_iter, tol)


def _loglik_rows(family, y, eta, dispersion):
    # gaussian uses the identity link, so eta is the mean
    if family == "gaussian":
        return _gaussian_loglik_per_obs(y, eta, dispersion)
    return _bernoulli_loglik_per_obs(y, eta)


def _score_rows(family, A, y, core):
    if family == "gaussian":
        return A * ((y - core.mu) / core.dispersion)[:, None]
    return A * (y - core.mu)[:, None]


def _information(family, A, core):
    if family == "gaussian":
        return A.T @ A / core.dispersion
    w = core.mu * (1.0 - core.mu)
    return (A * w[:, None]).T @ A


def fit_glm(
    data: Dataset,
    columns=None,
    *,
    theta0=None,
    max_iter: int = IRLS_MAX_ITER,
    tol: float = IRLS_TOL,
) -> GlmFit:
    """Fit the requested predictor subset by maximum likelihood.

    ``columns`` selects predictor columns from the dataset pool (the
    intercept column, when the pool has one, is always included). Gaussian
    fits are closed-form least squares; binomial fits run Newton/IRLS with
    step halving until the relative deviance change drops below ``tol``
    (default 1e-8) or ``max_iter`` (default 25) iterations.

    ``theta0`` optionally warm-starts the binomial iteration; it does not
    change the optimum, only how fast the iteration gets there.
    """
    cols = data.model_columns(columns)
    A = data.X[:, cols]
    core = _fit_core(data.family, A, data.y, theta0=theta0, max_iter=max_iter, tol=tol)
    ll_rows = _loglik_rows(data.family, data.y, core.eta, core.dispersion)
    return GlmFit(
        family=data.family,
        columns=cols,
        theta_hat=core.theta,
        loglik=float(np.sum(ll_rows)),
        loglik_per_obs=ll_rows,
        scores=_score_rows(data.family, A, data.y, core),
        hessian=_information(data.family, A, core),
        dispersion=core.dispersion,
        converged=core.converged,
        iterations=core.iterations,
        cluster_id=np.asarray(data.cluster_id).copy(),
        deviance_trace=core.deviance_trace,
        names=data.column_names(cols) if data.names is not None else None,
    )


def _aligned_matrix(fit: GlmFit, data: Dataset) -> np.ndarray:
    if max(fit.columns) >= data.n_cols:
        raise DimensionMismatchError(
            f"fit uses column {max(fit.columns)}, data pool has {data.n_cols} columns"
        )
    if data.family != fit.family:
        raise DimensionMismatchError(f"fit family {fit.family!r} != data family {data.family!r}")
    return data.X[:, fit.columns]


def score_matrix(fit: GlmFit, data: Dataset) -> np.ndarray:
    """Per-observation gradient rows of the log-likelihood at ``fit.theta_hat``.

    Row i is ``(y_i - mu_i) * x_i / sigma2`` for gaussian and
    ``(y_i - p_i) * x_i`` for binomial.
    """
    A = _aligned_matrix(fit, data)
    if A.shape[0] != data.y.shape[0]:
        raise DimensionMismatchError("rows of X and y disagree")
    eta = A @ fit.theta_hat
    if fit.family == "gaussian":
        return A * ((data.y - eta) / fit.dispersion)[:, None]
    return A * (data.y - _sigmoid(eta))[:, None]


def observed_information(fit: GlmFit, data: Dataset) -> np.ndarray:
    """Negated Hessian of the total log-likelihood at ``fit.theta_hat``.

    Positive semi-definite by construction: ``X'X / sigma2`` for gaussian,
    ``sum_i p_i (1 - p_i) x_i x_i'`` for binomial.
    """
    A = _aligned_matrix(fit, data)
    if fit.family == "gaussian":
        return A.T @ A / fit.dispersion
    mu = _sigmoid(A @ fit.theta_hat)
    w = mu * (1.0 - mu)
    return (A * w[:, None]).T @ A


def _heldout_rows(family, y, eta, dispersion):
    # Shared by predict_loglik and the cross-validation fast path so both
    # apply the identical probability clamp.
    if family == "gaussian":
        return _gaussian_loglik_per_obs(y, eta, dispersion)
    p = np.clip(_sigmoid(eta), PROB_CLAMP, 1.0 - PROB_CLAMP)
    return y * np.log(p) + (1.0 - y) * np.log1p(-p)


def predict_loglik(fit: GlmFit, newdata: Dataset) -> np.ndarray:
    """Per-observation log-likelihood of new data under the trained fit.

    Binomial probabilities are clamped to ``[1e-12, 1 - 1e-12]`` before
    logging; gaussian densities use the training dispersion.
    """
    A = _aligned_matrix(fit, newdata)
    return _heldout_rows(fit.family, newdata.y, A @ fit.theta_hat, fit.dispersion)
