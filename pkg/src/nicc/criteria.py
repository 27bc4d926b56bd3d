"""Information criteria on the deviance scale: AIC, BIC, NIC, and NICc.

All four share the form ``-2 * loglik + penalty``. AIC/BIC penalize by a
parameter count; NIC penalizes by ``2 * trace(J^-1 K)`` where ``J`` is the
observed information and ``K`` the outer-product (empirical Fisher)
estimator built from per-observation score rows. NICc replaces ``K`` with
its cluster-aggregated variant: score rows are summed within each cluster
before the outer product, the same adjustment the clustered Huber sandwich
covariance uses. Correlated observations push the within-cluster score sums
in a common direction, so the clustered penalty grows with cluster size and
correlation while the unclustered one does not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    LabelMismatchError,
    SingularInformationError,
    TooFewFoldsError,
    UnconvergedFitError,
)
from .glm import GlmFit

# Relative pivot tolerance below which the information matrix is treated as
# singular rather than silently pseudo-inverted.
PIVOT_TOL = 1e-10

CRITERION_NAMES = ("aic", "bic", "nic", "nicc", "loodev", "cvdev")


@dataclass(frozen=True)
class CriterionValue:
    """A scalar criterion plus its per-cluster contributions.

    ``value = -2 * loglik + penalty`` and equals the sum of
    ``per_cluster_contrib`` (cluster j receives its own deviance plus a
    ``N_j / N`` share of the penalty, which is what the 1-SE rule needs).
    For cross-validation criteria the contributions are per fold.
    """

    name: str
    value: float
    penalty: float
    per_cluster_contrib: np.ndarray
    cluster_labels: np.ndarray

    @property
    def se(self) -> float | None:
        """Standard error of the total under independent contributions."""
        if self.per_cluster_contrib.shape[0] < 2:
            return None
        return criterion_se(self.per_cluster_contrib)


def criterion_se(values) -> float:
    """Standard error of a summed criterion from its K fold contributions.

    Returns ``sqrt(K)`` times the sample standard deviation, the SE of the
    sum of K independent contributions.
    """
    values = np.asarray(values, dtype=float).ravel()
    k = values.shape[0]
    if k < 2:
        raise TooFewFoldsError(f"need at least 2 contributions, got {k}")
    return float(np.sqrt(k) * np.std(values, ddof=1))


def _cluster_layout(fit: GlmFit, cluster_id=None):
    labels_src = fit.cluster_id if cluster_id is None else np.asarray(cluster_id).ravel()
    if labels_src.shape[0] != fit.n_obs:
        raise LabelMismatchError(
            f"{labels_src.shape[0]} cluster labels for {fit.n_obs} observations"
        )
    labels, inverse = np.unique(labels_src, return_inverse=True)
    return labels, inverse


def _assemble(name, fit, penalty, cluster_id=None) -> CriterionValue:
    labels, inverse = _cluster_layout(fit, cluster_id)
    dev_j = -2.0 * np.bincount(inverse, weights=fit.loglik_per_obs, minlength=labels.shape[0])
    sizes = np.bincount(inverse, minlength=labels.shape[0])
    contrib = dev_j + penalty * sizes / fit.n_obs
    return CriterionValue(
        name=name,
        value=-2.0 * fit.loglik + penalty,
        penalty=penalty,
        per_cluster_contrib=contrib,
        cluster_labels=labels,
    )


def _require_converged(fit: GlmFit):
    if not fit.converged:
        raise UnconvergedFitError("criterion requested for an unconverged fit")


def aic(fit: GlmFit) -> CriterionValue:
    """-2 loglik + 2p, p counting every fitted coefficient (intercept too)."""
    _require_converged(fit)
    return _assemble("aic", fit, 2.0 * fit.n_params)


def bic(fit: GlmFit, n_obs=None) -> CriterionValue:
    """-2 loglik + ln(N) p with N the total observation count, not clusters."""
    _require_converged(fit)
    n = fit.n_obs if n_obs is None else n_obs
    return _assemble("bic", fit, float(np.log(n)) * fit.n_params)


def score_covariance(fit: GlmFit) -> np.ndarray:
    """Outer-product estimator: sum over observations of G_i' G_i."""
    return fit.scores.T @ fit.scores


def clustered_score_covariance(fit: GlmFit, cluster_id=None) -> np.ndarray:
    """Cluster-aggregated outer-product estimator.

    Score rows are summed within each cluster first; the outer products of
    the M cluster sums are then added up. With singleton clusters this is
    exactly :func:`score_covariance`.
    """
    labels, inverse = _cluster_layout(fit, cluster_id)
    sums = np.zeros((labels.shape[0], fit.n_params))
    np.add.at(sums, inverse, fit.scores)
    return sums.T @ sums


def trace_solve(J: np.ndarray, K: np.ndarray) -> float:
    """trace(J^-1 K) via a Cholesky solve; never forms an explicit inverse.

    Raises :class:`SingularInformationError` when ``J`` is not positive
    definite at the relative pivot tolerance of 1e-10.
    """
    J = np.asarray(J, dtype=float)
    try:
        factor = scipy.linalg.cho_factor(J, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularInformationError(str(exc)) from None
    d = np.diag(factor[0]) ** 2
    if float(np.min(d)) <= PIVOT_TOL * float(np.max(d)):
        raise SingularInformationError("information matrix pivot below tolerance")
    return float(np.trace(scipy.linalg.cho_solve(factor, K, check_finite=False)))


def nic(fit: GlmFit) -> CriterionValue:
    """-2 loglik + 2 trace(J^-1 K) with the unclustered score covariance."""
    penalty = 2.0 * trace_solve(fit.hessian, score_covariance(fit))
    return _assemble("nic", fit, penalty)


def nicc(fit: GlmFit, cluster_id=None) -> CriterionValue:
    """-2 loglik + 2 trace(J^-1 Kc) with the clustered score covariance.

    ``cluster_id`` defaults to the labels the fit was trained with.
    """
    penalty = 2.0 * trace_solve(fit.hessian, clustered_score_covariance(fit, cluster_id))
    return _assemble("nicc", fit, penalty, cluster_id)
