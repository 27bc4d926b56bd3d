"""Cluster-based cross-validated deviance: the ground truth criteria chase.

Folds are formed from whole clusters, never from rows, so no observation
ever sits on both sides of a split. Leave-one-cluster-out holds out each
cluster once; K-fold deals shuffled clusters round-robin into K folds.
A failed fold (rank-deficient training complement, diverging IRLS) is
recorded and invalidates the whole result; it is never silently dropped.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .criteria import criterion_se  # noqa: F401  (re-exported: SE of fold totals)
from .data import Dataset
from .errors import KTooLargeError, NiccError
from .glm import _fit_core, _heldout_rows

__all__ = [
    "CvResult",
    "loo_cluster_deviance",
    "kfold_cluster_deviance",
    "criterion_se",
]


@dataclass(frozen=True)
class CvResult:
    """Total and per-fold out-of-cluster deviance.

    ``total_deviance`` sums the successful folds; ``ok`` is False as soon
    as any fold failed, in which case the total must not be trusted.
    """

    total_deviance: float
    per_fold_deviance: np.ndarray
    fold_assignment: dict
    n_failed_folds: int
    fold_errors: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.n_failed_folds == 0

    @property
    def n_folds(self) -> int:
        return self.per_fold_deviance.shape[0]


def _run_folds(data: Dataset, columns, fold_of_cluster: np.ndarray, n_folds: int, parallelism: int):
    cols = data.model_columns(columns)
    A = data.X[:, cols]
    y = data.y
    family = data.family
    fold_of_row = fold_of_cluster[data.cluster_inverse]

    # Warm-starting IRLS from the full-data optimum does not change any
    # fold's optimum, it just reaches it in fewer Newton steps.
    warm = None
    if family == "binomial":
        try:
            warm = _fit_core(family, A, y).theta
        except NiccError:
            warm = None

    def one_fold(f: int):
        test = fold_of_row == f
        train = ~test
        try:
            core = _fit_core(family, A[train], y[train], theta0=warm)
        except NiccError as exc:
            return np.nan, f"fold {f}: {exc}"
        rows = _heldout_rows(family, y[test], A[test] @ core.theta, core.dispersion)
        return -2.0 * float(np.sum(rows)), None

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(one_fold, range(n_folds)))
    else:
        outcomes = [one_fold(f) for f in range(n_folds)]

    per_fold = np.array([d for d, _ in outcomes])
    errors = tuple(msg for _, msg in outcomes if msg is not None)
    good = ~np.isnan(per_fold)
    return per_fold, float(np.sum(per_fold[good])), errors


def loo_cluster_deviance(data: Dataset, columns=None, parallelism: int = 1) -> CvResult:
    """Leave-one-cluster-out deviance: M folds, one per cluster.

    Fold j trains on every cluster but j and scores cluster j's held-out
    log-likelihood; its deviance is ``-2`` times that sum. Folds follow the
    sorted cluster-label order.
    """
    labels = data.cluster_labels
    m = labels.shape[0]
    fold_of_cluster = np.arange(m)
    per_fold, total, errors = _run_folds(data, columns, fold_of_cluster, m, parallelism)
    return CvResult(
        total_deviance=total,
        per_fold_deviance=per_fold,
        fold_assignment={labels[j].item() if hasattr(labels[j], "item") else labels[j]: j for j in range(m)},
        n_failed_folds=len(errors),
        fold_errors=errors,
    )


def kfold_cluster_deviance(data: Dataset, columns=None, k: int = 10, seed: int = 0,
                           parallelism: int = 1) -> CvResult:
    """Cluster-based K-fold deviance with a seeded, reproducible fold deal.

    Clusters are shuffled by the seeded generator and dealt round-robin
    into ``k`` folds, balancing cluster counts. With ``k`` equal to the
    number of clusters this reproduces leave-one-cluster-out fold by fold.
    """
    labels = data.cluster_labels
    m = labels.shape[0]
    if k > m:
        raise KTooLargeError(f"k={k} folds but only {m} clusters")
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = np.random.default_rng(seed)
    order = rng.permutation(m)
    fold_of_cluster = np.empty(m, dtype=int)
    fold_of_cluster[order] = np.arange(m) % k
    per_fold, total, errors = _run_folds(data, columns, fold_of_cluster, k, parallelism)
    return CvResult(
        total_deviance=total,
        per_fold_deviance=per_fold,
        fold_assignment={labels[j].item() if hasattr(labels[j], "item") else labels[j]: int(fold_of_cluster[j]) for j in range(m)},
        n_failed_folds=len(errors),
        fold_errors=errors,
    )
