"""Clustered dataset container consumed by every fitting and validation routine."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

FAMILIES = ("gaussian", "binomial")


@dataclass(frozen=True)
class Dataset:
    """Design-matrix pool, response, and cluster labels for one problem.

    ``X`` holds every candidate column, one of which may be an all-ones
    intercept (conventionally column 0, see :meth:`with_intercept`). Models
    are fitted on subsets of these columns; the intercept column, when
    present, is included in every model.

    Arrays are stored read-only so a dataset can be shared freely across
    concurrent fits.
    """

    X: np.ndarray
    y: np.ndarray
    cluster_id: np.ndarray
    family: str
    intercept_col: int | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        cluster = np.asarray(self.cluster_id).ravel()
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        n, p = X.shape
        if n < 1 or p < 1:
            raise ValueError("need at least one row and one column")
        if y.shape[0] != n or cluster.shape[0] != n:
            raise ValueError("X, y and cluster_id must have matching length")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "binomial" and not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("binomial response must contain only 0 and 1")
        if self.intercept_col is not None:
            c = self.intercept_col
            if not 0 <= c < p:
                raise ValueError("intercept_col out of range")
            if not np.all(X[:, c] == 1.0):
                raise ValueError("intercept column must be all ones")
        if self.names is not None and len(self.names) != p:
            raise ValueError("names must match the number of columns")
        for arr in (X, y):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "cluster_id", cluster)

    @classmethod
    def with_intercept(cls, X, y, cluster_id, family, names=None) -> "Dataset":
        """Prepend an all-ones column and mark it as the intercept."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.size == 0:
            X = X.reshape(len(np.asarray(y).ravel()), 0)
        pool = np.column_stack([np.ones(X.shape[0]), X]) if X.shape[1] else np.ones((X.shape[0], 1))
        if names is not None:
            names = ("(intercept)",) + tuple(names)
        return cls(pool, y, cluster_id, family, intercept_col=0, names=names)

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    @property
    def n_cols(self) -> int:
        return self.X.shape[1]

    @cached_property
    def _cluster_index(self):
        labels, inverse = np.unique(self.cluster_id, return_inverse=True)
        return labels, inverse

    @property
    def cluster_labels(self) -> np.ndarray:
        """Distinct cluster labels in sorted order."""
        return self._cluster_index[0]

    @property
    def cluster_inverse(self) -> np.ndarray:
        """Row -> position of its cluster within :attr:`cluster_labels`."""
        return self._cluster_index[1]

    @property
    def n_clusters(self) -> int:
        return self.cluster_labels.shape[0]

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.cluster_inverse, minlength=self.n_clusters)

    def predictor_columns(self) -> tuple[int, ...]:
        """All pool columns except the intercept."""
        return tuple(c for c in range(self.n_cols) if c != self.intercept_col)

    def model_columns(self, columns=None) -> tuple[int, ...]:
        """Resolve a predictor subset to pool indices, intercept first.

        ``columns`` lists predictor columns by pool index, in the order the
        model matrix should carry them; ``None`` means all predictors. The
        intercept column must not be listed: it is always included when the
        pool has one.
        """
        if columns is None:
            columns = self.predictor_columns()
        cols = [int(c) for c in columns]
        seen = set()
        for c in cols:
            if not 0 <= c < self.n_cols:
                raise ValueError(f"column {c} out of range")
            if c == self.intercept_col:
                raise ValueError("the intercept column is implicit; do not list it")
            if c in seen:
                raise ValueError(f"column {c} listed twice")
            seen.add(c)
        head = [self.intercept_col] if self.intercept_col is not None else []
        return tuple(head + cols)

    def model_matrix(self, columns=None) -> np.ndarray:
        return self.X[:, self.model_columns(columns)]

    def column_names(self, cols) -> tuple[str, ...]:
        if self.names is not None:
            return tuple(self.names[c] for c in cols)
        return tuple(f"x{c}" for c in cols)

    def subset(self, row_mask) -> "Dataset":
        """Dataset restricted to the rows selected by a boolean mask."""
        row_mask = np.asarray(row_mask, dtype=bool)
        return Dataset(
            self.X[row_mask],
            self.y[row_mask],
            self.cluster_id[row_mask],
            self.family,
            intercept_col=self.intercept_col,
            names=self.names,
        )
