"""CSV ingestion and serialization for clustered datasets.

Files are UTF-8 with a header row. The cluster column is read as opaque
labels; the response and every predictor cell must parse as a number, and
anything else is a :class:`SchemaError` rather than a silent coercion.
"""

from __future__ import annotations

import csv

import numpy as np

from .data import Dataset
from .errors import SchemaError


def read_dataset(path, family: str, response: str, cluster: str, predictors=None) -> Dataset:
    """Load a clustered dataset from CSV.

    ``predictors`` names the columns to use, in order; ``None`` takes every
    column other than the response and the cluster label. An intercept
    column is prepended automatically.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        rows = list(reader)
    index = {name: j for j, name in enumerate(header)}
    for required in (response, cluster):
        if required not in index:
            raise SchemaError(f"{path}: column {required!r} not found in header {header}")
    if predictors is None:
        predictors = [c for c in header if c not in (response, cluster)]
    missing = [c for c in predictors if c not in index]
    if missing:
        raise SchemaError(f"{path}: predictor columns not found: {missing}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    def parse(cell: str, row_no: int, col: str) -> float:
        try:
            return float(cell)
        except ValueError:
            raise SchemaError(
                f"{path}: row {row_no}, column {col!r}: non-numeric value {cell!r}"
            ) from None

    n = len(rows)
    y = np.empty(n)
    X = np.empty((n, len(predictors)))
    labels = []
    width = len(header)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise SchemaError(f"{path}: row {i + 2} has {len(row)} cells, header has {width}")
        y[i] = parse(row[index[response]], i + 2, response)
        labels.append(row[index[cluster]])
        for j, col in enumerate(predictors):
            X[i, j] = parse(row[index[col]], i + 2, col)
    if family == "binomial" and not np.all((y == 0.0) | (y == 1.0)):
        raise SchemaError(f"{path}: binomial response {response!r} must contain only 0 and 1")
    try:
        return Dataset.with_intercept(X, y, np.array(labels), family, names=tuple(predictors))
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def write_dataset(path, data: Dataset, response: str = "y", cluster: str = "cluster") -> None:
    """Serialize a dataset to the CSV schema :func:`read_dataset` ingests.

    The intercept column is not written; floats use ``repr`` so a round
    trip reproduces them bit for bit.
    """
    cols = [c for c in range(data.n_cols) if c != data.intercept_col]
    names = data.column_names(cols)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([cluster, response, *names])
        for i in range(data.n_obs):
            label = data.cluster_id[i]
            label = label.item() if hasattr(label, "item") else label
            writer.writerow([label, repr(float(data.y[i])), *(repr(float(v)) for v in data.X[i, cols])])
