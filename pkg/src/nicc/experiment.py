"""Simulation-study harness: run design cells, emit flat CSV records.

Each (cell, iteration) unit generates its dataset from a derived seed and
produces one record per criterion plus a cross-validated baseline record.
Approximation cells compare criterion values against leave-one-cluster-out
deviance on the full model; selection cells run forward paths over the
polynomially expanded candidate set and compare chosen model sizes and
variable sets against the path driven by looDeviance itself.

Units are independent, so they can run in a worker pool; records are
always reduced in design order, which makes the output identical at any
parallelism level. Wall-clock timings go to a separate sidecar table so
the main CSV stays byte-reproducible.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .criteria import aic, bic, nic, nicc
from .crossval import loo_cluster_deviance
from .errors import NiccError
from .glm import fit_glm
from .selection import forward_path, jaccard_index, select_1se, select_min
from .simulation import DesignPoint, generate, polynomial_candidates

IC_NAMES = ("aic", "bic", "nic", "nicc")

RECORD_COLUMNS = (
    "family", "cluster_size", "n_predictors", "re_sd_ratio", "ar1_level",
    "iteration", "seed", "criterion", "value", "loo_deviance",
    "approximation_error", "size_min", "size_1se", "jaccard_vs_loo", "error",
)


@dataclass(frozen=True)
class ExperimentRecord:
    family: str
    cluster_size: int
    n_predictors: int
    re_sd_ratio: float
    ar1_level: float
    iteration: int
    seed: int
    criterion: str
    value: float | None = None
    loo_deviance: float | None = None
    approximation_error: float | None = None
    size_min: int | None = None
    size_1se: int | None = None
    jaccard_vs_loo: float | None = None
    error: str = ""

    def row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [fmt(getattr(self, c)) for c in RECORD_COLUMNS]


def _base_fields(point: DesignPoint) -> dict:
    cfg = point.config
    return dict(
        family=cfg.family,
        cluster_size=cfg.cluster_size,
        n_predictors=cfg.n_predictors,
        re_sd_ratio=cfg.re_sd_ratio,
        ar1_level=cfg.ar1_level,
        iteration=point.iteration,
        seed=cfg.seed,
    )


def _approx_records(point: DesignPoint) -> list[ExperimentRecord]:
    base = _base_fields(point)
    data, _ = generate(point.config)
    fit = fit_glm(data)
    loo = loo_cluster_deviance(data)
    if not loo.ok:
        raise NiccError(f"{loo.n_failed_folds} folds failed: {loo.fold_errors[0]}")
    loo_total = loo.total_deviance
    values = {
        "aic": aic(fit).value,
        "bic": bic(fit).value,
        "nic": nic(fit).value,
        "nicc": nicc(fit).value,
        "loodev": loo_total,
    }
    return [
        ExperimentRecord(
            **base,
            criterion=name,
            value=value,
            loo_deviance=loo_total,
            approximation_error=value - loo_total,
        )
        for name, value in values.items()
    ]


def _selection_records(point: DesignPoint) -> list[ExperimentRecord]:
    base = _base_fields(point)
    data, truth = generate(point.config)
    expanded = polynomial_candidates(data, truth)

    loo_path = forward_path(expanded, "loodev")
    loo_min = select_min(loo_path)
    loo_1se = select_1se(loo_path)
    records = [
        ExperimentRecord(
            **base,
            criterion="loodev",
            value=loo_min.value,
            loo_deviance=loo_min.value,
            approximation_error=0.0,
            size_min=loo_min.size,
            size_1se=loo_1se.size,
            jaccard_vs_loo=1.0,
        )
    ]
    for name in IC_NAMES:
        path = forward_path(expanded, name)
        chosen = select_min(path)
        one_se = select_1se(path)
        records.append(
            ExperimentRecord(
                **base,
                criterion=name,
                value=chosen.value,
                loo_deviance=loo_min.value,
                approximation_error=chosen.value - loo_min.value,
                size_min=chosen.size,
                size_1se=one_se.size,
                jaccard_vs_loo=jaccard_index(chosen.variable_set, loo_min.variable_set),
            )
        )
    return records


def run_point(point: DesignPoint) -> tuple[list[ExperimentRecord], float]:
    """Run one (cell, iteration) unit; failures become flagged records."""
    start = time.perf_counter()
    try:
        if point.mode == "selection":
            records = _selection_records(point)
        else:
            records = _approx_records(point)
    except NiccError as exc:
        records = [
            ExperimentRecord(
                **_base_fields(point),
                criterion="failed",
                error=f"{type(exc).__name__}: {exc}",
            )
        ]
    return records, time.perf_counter() - start


def run_design(points, parallelism: int = 1):
    """Run every design point; returns (records, timings) in design order."""
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(run_point, points))
    else:
        outcomes = [run_point(p) for p in points]
    records = [rec for recs, _ in outcomes for rec in recs]
    timings = [
        (point.cell, point.iteration, elapsed)
        for point, (_, elapsed) in zip(points, outcomes)
    ]
    return records, timings


def write_records_csv(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for rec in records:
            writer.writerow(rec.row())


def write_timings_csv(path, timings) -> None:
    # Kept out of the main table: wall times change run to run, the results
    # must not.
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cell", "iteration", "seconds"])
        for cell, iteration, seconds in timings:
            writer.writerow([cell, iteration, f"{seconds:.3f}"])
