"""Greedy forward stepwise selection driven by any deviance-scale criterion.

Every model keeps an intercept; step t adds whichever remaining candidate
gives the lowest criterion value on top of the current set, with ties going
to the lowest column index, and the path always runs to the full model so
the minimum and 1-SE choices can be read off afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .criteria import CRITERION_NAMES, CriterionValue, aic, bic, nic, nicc
from .crossval import kfold_cluster_deviance, loo_cluster_deviance
from .data import Dataset
from .errors import MissingSeError, NiccError
from .glm import fit_glm


@dataclass(frozen=True)
class SelectionStep:
    added: int                      # pool column added at this step
    variables: tuple[int, ...]      # current predictor set, addition order
    value: float
    se: float | None


@dataclass(frozen=True)
class SelectionPath:
    criterion_name: str
    steps: tuple[SelectionStep, ...]
    base_intercept: bool = True
    failures: tuple[tuple[int, int, str], ...] = field(default=())  # (step, column, error)

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.steps])

    def sizes(self) -> np.ndarray:
        return np.arange(1, len(self.steps) + 1)


@dataclass(frozen=True)
class ModelChoice:
    rule: str                       # "min" or "1se"
    size: int                       # number of predictors (intercept excluded)
    variable_set: tuple[int, ...]
    value: float


def _criterion_value(data: Dataset, columns, name: str, k=None, seed: int = 0,
                     parallelism: int = 1):
    """Evaluate one named criterion on one candidate column set."""
    if name in ("aic", "bic", "nic", "nicc"):
        fit = fit_glm(data, columns)
        if name == "aic":
            return aic(fit)
        if name == "bic":
            return bic(fit)
        if name == "nic":
            return nic(fit)
        return nicc(fit)
    if name == "loodev":
        cv = loo_cluster_deviance(data, columns, parallelism=parallelism)
    elif name == "cvdev":
        if k is None:
            raise ValueError("cvdev needs a fold count k")
        cv = kfold_cluster_deviance(data, columns, k=k, seed=seed, parallelism=parallelism)
    else:
        raise ValueError(f"unknown criterion {name!r}; expected one of {CRITERION_NAMES}")
    if not cv.ok:
        raise NiccError(f"{cv.n_failed_folds} cross-validation folds failed: {cv.fold_errors[0]}")
    return CriterionValue(
        name=name,
        value=cv.total_deviance,
        penalty=0.0,
        per_cluster_contrib=cv.per_fold_deviance,
        cluster_labels=np.arange(cv.n_folds),
    )


def make_criterion(name: str, k=None, seed: int = 0, parallelism: int = 1):
    """Bind a criterion name to an ``evaluator(data, columns)`` callable."""
    if name not in CRITERION_NAMES:
        raise ValueError(f"unknown criterion {name!r}; expected one of {CRITERION_NAMES}")

    def evaluator(data: Dataset, columns):
        return _criterion_value(data, columns, name, k=k, seed=seed, parallelism=parallelism)

    evaluator.criterion_name = name
    return evaluator


def forward_path(data: Dataset, criterion, candidates=None, parallelism: int = 1,
                 max_steps: int | None = None) -> SelectionPath:
    """Forward path from the intercept-only model to the full model.

    ``criterion`` is a name from ``{aic, bic, nic, nicc, loodev, cvdev}``
    or any callable ``(data, columns) -> CriterionValue``. A candidate whose
    fit fails is excluded from that step and recorded in ``failures``; the
    path keeps growing even after the criterion starts rising, because the
    minimum and 1-SE models are extracted from the completed path.
    ``max_steps`` truncates the path early when only its prefix is needed.
    """
    if isinstance(criterion, str):
        evaluator = make_criterion(criterion, parallelism=parallelism)
    else:
        evaluator = criterion
    name = getattr(evaluator, "criterion_name", "custom")

    if candidates is None:
        candidates = data.predictor_columns()
    remaining = sorted(int(c) for c in candidates)
    if not remaining:
        raise ValueError("forward_path needs at least one candidate predictor")

    current: list[int] = []
    steps: list[SelectionStep] = []
    failures: list[tuple[int, int, str]] = []
    step_no = 0
    while remaining:
        if max_steps is not None and step_no >= max_steps:
            break
        step_no += 1
        best = None
        last_error = None
        for col in remaining:  # ascending order makes the tie-break explicit
            try:
                cv = evaluator(data, current + [col])
            except NiccError as exc:
                failures.append((step_no, col, f"{type(exc).__name__}: {exc}"))
                last_error = exc
                continue
            if best is None or cv.value < best[0]:
                best = (cv.value, col, cv)
        if best is None:
            if not steps:
                raise NiccError("every candidate failed at step 1") from last_error
            # Nothing left that can be fitted (e.g. the only remaining
            # candidates are collinear with the current set): the path ends
            # here with the failures on record.
            break
        value, col, cv = best
        current.append(col)
        remaining.remove(col)
        steps.append(SelectionStep(added=col, variables=tuple(current), value=value, se=cv.se))
    return SelectionPath(criterion_name=name, steps=tuple(steps), failures=tuple(failures))


def select_min(path: SelectionPath) -> ModelChoice:
    """Smallest model size attaining the minimum criterion value."""
    values = path.values
    idx = int(np.argmin(values))  # argmin takes the first minimum on ties
    step = path.steps[idx]
    return ModelChoice(rule="min", size=idx + 1, variable_set=step.variables, value=step.value)


def select_1se(path: SelectionPath) -> ModelChoice:
    """Smallest size whose value is within one SE of the minimum.

    The SE is the one attached to the minimizing step; simpler models are
    preferred whenever they stay inside that band.
    """
    values = path.values
    idx = int(np.argmin(values))
    se = path.steps[idx].se
    if se is None:
        raise MissingSeError("path carries no standard errors")
    cutoff = values[idx] + se
    for i, step in enumerate(path.steps):
        if step.value <= cutoff:
            return ModelChoice(rule="1se", size=i + 1, variable_set=step.variables,
                               value=step.value)
    raise AssertionError("unreachable: the minimum itself satisfies the cutoff")


def jaccard_index(a, b) -> float:
    """|a & b| / |a | b|, defined as 1.0 when both sets are empty."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


def model_size_error(choice: ModelChoice, baseline: ModelChoice) -> int:
    """Signed size difference: positive means the choice overfits the baseline."""
    return choice.size - baseline.size
