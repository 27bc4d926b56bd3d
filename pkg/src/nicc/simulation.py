"""Clustered-data generator and the factorial design around it.

Data come from a generalized linear mixed model: every predictor carries a
fixed effect, a trailing fraction also carries a cluster-specific random
effect, and those random-effect predictors evolve within each cluster as an
AR1 process. Three knobs control how strongly the data cluster: the number
of observations per cluster, the random-to-fixed effect SD ratio, and the
AR1 autoregression level of the predictors.

Generation is pure given (config, seed) and keyed sub-streams make every
(cluster, column) draw independent of the rest, so enlarging the design
never perturbs draws that came before.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

from .data import Dataset
from .errors import InvalidConfigError
from .glm import _sigmoid

CLUSTER_SIZE_GRID = (5, 10, 50, 100, 150)
P_GRID = (5, 6, 7, 8, 9, 10)
RE_SD_RATIO_GRID = (0.5, 1.0, 10.0)
AR1_LEVEL_GRID = (0.0, 0.4, 0.8)

# Fixed levels used while one factor sweeps its grid. The SD-ratio level sits
# between the grid's extremes rather than on the grid itself.
MEDIAN_CLUSTER_SIZE = 50
MEDIAN_RE_SD_RATIO = 5.0
MEDIAN_AR1_LEVEL = 0.4

# The strong-clustering cell used for the model-selection protocol.
SELECTION_CELL = dict(cluster_size=150, n_predictors=5, re_sd_ratio=10.0, ar1_level=0.8)

_SWEEPS = ("cluster_size", "ar1_level", "re_sd_ratio", "selection", "strong")


@dataclass(frozen=True)
class SimConfig:
    """One cell of the simulation factorial."""

    family: str
    cluster_size: int                 # observations per cluster
    n_predictors: int                 # total predictor count
    re_sd_ratio: float                # random-effect SD over fixed-effect SD
    ar1_level: float                  # lower edge of the per-cluster AR1 coefficient draw
    clusters: int = 50
    coef_sd: float = 5.0              # SD of the fixed-effect coefficients
    ar1_noise_sd: float = 1.0         # white-noise SD inside the AR1 recursion
    response_sd: float = 2.0          # gaussian response noise SD
    random_frac: float = 0.8          # fraction of predictors that get random effects
    seed: int = 0

    def validate(self):
        if self.family not in ("gaussian", "binomial"):
            raise InvalidConfigError(f"unknown family {self.family!r}")
        if self.clusters < 1 or self.cluster_size < 1 or self.n_predictors < 1:
            raise InvalidConfigError("clusters, cluster_size and n_predictors must be >= 1")
        if not 0.0 <= self.ar1_level <= 0.8:
            raise InvalidConfigError("ar1_level must lie in [0, 0.8]")
        if self.re_sd_ratio <= 0:
            raise InvalidConfigError("re_sd_ratio must be positive")
        if not 0.0 <= self.random_frac <= 1.0:
            raise InvalidConfigError("random_frac must lie in [0, 1]")
        if self.seed < 0:
            raise InvalidConfigError("seed must be non-negative")

    @property
    def n_random(self) -> int:
        # round-half-up keeps the 80% convention deterministic: 5->4, 6->5,
        # 7->6, 8->6, 9->7, 10->8
        return int(math.floor(self.random_frac * self.n_predictors + 0.5))


@dataclass(frozen=True)
class SimTruth:
    """Generating quantities behind one dataset."""

    beta: np.ndarray                 # (p,) fixed-effect coefficients
    b: np.ndarray                    # (M, S) cluster random-effect coefficients
    phi_draws: np.ndarray            # (M, S) per-cluster AR1 coefficients
    random_set: tuple[int, ...]      # dataset pool columns with random effects


def _stream(*key) -> np.random.Generator:
    return np.random.default_rng(list(key))


def generate(config: SimConfig) -> tuple[Dataset, SimTruth]:
    """Draw one clustered dataset and the truth that generated it.

    Fixed-only predictors are iid standard normal. Each random-effect
    predictor follows, within cluster i, the recursion z_t = phi_i z_{t-1}
    + eps_t started at z_1 = eps_1, with phi_i drawn uniformly from
    [ar1_level, ar1_level + 0.2) per (cluster, column). Random-effect
    coefficients are N(0, (re_sd_ratio * coef_sd)^2); the linear predictor
    adds them to the fixed part and the response is gaussian noise around
    it or a Bernoulli draw through the logistic link.
    """
    config.validate()
    m, n_i, p = config.clusters, config.cluster_size, config.n_predictors
    s = config.n_random
    n = m * n_i
    random_cols = tuple(range(p - s, p))   # trailing predictor indices

    beta = np.array([_stream(config.seed, 1, k).normal(0.0, config.coef_sd) for k in range(p)])

    X = np.empty((n, p))
    b = np.empty((m, s))
    phi_draws = np.empty((m, s))
    eta = np.empty(n)
    y = np.empty(n)
    cluster_id = np.repeat(np.arange(m), n_i)

    for i in range(m):
        rows = slice(i * n_i, (i + 1) * n_i)
        for k in range(p):
            if k in random_cols:
                continue
            X[rows, k] = _stream(config.seed, 2, i, k).standard_normal(n_i)
        for j, k in enumerate(random_cols):
            r = _stream(config.seed, 3, i, k)
            phi_i = r.uniform(config.ar1_level, config.ar1_level + 0.2)
            b[i, j] = r.normal(0.0, config.re_sd_ratio * config.coef_sd)
            phi_draws[i, j] = phi_i
            eps = r.standard_normal(n_i) * config.ar1_noise_sd
            X[rows, k] = lfilter([1.0], [1.0, -phi_i], eps)

        eta[rows] = X[rows] @ beta + X[rows][:, list(random_cols)] @ b[i]
        resp = _stream(config.seed, 4, i)
        if config.family == "gaussian":
            y[rows] = eta[rows] + resp.normal(0.0, config.response_sd, size=n_i)
        else:
            y[rows] = (resp.random(n_i) < _sigmoid(eta[rows])).astype(float)

    names = tuple(f"x{k + 1}" for k in range(p))
    data = Dataset.with_intercept(X, y, cluster_id, config.family, names=names)
    truth = SimTruth(
        beta=beta,
        b=b,
        phi_draws=phi_draws,
        random_set=tuple(c + 1 for c in random_cols),  # +1: pool column 0 is the intercept
    )
    return data, truth


def polynomial_candidates(data: Dataset, truth: SimTruth, max_degree: int = 5) -> Dataset:
    """Append raw powers 2..max_degree of every random-effect predictor.

    This is the overfitting playground for the selection protocol: each
    power is its own candidate column, named like ``x4^3``.
    """
    blocks = [data.X]
    names = list(data.names) if data.names is not None else [f"x{c}" for c in range(data.n_cols)]
    for col in truth.random_set:
        base = data.X[:, col]
        for degree in range(2, max_degree + 1):
            blocks.append((base ** degree)[:, None])
            names.append(f"{names[col]}^{degree}")
    return Dataset(
        np.hstack(blocks),
        data.y,
        data.cluster_id,
        data.family,
        intercept_col=data.intercept_col,
        names=tuple(names),
    )


@dataclass(frozen=True)
class DesignPoint:
    """One (cell, iteration) unit of work in the experiment grid."""

    config: SimConfig
    cell: str
    iteration: int
    mode: str                        # "approx" or "selection"


def cell_id(config: SimConfig) -> str:
    return (
        f"{config.family}/ni{config.cluster_size}/p{config.n_predictors}"
        f"/rb{config.re_sd_ratio:g}/phi{config.ar1_level:g}"
    )


def iteration_seed(base_seed: int, cell: str, iteration: int) -> int:
    """Stable 63-bit seed for one (cell, iteration); independent of order."""
    digest = hashlib.blake2b(
        f"{base_seed}|{cell}|{iteration}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little") >> 1


def enumerate_design(
    base_seed: int,
    iterations: int = 1,
    families=("gaussian", "binomial"),
    sweeps=_SWEEPS,
    p_values=P_GRID,
) -> list[DesignPoint]:
    """The three marginal sweeps plus the strong-clustering selection cell.

    Each sweep varies one clustering factor over its grid while the other
    two sit at their fixed mid levels, crossed with every predictor count in
    ``p_values`` and every family. Duplicate cells (the mid point appears in
    all three sweeps) are emitted once. Seeds derive from
    ``(base_seed, cell, iteration)`` so any subset of the design can be
    regenerated independently.

    The ``selection`` sweep runs the strong-clustering cell through the
    forward-selection protocol; ``strong`` runs the same cell in plain
    approximation mode (criterion vs looDeviance on the full model).
    """
    unknown = set(sweeps) - set(_SWEEPS)
    if unknown:
        raise InvalidConfigError(f"unknown sweeps {sorted(unknown)}; expected {_SWEEPS}")
    base = dict(
        cluster_size=MEDIAN_CLUSTER_SIZE,
        re_sd_ratio=MEDIAN_RE_SD_RATIO,
        ar1_level=MEDIAN_AR1_LEVEL,
    )
    grids = {
        "cluster_size": CLUSTER_SIZE_GRID,
        "ar1_level": AR1_LEVEL_GRID,
        "re_sd_ratio": RE_SD_RATIO_GRID,
    }
    points: list[DesignPoint] = []
    seen: set[tuple[str, str]] = set()
    for sweep in sweeps:
        for family in families:
            if sweep in ("selection", "strong"):
                cells = [dict(SELECTION_CELL)]
                mode = "selection" if sweep == "selection" else "approx"
            else:
                cells = [
                    dict(base, **{sweep: level}, n_predictors=p)
                    for level in grids[sweep]
                    for p in p_values
                ]
                mode = "approx"
            for cell_kwargs in cells:
                config = SimConfig(family=family, **cell_kwargs)
                cid = cell_id(config)
                if (mode, cid) in seen:
                    continue
                seen.add((mode, cid))
                for it in range(iterations):
                    seeded = replace(config, seed=iteration_seed(base_seed, cid, it))
                    points.append(DesignPoint(config=seeded, cell=cid, iteration=it, mode=mode))
    return points


# Column layout of the synthetic clinical-style table: repeated vital-sign
# statistics per stay plus per-patient demographics, and a rare binary
# outcome. This is demo/benchmark data shaped like the CSV files the CLI
# ingests; values are invented.
VITALS_COLUMNS = (
    "hr_mean", "hr_std", "hr_max", "hr_min",
    "sp_mean", "sp_std", "sp_max", "sp_min",
    "EGA", "BWT", "Apgar1", "Apgar5",
    "Vaginal", "C-section", "Steroids", "InBorn",
    "BirthHC", "Multiple", "MaternalAge",
)


def vitals_like_table(clusters: int = 2964, mean_rows: float = 22.0, seed: int = 0) -> Dataset:
    """Synthetic repeated-measures clinical table with a rare binary outcome.

    Each cluster is one patient: demographics are constant within the
    cluster, vital-sign statistics vary row to row around patient baselines,
    and a logistic model with a patient-level frailty drives a rare event
    (roughly half a percent of rows). Useful as a large, strongly clustered
    CSV for end-to-end runs.
    """
    rng = np.random.default_rng([seed, 7])
    sizes = np.maximum(2, rng.poisson(mean_rows - 1, size=clusters) + 1)
    n = int(np.sum(sizes))
    cluster_id = np.repeat(np.arange(clusters), sizes)

    ega = np.clip(rng.normal(35.2, 4.4, clusters), 22.0, 42.0)
    bwt = np.clip(2495.0 + 160.0 * (ega - 35.2) + rng.normal(0.0, 600.0, clusters), 400.0, 5200.0)
    apgar1 = np.clip(np.round(rng.normal(6.5, 2.0, clusters)), 0, 10)
    apgar5 = np.clip(apgar1 + np.round(rng.normal(1.5, 1.0, clusters)), 0, 10)
    vaginal = (rng.random(clusters) < 0.55).astype(float)
    csection = np.where(rng.random(clusters) < 0.9, 1.0 - vaginal, vaginal)
    steroids = (rng.random(clusters) < 0.3).astype(float)
    inborn = (rng.random(clusters) < 0.7).astype(float)
    birth_hc = np.clip(rng.normal(31.5, 3.0, clusters), 18.0, 40.0)
    multiple = (rng.random(clusters) < 0.145).astype(float)
    maternal_age = np.clip(rng.normal(28.5, 6.0, clusters), 14.0, 48.0)

    hr_base = rng.normal(150.0, 10.0, clusters)
    sp_base = rng.normal(95.0, 2.0, clusters)
    frailty = rng.normal(0.0, 1.2, clusters)

    hr_mean = hr_base[cluster_id] + rng.normal(0.0, 4.0, n)
    hr_std = np.abs(rng.normal(0.0, 1.0, n)) * 2.5 + 1.0 + 0.6 * np.abs(frailty[cluster_id])
    hr_max = hr_mean + 2.0 * hr_std + np.abs(rng.normal(0.0, 3.0, n))
    hr_min = hr_mean - 2.0 * hr_std - np.abs(rng.normal(0.0, 3.0, n))
    sp_mean = np.clip(sp_base[cluster_id] + rng.normal(0.0, 1.5, n), 70.0, 100.0)
    sp_std = np.abs(rng.normal(0.0, 1.0, n)) * 1.5 + 0.5
    sp_max = np.clip(sp_mean + 1.5 * sp_std, 70.0, 100.0)
    sp_min = np.clip(sp_mean - 2.0 * sp_std - np.abs(rng.normal(0.0, 2.0, n)), 40.0, 100.0)

    eta = (
        -6.1
        + frailty[cluster_id]
        - 0.55 * (ega[cluster_id] - 35.2) / 4.4
        - 0.35 * (bwt[cluster_id] - 2495.0) / 995.0
        + 0.45 * (hr_std - 3.0) / 2.5
        - 0.50 * (sp_min - 90.0) / 4.0
        + 0.15 * (hr_mean - 150.0) / 10.0
        - 0.20 * steroids[cluster_id]
    )
    y = (rng.random(n) < _sigmoid(eta)).astype(float)

    X = np.column_stack([
        hr_mean, hr_std, hr_max, hr_min,
        sp_mean, sp_std, sp_max, sp_min,
        ega[cluster_id], bwt[cluster_id], apgar1[cluster_id], apgar5[cluster_id],
        vaginal[cluster_id], csection[cluster_id], steroids[cluster_id], inborn[cluster_id],
        birth_hc[cluster_id], multiple[cluster_id], maternal_age[cluster_id],
    ])
    return Dataset.with_intercept(X, y, cluster_id, "binomial", names=VITALS_COLUMNS)
