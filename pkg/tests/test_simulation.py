import numpy as np
import pytest

from nicc import fit_glm, simulation
from nicc.errors import InvalidConfigError
from nicc.simulation import SimConfig, enumerate_design, generate, iteration_seed


def lag1_autocorr(z):
    z = z - z.mean()
    return float(np.sum(z[1:] * z[:-1]) / np.sum(z * z))


def cell_config(family="gaussian", **overrides):
    base = dict(cluster_size=50, n_predictors=5, re_sd_ratio=1.0, ar1_level=0.4, seed=0)
    base.update(overrides)
    return SimConfig(family=family, **base)


class TestGenerate:
    def test_same_seed_is_bit_identical(self):
        a, _ = generate(cell_config(seed=42))
        b, _ = generate(cell_config(seed=42))
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)

    def test_more_clusters_do_not_perturb_earlier_ones(self):
        small, _ = generate(cell_config(clusters=5, seed=9))
        large, _ = generate(cell_config(clusters=8, seed=9))
        n_small = small.n_obs
        np.testing.assert_array_equal(small.X, large.X[:n_small])
        np.testing.assert_array_equal(small.y, large.y[:n_small])

    def test_more_predictors_do_not_perturb_earlier_columns(self):
        # going from p=5 to p=6 keeps columns 1..5 and their coefficients:
        # sub-streams are keyed by (cluster, column), not drawn in sequence
        d5, t5 = generate(cell_config(n_predictors=5, seed=9))
        d6, t6 = generate(cell_config(n_predictors=6, seed=9))
        np.testing.assert_array_equal(d5.X[:, 1:6], d6.X[:, 1:6])
        np.testing.assert_array_equal(t5.beta, t6.beta[:5])

    def test_shapes_and_truth_layout(self):
        data, truth = generate(cell_config(n_predictors=7, seed=3))
        assert data.n_cols == 8  # intercept + 7 predictors
        assert data.intercept_col == 0
        assert truth.beta.shape == (7,)
        assert truth.b.shape == (50, 6)  # round(0.8 * 7) = 6
        assert truth.random_set == (2, 3, 4, 5, 6, 7)

    def test_random_count_rounds_half_up(self):
        expected = {5: 4, 6: 5, 7: 6, 8: 6, 9: 7, 10: 8}
        for p, s in expected.items():
            assert cell_config(n_predictors=p).n_random == s

    def test_fixed_only_columns_look_standard_normal(self):
        data, truth = generate(cell_config(cluster_size=150, seed=5))
        fixed = [c for c in data.predictor_columns() if c not in truth.random_set]
        assert fixed  # p=5 leaves one fixed-only column
        for c in fixed:
            col = data.X[:, c]
            assert abs(col.mean()) < 0.1
            assert 0.9 < col.std(ddof=1) < 1.1

    def test_phi_zero_autocorrelation_matches_drawn_coefficients(self):
        data, truth = generate(cell_config(cluster_size=150, ar1_level=0.0, seed=31))
        for s_idx, col in enumerate(truth.random_set):
            estimates = [
                lag1_autocorr(data.X[data.cluster_id == i, col]) for i in range(50)
            ]
            assert np.mean(estimates) == pytest.approx(
                truth.phi_draws[:, s_idx].mean(), abs=0.05
            )
            assert 0.0 <= truth.phi_draws[:, s_idx].min()
            assert truth.phi_draws[:, s_idx].max() < 0.2

    def test_autocorrelation_increases_with_phi(self):
        means = []
        for phi in (0.0, 0.4, 0.8):
            vals = []
            for seed in range(20):
                data, truth = generate(cell_config(ar1_level=phi, seed=1000 + seed))
                for col in truth.random_set:
                    for i in (0, 10, 20, 30, 40):
                        vals.append(lag1_autocorr(data.X[data.cluster_id == i, col]))
            means.append(np.mean(vals))
        assert means[0] < means[1] < means[2]

    def test_no_random_effects_limit_gives_near_zero_icc(self):
        data, _ = generate(cell_config(re_sd_ratio=1e-8, ar1_level=0.0, seed=77))
        fit = fit_glm(data)
        resid = data.y - data.model_matrix() @ fit.theta_hat
        groups = [resid[data.cluster_id == i] for i in range(50)]
        between = np.mean([(g.mean() - resid.mean()) ** 2 for g in groups])
        within = np.mean([g.var(ddof=1) for g in groups])
        assert between / (between + within) < 0.05

    def test_between_cluster_residuals_are_uncorrelated(self):
        # per-pair correlation estimates are noisy under strong AR1, so the
        # independence check averages the signed correlation over 25
        # disjoint cluster pairs per seed
        means = []
        for seed in range(20):
            data, _ = generate(cell_config(re_sd_ratio=10.0, ar1_level=0.8, seed=400 + seed))
            fit = fit_glm(data)
            resid = data.y - data.model_matrix() @ fit.theta_hat
            pairs = [
                np.corrcoef(resid[data.cluster_id == a], resid[data.cluster_id == a + 1])[0, 1]
                for a in range(0, 50, 2)
            ]
            means.append(np.mean(pairs))
        assert abs(np.mean(means)) < 0.1

    def test_strong_cell_fit_recovers_fixed_only_coefficient_signs(self):
        # random-effect columns have pooled slopes dominated by the mean of
        # the cluster effects, so only fixed-only columns are checked
        hits = 0
        for it in range(20):
            cfg = SimConfig(
                family="binomial",
                seed=iteration_seed(99, "signs", it),
                **simulation.SELECTION_CELL,
            )
            data, truth = generate(cfg)
            fit = fit_glm(data)
            fixed = [k for k in range(5) if (k + 1) not in truth.random_set]
            hits += all(
                np.sign(fit.theta_hat[1 + k]) == np.sign(truth.beta[k]) for k in fixed
            )
        assert hits >= 18  # at least 90% of the 20 seeds

    def test_invalid_configs_rejected(self):
        with pytest.raises(InvalidConfigError):
            generate(cell_config(ar1_level=0.9))
        with pytest.raises(InvalidConfigError):
            generate(cell_config(re_sd_ratio=0.0))
        with pytest.raises(InvalidConfigError):
            generate(cell_config(seed=-1))
        with pytest.raises(InvalidConfigError):
            SimConfig(family="poisson", cluster_size=5, n_predictors=5,
                      re_sd_ratio=1.0, ar1_level=0.0).validate()


class TestPolynomialCandidates:
    def test_appends_powers_of_random_columns(self):
        data, truth = generate(cell_config(seed=8))
        expanded = simulation.polynomial_candidates(data, truth)
        assert expanded.n_cols == data.n_cols + 4 * len(truth.random_set)
        first_random = truth.random_set[0]
        np.testing.assert_allclose(
            expanded.X[:, data.n_cols], data.X[:, first_random] ** 2
        )
        assert expanded.names[data.n_cols].endswith("^2")


class TestEnumerateDesign:
    def test_deterministic_and_seeded_per_iteration(self):
        a = enumerate_design(123, iterations=2)
        b = enumerate_design(123, iterations=2)
        assert a == b
        seeds = {(p.cell, p.iteration): p.config.seed for p in a}
        assert len(set(seeds.values())) == len(seeds)

    def test_cluster_size_sweep_crosses_p_grid(self):
        points = enumerate_design(
            1, families=("gaussian",), sweeps=("cluster_size",)
        )
        sizes = {p.config.cluster_size for p in points}
        assert sizes == {5, 10, 50, 100, 150}
        ps = {p.config.n_predictors for p in points}
        assert ps == {5, 6, 7, 8, 9, 10}
        assert len(points) == 30
        for point in points:
            assert point.config.re_sd_ratio == 5.0
            assert point.config.ar1_level == 0.4
            assert point.mode == "approx"

    def test_selection_cell_is_the_strong_clustering_one(self):
        points = enumerate_design(1, families=("binomial",), sweeps=("selection",))
        assert len(points) == 1
        cfg = points[0].config
        assert (cfg.cluster_size, cfg.n_predictors, cfg.re_sd_ratio, cfg.ar1_level) == (
            150, 5, 10.0, 0.8,
        )
        assert points[0].mode == "selection"

    def test_duplicate_mid_cells_emitted_once(self):
        points = enumerate_design(1, families=("gaussian",),
                                  sweeps=("cluster_size", "ar1_level", "re_sd_ratio"))
        cells = [p.cell for p in points]
        assert len(cells) == len(set(cells))
        # 30 + 18 + 18 minus the shared mid cell (ni=50, phi=0.4) of the
        # first two sweeps; the SD-ratio sweep never hits its mid level 5
        assert len(cells) == 30 + 18 + 18 - 6


class TestVitalsTable:
    def test_schema_shape_and_rarity(self):
        data = simulation.vitals_like_table(clusters=300, seed=3)
        assert data.n_clusters == 300
        assert data.names[1:] == simulation.VITALS_COLUMNS
        rate = data.y.mean()
        assert 0.001 < rate < 0.03
        assert 15 < data.n_obs / data.n_clusters < 30
