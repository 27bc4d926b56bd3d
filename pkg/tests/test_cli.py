import json

import numpy as np
import pytest

from nicc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def write_tiny_gaussian(tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text("cluster,y\nA,1.0\nA,2.0\nB,3.0\n")
    return str(path)


class TestFit:
    def test_intercept_only_reports_mean_and_mle_dispersion(self, tmp_path, capsys):
        code, out = run(capsys, "fit", write_tiny_gaussian(tmp_path), "--family", "gaussian")
        assert code == 0
        report = json.loads(out)
        assert report["coefficients"]["(intercept)"] == pytest.approx(2.0)
        assert report["dispersion"] == pytest.approx(2.0 / 3.0)
        assert set(report["criteria"]) == {"aic", "bic", "nic", "nicc"}

    def test_missing_cluster_column_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("id,y\nA,1.0\n")
        code = main(["fit", str(path), "--family", "gaussian"])
        assert code == 2

    def test_non_numeric_predictor_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("cluster,y,a\nA,1.0,x\n")
        code = main(["fit", str(path), "--family", "gaussian"])
        assert code == 2

    def test_missing_file_exits_2(self):
        assert main(["fit", "/nonexistent/nope.csv", "--family", "gaussian"]) == 2

    def test_numerical_failure_exits_1(self, tmp_path):
        # collinear predictors: the fit is not identified
        path = tmp_path / "collinear.csv"
        lines = ["cluster,y,a,b"]
        rng = np.random.default_rng(1)
        for i in range(12):
            a = rng.standard_normal()
            lines.append(f"{i % 3},{rng.standard_normal()},{a},{2 * a}")
        path.write_text("\n".join(lines) + "\n")
        assert main(["fit", str(path), "--family", "gaussian"]) == 1

    def test_vitals_schema_runs_and_nicc_penalizes_harder(self, vitals_csv, capsys):
        code, out = run(
            capsys, "fit", vitals_csv, "--family", "binomial",
            "--response", "died", "--cluster", "patient_id",
        )
        assert code == 0
        report = json.loads(out)
        assert report["converged"]
        # large correlated clusters: the clustered penalty dominates
        assert report["criteria"]["nicc"]["value"] >= report["criteria"]["aic"]["value"]
        assert report["criteria"]["nicc"]["penalty"] > report["criteria"]["nic"]["penalty"]


class TestCv:
    def test_k_equals_m_matches_loo(self, tmp_path, capsys):
        from nicc import simulation, write_dataset

        cfg = simulation.SimConfig(family="gaussian", cluster_size=10, n_predictors=3,
                                   re_sd_ratio=1.0, ar1_level=0.4, clusters=8, seed=5)
        data, _ = simulation.generate(cfg)
        path = tmp_path / "sim.csv"
        write_dataset(path, data)
        code, out_loo = run(capsys, "cv", str(path), "--family", "gaussian", "--k", "loo")
        assert code == 0
        code, out_kf = run(capsys, "cv", str(path), "--family", "gaussian", "--k", "8")
        assert code == 0
        loo = json.loads(out_loo)
        kf = json.loads(out_kf)
        assert sorted(loo["per_fold_deviance"]) == sorted(kf["per_fold_deviance"])
        assert loo["total_deviance"] == pytest.approx(kf["total_deviance"], rel=1e-12)

    def test_fixed_seed_is_reproducible(self, tmp_path, capsys):
        path = write_tiny_gaussian(tmp_path)
        _, first = run(capsys, "cv", path, "--family", "gaussian", "--k", "2", "--seed", "9")
        _, second = run(capsys, "cv", path, "--family", "gaussian", "--k", "2", "--seed", "9")
        assert first == second

    def test_large_file_k100_consistent_with_k50(self, vitals_csv, capsys):
        base = ["cv", vitals_csv, "--family", "binomial",
                "--response", "died", "--cluster", "patient_id", "--seed", "1"]
        code, out100 = run(capsys, *base, "--k", "100")
        assert code == 0
        code, out50 = run(capsys, *base, "--k", "50")
        assert code == 0
        d100 = json.loads(out100)
        d50 = json.loads(out50)
        assert d100["n_failed_folds"] == 0
        assert d100["total_deviance"] == pytest.approx(d50["total_deviance"], rel=0.05)


class TestSelect:
    def test_single_predictor_path(self, tmp_path, capsys):
        path = tmp_path / "one.csv"
        rng = np.random.default_rng(0)
        lines = ["cluster,y,a"]
        for i in range(30):
            a = rng.standard_normal()
            lines.append(f"{i % 5},{a + rng.normal(0, 0.1)},{a}")
        path.write_text("\n".join(lines) + "\n")
        code, out = run(capsys, "select", str(path), "--family", "gaussian",
                        "--criterion", "aic")
        assert code == 0
        report = json.loads(out)
        assert len(report["path"]) == 1
        assert report["chosen_variables"] == ["a"]

    def test_unknown_criterion_is_usage_error(self, tmp_path):
        path = write_tiny_gaussian(tmp_path)
        with pytest.raises(SystemExit) as err:
            main(["select", path, "--family", "gaussian", "--criterion", "waic"])
        assert err.value.code == 2

    def test_cvdev_without_k_exits_2(self, tmp_path):
        path = write_tiny_gaussian(tmp_path)
        assert main(["select", path, "--family", "gaussian", "--criterion", "cvdev"]) == 2

    def test_rule_1se_never_larger_than_min(self, tmp_path, capsys):
        from nicc import simulation, write_dataset

        cfg = simulation.SimConfig(family="gaussian", cluster_size=20, n_predictors=5,
                                   re_sd_ratio=2.0, ar1_level=0.4, clusters=10, seed=3)
        data, _ = simulation.generate(cfg)
        path = tmp_path / "sel.csv"
        write_dataset(path, data)
        args = ["select", str(path), "--family", "gaussian", "--criterion", "nicc"]
        _, out_min = run(capsys, *args, "--rule", "min")
        _, out_1se = run(capsys, *args, "--rule", "1se")
        assert json.loads(out_1se)["chosen_size"] <= json.loads(out_min)["chosen_size"]


class TestSimulate:
    def test_simulate_then_fit_round_trip(self, tmp_path, capsys):
        out_csv = tmp_path / "sim.csv"
        code, _ = run(capsys, "simulate", "--family", "binomial", "--clusters", "6",
                      "--cluster-size", "12", "--p", "3", "--rb", "1", "--phi", "0.4",
                      "--seed", "11", "--out", str(out_csv))
        assert code == 0
        code, out = run(capsys, "fit", str(out_csv), "--family", "binomial")
        assert code == 0
        assert json.loads(out)["n_clusters"] == 6

    def test_same_seed_writes_identical_csv(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--family", "gaussian", "--clusters", "4", "--cluster-size", "6",
                "--p", "2", "--rb", "1", "--phi", "0", "--seed", "2"]
        main(args + ["--out", str(a)])
        main(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestExperiment:
    def write_design(self, tmp_path, text):
        path = tmp_path / "design.cfg"
        path.write_text(text)
        return str(path)

    def test_row_count_contract(self, tmp_path, capsys):
        # one approx cell, one iteration: 4 criterion records + the
        # loodev baseline record
        design = self.write_design(
            tmp_path,
            "sweeps = ni\nfamilies = gaussian\np_values = 5\nbase_seed = 4\n",
        )
        out = tmp_path / "records.csv"
        code, _ = run(capsys, "experiment", "--design", design, "--out", str(out),
                      "--iterations", "1")
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + 5 * 5  # header + 5 ni-cells x 5 records

    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        design = self.write_design(
            tmp_path,
            "sweeps = rb\nfamilies = binomial\np_values = 5\nbase_seed = 7\niterations = 1\n",
        )
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["experiment", "--design", design, "--out", str(a)]) == 0
        assert main(["experiment", "--design", design, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_records_round_trip_and_error_identity(self, tmp_path, capsys):
        import csv as csvmod

        design = self.write_design(
            tmp_path, "sweeps = ni\nfamilies = gaussian\np_values = 5\nbase_seed = 1\n"
        )
        out = tmp_path / "records.csv"
        main(["experiment", "--design", design, "--out", str(out), "--iterations", "1"])
        with open(out) as fh:
            rows = list(csvmod.DictReader(fh))
        assert rows
        for row in rows:
            assert row["error"] == ""
            recomputed = float(row["value"]) - float(row["loo_deviance"])
            assert float(row["approximation_error"]) == recomputed

    def test_unknown_design_key_exits_2(self, tmp_path):
        design = self.write_design(tmp_path, "wat = 1\n")
        assert main(["experiment", "--design", design, "--out", str(tmp_path / "o.csv")]) == 2

    def test_strong_cell_error_ordering_through_cli(self, tmp_path, capsys):
        import csv as csvmod
        from collections import defaultdict

        design = self.write_design(
            tmp_path,
            "sweeps = strong\nfamilies = gaussian\niterations = 6\nbase_seed = 20260809\n",
        )
        out = tmp_path / "strong.csv"
        assert main(["experiment", "--design", design, "--out", str(out)]) == 0
        errs = defaultdict(list)
        with open(out) as fh:
            for row in csvmod.DictReader(fh):
                errs[row["criterion"]].append(abs(float(row["approximation_error"])))
        assert np.mean(errs["nicc"]) < np.mean(errs["aic"])
        assert np.mean(errs["nicc"]) < np.mean(errs["bic"])
        assert (out.parent / (out.name + ".timing.csv")).exists()
