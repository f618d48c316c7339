import hashlib
import json
import math
import os

import numpy as np
import pytest

from qpower.cli import main as cli_main
from qpower.experiments import (
    DistinguishTrial,
    ExperimentConfig,
    closed_form_success,
    cp_interval,
    hard_instance_report,
    kl_divergence,
    lb_distinguish_curve,
    m_star_closed_form,
    run_experiment,
)


def _hash(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


class TestConfig:
    def test_unknown_experiment(self):
        with pytest.raises(ValueError, match="experiment"):
            ExperimentConfig(experiment="bogus", out="/tmp/x")

    def test_zero_trials(self):
        with pytest.raises(ValueError, match="trials"):
            ExperimentConfig(experiment="npm", out="/tmp/x", trials=0)

    def test_missing_out(self):
        with pytest.raises(ValueError, match="out"):
            ExperimentConfig(experiment="npm", out="")

    def test_extra_keys_preserved(self):
        cfg = ExperimentConfig.from_dict(
            {"experiment": "tomography", "out": "/tmp/x", "mode": "basis"})
        assert cfg.extra["mode"] == "basis"
        assert cfg.to_dict()["mode"] == "basis"


class TestLowerBoundHarness:
    def test_zero_budget_is_coin_flip(self, rng):
        assert closed_form_success(0.0, 1000) == pytest.approx(0.5)
        wins = sum(DistinguishTrial(m=0.0, sign=1, d=1000).run(rng) for _ in range(2000))
        assert abs(wins / 2000 - 0.5) <= 0.04

    def test_kl_exact(self):
        for d in (250, 500, 1000, 2000):
            assert kl_divergence(d) == 8e6 / d

    def test_closed_form_matches_monte_carlo(self, rng):
        d = 1000
        for m in (m_star_closed_form(d) * f for f in (0.5, 1.0, 2.0)):
            wins = 0
            trials = 4000
            for _ in range(trials):
                sign = 1 if rng.random() < 0.5 else -1
                wins += DistinguishTrial(m=m, sign=sign, d=d).run(rng)
            p = closed_form_success(m, d)
            assert abs(wins / trials - p) <= 3 * math.sqrt(p * (1 - p) / trials) + 1e-3

    def test_m_star_scaling(self):
        slope = (math.log(m_star_closed_form(2000)) - math.log(m_star_closed_form(250))) / (
            math.log(2000) - math.log(250))
        assert slope == pytest.approx(1.0, abs=1e-12)

    def test_curve_rows(self, rng):
        rows = lb_distinguish_curve(400, [1e-5, 1e-4], 500, rng)
        assert len(rows) == 2
        assert all(0 <= r["success"] <= 1 for r in rows)

    def test_pinsker_bound(self, rng):
        # TV between m-fold products is below sqrt(m KL / 2) for the
        # empirically estimated TV at small m
        d = 400
        for m in (0.25 * m_star_closed_form(d), m_star_closed_form(d)):
            tv_emp = 2 * closed_form_success(m, d) - 1  # exact TV of the sign test
            assert tv_emp <= math.sqrt(m * kl_divergence(d) / 2)


class TestHardInstanceReport:
    def test_small_report(self):
        recs, summary = hard_instance_report(150, 10, seed=3)
        assert len(recs) == 10
        assert summary["rates"]["lambda2_below_0.08"] == 1.0
        assert summary["all_passed"]


class TestClopperPearson:
    def test_degenerate_counts(self):
        lo, hi = cp_interval(0, 50)
        assert lo == 0.0 and hi < 0.15
        lo, hi = cp_interval(50, 50)
        assert hi == 1.0 and lo > 0.85

    def test_contains_truth(self, rng):
        covered = 0
        for _ in range(200):
            k = rng.binomial(100, 0.3)
            lo, hi = cp_interval(int(k), 100)
            covered += lo <= 0.3 <= hi
        assert covered >= 195


class TestRunExperiment:
    def test_determinism_byte_identical(self, tmp_path):
        cfg = {"experiment": "lambda-q", "out": str(tmp_path / "a"), "seed": 9, "trials": 6}
        run_experiment(dict(cfg))
        h1 = _hash(tmp_path / "a" / "trials.csv")
        cfg["out"] = str(tmp_path / "b")
        run_experiment(dict(cfg))
        assert h1 == _hash(tmp_path / "b" / "trials.csv")

    def test_parallel_workers_identical_output(self, tmp_path, monkeypatch):
        cfg = {"experiment": "lambda-q", "seed": 9, "trials": 6}
        run_experiment(dict(cfg, out=str(tmp_path / "serial")))
        monkeypatch.setenv("QPOWER_WORKERS", "3")
        run_experiment(dict(cfg, out=str(tmp_path / "pooled")))
        assert _hash(tmp_path / "serial" / "trials.csv") == _hash(tmp_path / "pooled" / "trials.csv")

    def test_resume_by_trial_index(self, tmp_path):
        base = {"experiment": "lambda-q", "seed": 4, "trials": 6, "out": str(tmp_path / "full")}
        run_experiment(dict(base))
        partial = dict(base, out=str(tmp_path / "part"), trials=3)
        run_experiment(partial)
        resumed = dict(base, out=str(tmp_path / "part"))
        run_experiment(resumed)
        assert _hash(tmp_path / "full" / "trials.csv") == _hash(tmp_path / "part" / "trials.csv")

    def test_manifest_and_schema(self, tmp_path):
        out = tmp_path / "run"
        run_experiment({"experiment": "pmf-dump", "out": str(out), "s": 2.0})
        manifest = json.load(open(out / "manifest.json"))
        assert manifest["schema"] == 1
        assert len(manifest["config_sha256"]) == 64
        first = open(out / "trials.csv").readline()
        assert first == "# schema=1\n"
        assert os.path.exists(out / "ledger.json")

    def test_tomography_modes(self, tmp_path):
        for mode in ("basis", "unbiased", "refined"):
            out = tmp_path / mode
            summary = run_experiment({
                "experiment": "tomography", "out": str(out), "seed": 1, "trials": 4,
                "d": 8, "eps": 0.3, "delta": 0.2, "mode": mode,
            })
            assert summary["successes"] >= 3

    def test_prepare_v1_runner(self, tmp_path):
        summary = run_experiment({
            "experiment": "prepare-v1", "out": str(tmp_path / "p"), "seed": 2,
            "trials": 5, "d": 48, "eps": 0.2,
        })
        assert summary["success_rate"] >= 0.8

    def test_subspace_runner(self, tmp_path):
        summary = run_experiment({
            "experiment": "subspace", "out": str(tmp_path / "s"), "seed": 2,
            "trials": 3, "d": 24, "q": 2, "eps": 0.25, "delta": 0.1,
        })
        assert summary["successes"] == 3
        assert summary["audit_ok_on_successes"]

    def test_npm_runner(self, tmp_path):
        summary = run_experiment({
            "experiment": "npm", "out": str(tmp_path / "n"), "seed": 2,
            "trials": 4, "d": 60, "eps": 0.1,
        })
        assert summary["success_rate"] >= 0.75
        assert summary["audit_ok_on_successes"]

    def test_qnpm_runner(self, tmp_path):
        summary = run_experiment({
            "experiment": "qnpm", "out": str(tmp_path / "q"), "seed": 2,
            "trials": 2, "d": 24, "eps": 0.2,
        })
        assert summary["successes"] == 2
        assert summary["mean_queries"] > 0

    def test_gpe_calibrate_outputs(self, tmp_path):
        out = tmp_path / "gpe"
        summary = run_experiment({
            "experiment": "gpe-calibrate", "out": str(out), "seed": 0, "trials": 500,
            "delta": 0.05, "a": 0.25, "exact": True,
        })
        assert summary["passed"]
        lines = open(out / "trials.csv").read().splitlines()
        assert lines[1] == "error,count"
        assert os.path.exists(out / "predicted.csv")


class TestCLI:
    def test_usage_error_exit_code(self, tmp_path, capsys):
        rc = cli_main(["run", "--out", str(tmp_path), "--override", "experiment=bogus"])
        assert rc == 2
        assert "configuration error" in capsys.readouterr().err

    def test_missing_required_fields_exit_code(self, capsys):
        rc = cli_main(["run"])
        assert rc == 2
        assert "required field missing" in capsys.readouterr().err

    def test_pmf_dump_verb(self, tmp_path, capsys):
        rc = cli_main(["pmf-dump", "--s", "2.5", "--out", str(tmp_path / "o")])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["passed"]

    def test_gate_failure_exit_code(self, tmp_path, capsys):
        # an unattainable success threshold flips the pass gate -> exit 1
        rc = cli_main(["lambda-q", "--trials", "6", "--seed", "1",
                       "--out", str(tmp_path / "g"), "--override",
                       "success_threshold=1.01"])
        assert rc == 1

    def test_config_file_with_override(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        json.dump({"experiment": "lambda-q", "out": str(tmp_path / "r"), "trials": 6,
                   "seed": 1}, open(cfg_path, "w"))
        rc = cli_main(["run", "--config", str(cfg_path), "--override", "trials=6"])
        assert rc == 0

    def test_hard_instance_verb_small(self, tmp_path, capsys):
        rc = cli_main(["hard-instance", "--d", "150", "--trials", "5", "--seed", "0",
                       "--out", str(tmp_path / "h")])
        assert rc == 0

    def test_flag_overrides_config(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        json.dump({"experiment": "pmf-dump", "out": str(tmp_path / "r1"), "s": 2.0},
                  open(cfg_path, "w"))
        rc = cli_main(["pmf-dump", "--config", str(cfg_path), "--out", str(tmp_path / "r2")])
        assert rc == 0
        assert os.path.exists(tmp_path / "r2" / "summary.json")
