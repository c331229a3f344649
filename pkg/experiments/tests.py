"""Tests for experiments app (config validation, pipeline artifacts, run ledger, commands, bench)."""
from __future__ import annotations

import csv
import json
import shutil
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings, tag

from experiments.bench import fit_slope, run_bench
from experiments.config import ExperimentConfig, load_config, parse_config
from experiments.models import ExperimentRun
from experiments.services import (
    MANIFEST,
    run_pipeline,
    sha256_file,
    stage,
    tracked_run,
)
from pointprocess import LagGrid
from pointprocess.errors import (
    ConfigError,
    InvalidParameter,
    SingularSystem,
    UnstableKernel,
)
from pointprocess.formats import read_covariance_grid, read_json, write_json

POISSON = {
    "schema_version": 1,
    "name": "poisson-null",
    "model": {"type": "poisson", "rates": [1.0]},
    "horizon": 100.0,
    "replications": 20,
    "seed": 2024,
    "grid": {"delta": 0.1, "p": 20},
    "solver": "whittle",
    "bootstrap_resamples": 50,
    "evaluation": {"delta": 0.5, "streams": 2, "burn_in": 0.0},
}

HAWKES = {
    "schema_version": 1,
    "name": "hawkes",
    "model": {
        "type": "hawkes",
        "baseline": [0.5],
        "kernel": {"type": "exponential", "alpha": 0.8, "beta": 1.0},
    },
    "horizon": 200.0,
    "replications": 4,
    "seed": 7,
    "grid": {"delta": 0.1, "p": 40},
    "solver": "direct",
    "bootstrap_resamples": 10,
    "evaluation": {"delta": 0.5, "streams": 2, "burn_in": 20.0},
}

NEYMAN_SCOTT = {
    "schema_version": 1,
    "model": {
        "type": "neyman_scott",
        "latent_rates": [0.5],
        "shot_kernel": {"type": "box", "height": 1.5, "support": 2.0},
    },
    "horizon": 200.0,
    "replications": 4,
    "seed": 11,
    "grid": {"delta": 0.1, "p": 30},
    "solver": "innovations",
    "bootstrap_resamples": 10,
    "evaluation": {"delta": 0.5, "streams": 2},
}


def unstable(config=HAWKES):
    model = {**config["model"], "kernel": {"type": "exponential", "alpha": 1.2, "beta": 1.0}}
    return {**config, "model": model}


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)
        super().tearDown()

    def config_file(self, data, name="config.json"):
        return write_json(data, self.tmp / name)


# ---------------------------------------------------------------------------
# Config documents
# ---------------------------------------------------------------------------


class TestParseConfig(SimpleTestCase):
    def test_valid_config(self):
        config = parse_config(HAWKES)
        self.assertEqual(config.model_type, "hawkes")
        self.assertEqual(config.grid, LagGrid(0.1, 40))
        self.assertEqual(config.evaluation.burn_in, 20.0)
        self.assertEqual(config.resamples, 10)

    def test_round_trip(self):
        config = parse_config(HAWKES)
        self.assertEqual(parse_config(config.to_dict()), config)
        self.assertEqual(parse_config(config.to_dict()).config_hash(), config.config_hash())

    def test_defaults(self):
        data = {k: v for k, v in POISSON.items() if k not in {"solver", "evaluation", "name"}}
        config = parse_config(data)
        self.assertEqual(config.solver, "whittle")
        self.assertEqual(config.evaluation.delta, 0.5)
        self.assertFalse(config.ridge)

    def test_hash_depends_on_seed(self):
        config = parse_config(POISSON)
        self.assertNotEqual(config.with_seed(1).config_hash(), config.config_hash())
        self.assertIs(config.with_seed(None), config)
        self.assertEqual(len(config.config_hash()), 64)

    def test_evaluation_seed_follows_replicates(self):
        self.assertNotEqual(parse_config(POISSON).evaluation_seed, POISSON["seed"])

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config({**POISSON, "workers": 4})
        self.assertEqual(ctx.exception.details["keys"], ["workers"])

    def test_grid_span_must_fit_horizon(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config({**POISSON, "grid": {"delta": 1.0, "p": 50}})
        self.assertIn("grid", ctx.exception.details["fields"])

    def test_bad_fields(self):
        bad = [
            {"schema_version": 2},
            {"horizon": -1.0},
            {"replications": 0},
            {"seed": 2**64},
            {"solver": "gauss"},
            {"model": {"type": "cox"}},
            {"model": [1.0]},
            {"grid": {"delta": 0.1}},
            {"evaluation": {"burn_in": 100.0}},
            {"evaluation": {"stride": 1}},
            {"evaluation": {"streams": 1}},
        ]
        for patch in bad:
            with self.subTest(patch=patch), self.assertRaises(ConfigError):
                parse_config({**POISSON, **patch})

    def test_largest_seed(self):
        self.assertEqual(parse_config({**POISSON, "seed": 2**64 - 1}).seed, 2**64 - 1)

    def test_unstable_hawkes_keeps_type(self):
        with self.assertRaises(UnstableKernel):
            parse_config(unstable())

    def test_missing_model_parameters(self):
        with self.assertRaises(ConfigError):
            parse_config({**HAWKES, "model": {"type": "hawkes", "baseline": [0.5]}})

    def test_not_an_object(self):
        with self.assertRaises(ConfigError):
            parse_config([POISSON])


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


class TestPipeline(TempDirMixin, TestCase):
    def test_poisson_artifacts(self):
        out = run_pipeline(parse_config(POISSON), self.tmp / "run", record=False)
        for name in (
            "config.json",
            "streams/stream_0000.csv",
            "streams/stream_0019.csv",
            "covariance.json",
            "covariance_se.json",
            "kernel.json",
            "diagnostics.json",
            "predictor.json",
            "score.json",
            "trace.csv",
            "manifest.json",
        ):
            self.assertTrue((out / name).exists(), name)

    def test_poisson_kernel_is_null(self):
        """No excitation: the recovered kernel stays below four bootstrap SE."""
        out = run_pipeline(parse_config(POISSON), self.tmp / "run", record=False)
        recovery = read_json(out / "score.json")["kernel_recovery"]
        self.assertTrue(recovery["within_bound"], recovery)
        score = read_json(out / "score.json")["score"]
        self.assertIn("truth_mse", score)

    def test_manifest(self):
        config = parse_config(POISSON)
        out = run_pipeline(config, self.tmp / "run", record=False)
        manifest = read_json(out / MANIFEST)
        self.assertEqual(manifest["config_hash"], config.config_hash())
        self.assertEqual(manifest["schema_version"], 1)
        self.assertEqual(manifest["seeds"]["simulate"], 2024)
        self.assertEqual(manifest["seeds"]["evaluate"], config.evaluation_seed)
        self.assertEqual(set(manifest["versions"]), {"blpredict", "django", "numpy", "scipy"})
        self.assertNotIn(MANIFEST, manifest["artifacts"])
        self.assertEqual(
            manifest["artifacts"]["covariance.json"], sha256_file(out / "covariance.json")
        )

    def test_rerun_is_byte_identical(self):
        config = parse_config(HAWKES)
        a = run_pipeline(config, self.tmp / "a", record=False)
        b = run_pipeline(config, self.tmp / "b", record=False)
        self.assertEqual((a / MANIFEST).read_bytes(), (b / MANIFEST).read_bytes())

    def test_seed_changes_artifacts(self):
        config = parse_config(POISSON)
        a = read_json(run_pipeline(config, self.tmp / "a", record=False) / MANIFEST)
        b = read_json(run_pipeline(config.with_seed(1), self.tmp / "b", record=False) / MANIFEST)
        self.assertNotEqual(a["artifacts"]["streams/stream_0000.csv"], b["artifacts"]["streams/stream_0000.csv"])

    def test_hawkes_recovery_report(self):
        out = run_pipeline(parse_config(HAWKES), self.tmp / "run", record=False)
        doc = read_json(out / "score.json")
        self.assertEqual(doc["predictor"], "AR")
        recovery = doc["kernel_recovery"]
        self.assertEqual(recovery["baseline"], [0.5])
        self.assertGreaterEqual(recovery["sup_error"], 0.0)
        with (out / "trace.csv").open() as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(rows[0], ["t", "coordinate", "lambda_hat", "lambda_true"])
        self.assertNotEqual(rows[1][3], "")

    def test_innovations_solver(self):
        out = run_pipeline(parse_config(NEYMAN_SCOTT), self.tmp / "run", record=False)
        self.assertTrue((out / "innovations.json").exists())
        self.assertFalse((out / "kernel.json").exists())
        shot = read_json(out / "shot_kernel.json")
        self.assertEqual(shot["support"], 2.0)
        doc = read_json(out / "score.json")
        self.assertEqual(doc["predictor"], "MA")
        self.assertNotIn("truth_mse", doc["score"])

    def test_default_run_dir(self):
        config = parse_config(POISSON)
        with self.settings(BLP_OUTPUT_DIR=self.tmp):
            out = run_pipeline(config, record=False)
        self.assertEqual(out, self.tmp / f"poisson-null-{config.config_hash()[:12]}")

    @tag("slow")
    def test_hawkes_kernel_recovered_from_data(self):
        """Simulate, estimate and solve: the kernel comes back within 15% sup-norm."""
        data = {
            **HAWKES,
            "horizon": 5000.0,
            "replications": 200,
            "grid": {"delta": 0.05, "p": 160},
            "evaluation": {"delta": 0.5, "streams": 2, "burn_in": 20.0},
        }
        out = run_pipeline(parse_config(data), self.tmp / "run", record=False)
        recovery = read_json(out / "score.json")["kernel_recovery"]
        self.assertLess(recovery["relative_sup_error"], 0.15)
        cov = read_covariance_grid(out / "covariance.json")
        np.testing.assert_allclose(cov.mean_rates, [2.5], rtol=0.05)


# ---------------------------------------------------------------------------
# Run ledger
# ---------------------------------------------------------------------------


class TestRunLedger(TempDirMixin, TestCase):
    def test_completed_run_is_recorded(self):
        config = parse_config(POISSON)
        out = run_pipeline(config, self.tmp / "run", record=True)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, ExperimentRun.Status.COMPLETED)
        self.assertEqual(run.command, "pipeline")
        self.assertEqual(run.stage, "manifest")
        self.assertEqual(run.config_hash, config.config_hash())
        self.assertEqual(run.seed, "2024")
        self.assertEqual(run.artifacts, out)
        self.assertIsNotNone(run.completed_at)
        # created, then one save per stage and the final status
        self.assertGreaterEqual(run.history.count(), 8)

    def test_failed_stage_is_recorded(self):
        config = parse_config(POISSON)
        with self.assertRaises(SingularSystem) as ctx:
            with tracked_run("solve", config, self.tmp, record=True) as run:
                with stage("solve", run):
                    raise SingularSystem("block-Toeplitz system is singular", condition=1e18)
        self.assertEqual(ctx.exception.details["stage"], "solve")
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, ExperimentRun.Status.FAILED)
        self.assertEqual(run.stage, "solve")
        self.assertEqual(run.error["error"], "singular_system")
        self.assertEqual(run.error["details"]["stage"], "solve")

    def test_stage_keeps_inner_label(self):
        with self.assertRaises(InvalidParameter) as ctx:
            with stage("outer"):
                with stage("inner"):
                    raise InvalidParameter("bad")
        self.assertEqual(ctx.exception.details["stage"], "inner")

    @override_settings(BLP_RECORD_RUNS=False)
    def test_recording_can_be_disabled(self):
        run_pipeline(parse_config(POISSON), self.tmp / "run")
        self.assertFalse(ExperimentRun.objects.exists())


# ---------------------------------------------------------------------------
# Management commands
# ---------------------------------------------------------------------------


class TestCommands(TempDirMixin, TestCase):
    def call(self, name, *args, **options):
        out, err = StringIO(), StringIO()
        call_command(name, *args, stdout=out, stderr=err, **options)
        return out.getvalue(), err.getvalue()

    def test_stages_one_at_a_time(self):
        path = self.config_file(HAWKES)
        run = self.tmp / "run"
        self.call("simulate", config=path, out=run)
        self.assertEqual(len(list((run / "streams").glob("*.csv"))), 4)
        self.call("estimate_cov", config=path, out=run)
        stdout, _ = self.call("solve", config=path, out=run, solver="whittle")
        self.assertEqual(json.loads(stdout.splitlines()[0])["solver"], "whittle")
        self.assertTrue((run / "kernel.json").exists())
        self.call("predict", config=path, out=run, solver="whittle", format="csv")
        self.assertTrue((run / "trace.csv").exists())
        self.assertTrue((run / "score.json").exists())
        commands = set(ExperimentRun.objects.values_list("command", flat=True))
        self.assertEqual(commands, {"simulate", "estimate_cov", "solve", "predict"})

    def test_innovations_command(self):
        path = self.config_file({**NEYMAN_SCOTT, "solver": "whittle"})
        run = self.tmp / "run"
        self.call("simulate", config=path, out=run)
        self.call("estimate_cov", config=path, out=run)
        stdout, _ = self.call("innovations", config=path, out=run)
        self.assertIn("leakage", json.loads(stdout.splitlines()[0]))
        self.assertTrue((run / "innovations.json").exists())

    def test_pipeline_command(self):
        path = self.config_file(POISSON)
        stdout, _ = self.call("pipeline", config=path, out=self.tmp / "run", seed=5)
        doc = json.loads(stdout.splitlines()[0])
        self.assertEqual(doc["config_hash"], parse_config(POISSON).with_seed(5).config_hash())
        self.assertEqual(read_json(self.tmp / "run" / MANIFEST)["seeds"]["simulate"], 5)

    def test_unstable_config_exit_code(self):
        path = self.config_file(unstable())
        err = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command("pipeline", config=path, out=self.tmp / "run", stdout=StringIO(), stderr=err)
        self.assertEqual(ctx.exception.returncode, 3)
        record = json.loads(err.getvalue().strip().splitlines()[-1])
        self.assertEqual(record["error"], "unstable_kernel")
        self.assertEqual(record["details"]["stage"], "validate")
        self.assertFalse((self.tmp / "run").exists())

    def test_config_error_exit_code(self):
        path = self.config_file({**POISSON, "horizon": 1.0})
        with self.assertRaises(CommandError) as ctx:
            self.call("simulate", config=path, out=self.tmp / "run")
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_config_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("simulate", out=self.tmp / "run")
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_artifacts_exit_code(self):
        path = self.config_file(POISSON)
        with self.assertRaises(CommandError) as ctx:
            self.call("estimate_cov", config=path, out=self.tmp / "empty")
        self.assertEqual(ctx.exception.returncode, 4)

    def test_solve_rejects_innovations(self):
        path = self.config_file(POISSON)
        with self.assertRaises(CommandError) as ctx:
            self.call("solve", config=path, out=self.tmp / "run", solver="innovations")
        self.assertEqual(ctx.exception.returncode, 2)

    def test_bench_command(self):
        stdout, _ = self.call(
            "bench", sizes=[8, 16, 32, 64], d=1, repeats=1, format="csv", out=self.tmp
        )
        lines = stdout.splitlines()
        self.assertEqual(lines[0], "solver,p,seconds")
        self.assertTrue(any(line.startswith("whittle: slope") for line in lines))
        self.assertTrue((self.tmp / "bench.json").exists())

    def test_bench_needs_four_sizes(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("bench", sizes=[8, 16, 32])
        self.assertEqual(ctx.exception.returncode, 2)

    def test_load_config_from_file(self):
        config = load_config(self.config_file(NEYMAN_SCOTT))
        self.assertIsInstance(config, ExperimentConfig)
        self.assertEqual(config.solver, "innovations")


# ---------------------------------------------------------------------------
# Bench
# ---------------------------------------------------------------------------


class TestBench(SimpleTestCase):
    def test_small_bench(self):
        report = run_bench([8, 16, 32, 64], d=2, seed=3, repeats=2)
        self.assertEqual(report.sizes, [8, 16, 32, 64])
        self.assertEqual(set(report.seconds), {"direct", "whittle"})
        for times in report.seconds.values():
            self.assertTrue(all(t > 0 for t in times))
        self.assertLessEqual(report.max_disagreement, 1e-6)
        fit = report.slopes["whittle"]
        self.assertLess(fit.ci_low, fit.slope)
        self.assertGreater(fit.ci_high, fit.slope)
        self.assertEqual(report.to_dict()["d"], 2)

    def test_sizes_validated(self):
        with self.assertRaises(InvalidParameter):
            run_bench([8, 16, 32])
        with self.assertRaises(InvalidParameter):
            run_bench([8, 16, 16, 32])

    def test_fit_slope_exact(self):
        sizes = [10, 20, 40, 80]
        fit = fit_slope(sizes, [1e-6 * p**2 for p in sizes])
        self.assertAlmostEqual(fit.slope, 2.0, places=10)
        self.assertAlmostEqual(fit.ci_low, 2.0, places=6)

    @tag("slow")
    def test_levinson_beats_dense(self):
        """Cubic dense solve against the quadratic recursion on d=2."""
        report = run_bench([256, 512, 1024, 2048, 4096], d=2, seed=0)
        self.assertGreaterEqual(report.slopes["direct"].slope, 2.6)
        self.assertLessEqual(report.slopes["whittle"].slope, 2.3)
