"""
Experiment pipeline: simulate -> estimate -> solve -> assemble -> evaluate.

Each stage reads and writes artifacts in one run directory, so the stages can
also be driven one at a time from the management commands:

    config.json            canonical copy of the config
    streams/stream_NNNN.csv  simulated training streams (+ JSON sidecars)
    covariance.json        pooled covariance density
    covariance_se.json     stream bootstrap standard errors
    kernel.json            solved kernel (Wiener-Hopf solvers)
    diagnostics.json       solver diagnostics
    innovations.json       innovations solution (innovations solver)
    shot_kernel.json       moving-average kernel estimate
    predictor.json         assembled predictor
    score.json             evaluation report
    trace.csv              intensity trace of the first evaluation stream
    manifest.json          hashes of the config and every artifact
"""
from __future__ import annotations

import functools
import hashlib
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator

import django
import numpy as np
import scipy
from django.utils import timezone

import blpredict
from experiments.config import INNOVATIONS, ExperimentConfig
from experiments.models import ExperimentRun
from innovations import InnovationsSolution, shot_kernel_from_solution, solve_innovations
from moments import bootstrap_covariance_se, estimate_covariance_density
from pointprocess import CovarianceGrid, EventStream, KernelGrid, sample_kernel
from pointprocess.conf import get_setting, output_dir
from pointprocess.errors import ArtifactIOError, PointProcessError
from pointprocess.formats import (
    read_covariance_grid,
    read_json,
    read_kernel_grid,
    read_stream,
    write_covariance_grid,
    write_json,
    write_kernel,
    write_stream_csv,
)
from prediction import Predictor, assemble_predictor, evaluate_predictor, predict_intensity, write_trace_csv
from prediction.evaluation import bin_edges
from simulators import split_model_spec
from simulators.hawkes import HawkesParams, simulate_hawkes_path
from simulators.neyman_scott import NeymanScottParams
from simulators.poisson import PoissonParams
from simulators.replicates import simulate_replicates
from simulators.rng import replicate_seed
from solvers import DiscretisedWH, get_solver

logger = logging.getLogger(__name__)

CONFIG = "config.json"
STREAMS = "streams"
COVARIANCE = "covariance.json"
COVARIANCE_SE = "covariance_se.json"
KERNEL = "kernel.json"
DIAGNOSTICS = "diagnostics.json"
INNOVATIONS_SOLUTION = "innovations.json"
SHOT_KERNEL = "shot_kernel.json"
PREDICTOR = "predictor.json"
SCORE = "score.json"
TRACE = "trace.csv"
MANIFEST = "manifest.json"


@contextmanager
def stage(name: str, run: ExperimentRun | None = None) -> Iterator[None]:
    """Label errors raised inside with the stage name."""
    if run is not None:
        run.stage = name
        run.save(update_fields=["stage"])
    logger.info("stage %s", name)
    try:
        yield
    except PointProcessError as e:
        e.details.setdefault("stage", name)
        raise


@contextmanager
def tracked_run(command: str, config: ExperimentConfig, out: Path, record: bool | None = None):
    """Keep an ExperimentRun row in step with a command's progress."""
    if record is None:
        record = bool(get_setting("BLP_RECORD_RUNS"))
    run = None
    if record:
        run = ExperimentRun.objects.create(
            name=config.name,
            command=command,
            status=ExperimentRun.Status.RUNNING,
            config=config.to_dict(),
            config_hash=config.config_hash(),
            seed=str(config.seed),
            artifact_dir=str(out),
            started_at=timezone.now(),
        )
    try:
        yield run
    except Exception as e:
        if run is not None:
            run.status = ExperimentRun.Status.FAILED
            if isinstance(e, PointProcessError):
                run.error = e.to_dict()
            else:
                run.error = {"error": type(e).__name__, "message": str(e), "details": {}}
            run.completed_at = timezone.now()
            run.save(update_fields=["status", "error", "completed_at"])
        raise
    if run is not None:
        run.status = ExperimentRun.Status.COMPLETED
        run.completed_at = timezone.now()
        run.save(update_fields=["status", "completed_at"])


def default_run_dir(config: ExperimentConfig) -> Path:
    return output_dir() / f"{config.name or 'run'}-{config.config_hash()[:12]}"


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def simulate_stage(config: ExperimentConfig, out: Path) -> list[EventStream]:
    _, params = split_model_spec(config.model)
    streams = simulate_replicates(
        config.model_type, params, config.horizon, config.seed, config.replications
    )
    for r, stream in enumerate(streams):
        write_stream_csv(stream, Path(out) / STREAMS / f"stream_{r:04d}.csv")
    write_json(config.to_dict(), Path(out) / CONFIG)
    return streams


def load_streams(out: Path) -> list[EventStream]:
    paths = sorted((Path(out) / STREAMS).glob("stream_*.csv"))
    if not paths:
        raise ArtifactIOError(f"no streams under {Path(out) / STREAMS}", path=str(out))
    return [read_stream(p) for p in paths]


def estimate_stage(
    config: ExperimentConfig, out: Path, streams: list[EventStream] | None = None
) -> CovarianceGrid:
    streams = streams if streams is not None else load_streams(out)
    cov = estimate_covariance_density(streams, config.grid)
    se = bootstrap_covariance_se(streams, config.grid, config.resamples, seed=config.seed)
    write_covariance_grid(cov, Path(out) / COVARIANCE)
    write_json(
        {
            "delta": config.grid.step,
            "p": config.grid.length,
            "d": cov.dim,
            "values": [row.reshape(-1).tolist() for row in se],
        },
        Path(out) / COVARIANCE_SE,
    )
    return cov


def _shot_support(config: ExperimentConfig) -> float | None:
    _, params = split_model_spec(config.model)
    if isinstance(params, NeymanScottParams):
        return float(params.shot_kernel.support.max())
    return None


def solve_stage(
    config: ExperimentConfig,
    out: Path,
    cov: CovarianceGrid | None = None,
    solver: str | None = None,
) -> KernelGrid | InnovationsSolution:
    cov = cov if cov is not None else read_covariance_grid(Path(out) / COVARIANCE)
    key = solver or config.solver
    if key == INNOVATIONS:
        solution = solve_innovations(cov)
        write_json(solution.to_dict(), Path(out) / INNOVATIONS_SOLUTION)
        estimate = shot_kernel_from_solution(solution, support=_shot_support(config))
        write_json(
            {
                "kernel": estimate.kernel.to_dict(),
                "support": estimate.support,
                "leakage": estimate.leakage,
                "flagged": estimate.flagged,
            },
            Path(out) / SHOT_KERNEL,
        )
        return solution
    wh_solver = get_solver(key)
    problem = DiscretisedWH(cov, ridge=config.ridge)
    kernel = wh_solver.solve(problem)
    write_kernel(kernel, Path(out) / KERNEL)
    report = wh_solver.report(problem, kernel)
    report["solver"] = key
    write_json(report, Path(out) / DIAGNOSTICS)
    return kernel


def load_solution(config: ExperimentConfig, out: Path) -> KernelGrid | InnovationsSolution:
    if config.solver == INNOVATIONS:
        return InnovationsSolution.from_dict(read_json(Path(out) / INNOVATIONS_SOLUTION))
    return read_kernel_grid(Path(out) / KERNEL)


def assemble_stage(
    out: Path, solved: KernelGrid | InnovationsSolution, cov: CovarianceGrid
) -> Predictor:
    if isinstance(solved, InnovationsSolution):
        pred = Predictor.from_innovations(solved, cov.mean_rates)
    else:
        pred = assemble_predictor(solved, cov.mean_rates)
    write_json(pred.to_dict(), Path(out) / PREDICTOR)
    return pred


def _constant_intensity(rates: np.ndarray, times: np.ndarray) -> np.ndarray:
    return np.broadcast_to(rates, (np.size(times), rates.size)).copy()


def evaluation_battery(config: ExperimentConfig) -> tuple[list[EventStream], list | None]:
    """Fresh streams for scoring, with the true intensity where the model exposes it."""
    _, params = split_model_spec(config.model)
    n, seed = config.evaluation.streams, config.evaluation_seed
    if isinstance(params, HawkesParams):
        paths = [
            simulate_hawkes_path(params, config.horizon, replicate_seed(seed, r)) for r in range(n)
        ]
        return [p.stream for p in paths], [p.intensity for p in paths]
    streams = simulate_replicates(config.model_type, params, config.horizon, seed, n)
    if isinstance(params, PoissonParams):
        truth = functools.partial(_constant_intensity, np.asarray(params.rates, dtype=float))
        return streams, [truth] * n
    return streams, None


def _covariance_se(out: Path, dim: int) -> np.ndarray | None:
    path = Path(out) / COVARIANCE_SE
    if not path.exists():
        return None
    doc = read_json(path)
    return np.asarray(doc["values"], dtype=float).reshape(-1, dim, dim)


def kernel_recovery(
    config: ExperimentConfig, kernel: KernelGrid, pred: Predictor, se: np.ndarray | None = None
) -> dict[str, Any] | None:
    """
    Compare a solved kernel with the kernel that generated the data.

    Hawkes models report the sup-norm error against the true kernel. Poisson
    models have a zero kernel; the recovered one is set against four
    bootstrap standard errors of the covariance, scaled by the smallest rate.
    """
    _, params = split_model_spec(config.model)
    if isinstance(params, HawkesParams):
        truth = sample_kernel(params.kernel, kernel.grid)
        error = np.abs(kernel.values - truth.values)
        peak = float(np.abs(truth.values).max())
        return {
            "sup_error": float(error.max()),
            "relative_sup_error": float(error.max() / peak) if peak else None,
            "baseline": params.baseline.tolist(),
            "intercept": pred.intercept.tolist(),
        }
    if isinstance(params, PoissonParams):
        out: dict[str, Any] = {"sup_kernel": float(np.abs(kernel.values).max())}
        if se is not None:
            out["se_bound"] = float(4.0 * se.max() / pred.mean_rates.min())
            out["within_bound"] = out["sup_kernel"] < out["se_bound"]
        return out
    return None


def evaluate_stage(config: ExperimentConfig, out: Path, pred: Predictor, write_trace: bool = True):
    streams, truths = evaluation_battery(config)
    ev = config.evaluation
    report = evaluate_predictor(pred, streams, ev.delta, intensities=truths, burn_in=ev.burn_in)
    doc: dict[str, Any] = {"score": report.to_dict(), "predictor": pred.form}
    if isinstance(pred.kernel, KernelGrid):
        se = _covariance_se(out, pred.dim)
        recovery = kernel_recovery(config, pred.kernel, pred, se)
        if recovery is not None:
            doc["kernel_recovery"] = recovery
    write_json(doc, Path(out) / SCORE)
    if write_trace:
        times = bin_edges(streams[0], ev.delta, ev.burn_in)
        predicted = predict_intensity(pred, streams[0], times)
        truth = truths[0](times) if truths is not None else None
        write_trace_csv(Path(out) / TRACE, times, predicted, truth)
    return report


# ---------------------------------------------------------------------------
# Manifest and pipeline
# ---------------------------------------------------------------------------


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(config: ExperimentConfig, out: Path) -> Path:
    out = Path(out)
    artifacts = {
        p.relative_to(out).as_posix(): sha256_file(p)
        for p in sorted(out.rglob("*"))
        if p.is_file() and p.name != MANIFEST
    }
    manifest = {
        "config_hash": config.config_hash(),
        "schema_version": config.schema_version,
        "seeds": {
            "simulate": config.seed,
            "bootstrap": config.seed,
            "evaluate": config.evaluation_seed,
        },
        "versions": {
            "blpredict": blpredict.__version__,
            "django": django.get_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "artifacts": artifacts,
    }
    return write_json(manifest, out / MANIFEST)


def run_pipeline(
    config: ExperimentConfig, out: Path | None = None, record: bool | None = None
) -> Path:
    """
    Run every stage into ``out`` and write the manifest.

    Reruns of the same config give byte-identical artifacts. Errors keep
    their type and carry the failing stage in ``details["stage"]``.
    """
    out = Path(out) if out is not None else default_run_dir(config)
    with tracked_run("pipeline", config, out, record) as run:
        with stage("validate", run):
            split_model_spec(config.model)
        with stage("simulate", run):
            streams = simulate_stage(config, out)
        with stage("estimate", run):
            cov = estimate_stage(config, out, streams)
        with stage("solve", run):
            solved = solve_stage(config, out, cov)
        with stage("assemble", run):
            pred = assemble_stage(out, solved, cov)
        with stage("evaluate", run):
            evaluate_stage(config, out, pred)
        with stage("manifest", run):
            write_manifest(config, out)
    logger.info("pipeline finished: %s (config %s)", out, config.config_hash()[:12])
    return out


__all__ = [
    "assemble_stage",
    "estimate_stage",
    "evaluate_stage",
    "load_solution",
    "load_streams",
    "run_pipeline",
    "simulate_stage",
    "solve_stage",
    "stage",
    "tracked_run",
    "write_manifest",
]
