# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Paired Monte Carlo comparison of controller arms."""

from __future__ import annotations

import json
import logging
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from ..errors import ContractError, RunFailedError
from .closed_loop import RunRecord, run_closed_loop
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

RUNS_COLUMNS = ["run", "controller", "cost", "est_error", "cov_trace", "step_ms"]
METRICS = ("cost", "est_error", "cov_trace")

RUNS_FILE = "runs.csv"
SUMMARY_FILE = "summary.json"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(verbose: bool = False, info_logging: bool = False) -> None:
    """Configure root logging: DEBUG if verbose, INFO if info_logging, else WARNING."""
    if verbose:
        log_level = logging.DEBUG
    elif info_logging:
        log_level = logging.INFO
    else:
        log_level = logging.WARNING

    logging.basicConfig(level=log_level, format=LOG_FORMAT)


def run_seeds(master_seed: int, runs: int) -> list[int]:
    """Per-run seeds spawned from the master seed, shared by every arm."""
    children = np.random.SeedSequence(master_seed).spawn(runs)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def _run_job(job: tuple[ExperimentConfig, str, int, int]) -> RunRecord:
    """Worker function that runs one (arm, run) job."""
    cfg, arm, run_index, seed = job
    try:
        return run_closed_loop(cfg, seed, arm)
    except Exception as e:
        raise RunFailedError(run_index, arm, seed, f"{type(e).__name__}: {e}") from e


def _variance(values: np.ndarray) -> float:
    return float(np.var(values, ddof=1)) if values.size > 1 else 0.0


def _relative_reduction(baseline: float, candidate: float) -> float | None:
    if baseline == 0.0:
        return None
    return (baseline - candidate) / baseline


@dataclass(frozen=True, eq=False)
class McSummary:
    """Per-run metrics of every arm and the statistics derived from them.

    Attributes:
        runs: Per-run table with columns ``run, controller, cost, est_error,
            cov_trace, step_ms`` (one row per run and arm)
        records: Full run records keyed by arm
        master_seed: Seed the per-run seeds were spawned from
    """

    runs: pd.DataFrame
    records: dict[str, list[RunRecord]] = field(default_factory=dict, repr=False)
    master_seed: int = 0

    @property
    def arms(self) -> list[str]:
        """Arms present in the table, in first-appearance order."""
        return list(dict.fromkeys(self.runs["controller"]))

    @property
    def num_runs(self) -> int:
        """M."""
        return int(self.runs["run"].nunique())

    def values(self, arm: str, metric: str) -> np.ndarray:
        """Per-run values of ``metric`` for ``arm`` in run order."""
        rows = self.runs[self.runs["controller"] == arm].sort_values("run")
        if rows.empty:
            raise ContractError(f"No runs recorded for controller '{arm}'")
        return rows[metric].to_numpy(dtype=float)

    def statistics(self) -> dict[str, dict[str, dict[str, float]]]:
        """{arm: {metric: {mean, var}}}, including mean controller step time."""
        stats: dict[str, dict[str, dict[str, float]]] = {}
        for arm in self.arms:
            arm_stats = {}
            for metric in METRICS:
                values = self.values(arm, metric)
                arm_stats[metric] = {
                    "mean": float(np.mean(values)),
                    "var": _variance(values),
                }
            step_ms = np.array(
                [record.mean_step_ms for record in self.records.get(arm, [])]
            )
            if step_ms.size:
                arm_stats["step_ms"] = {
                    "mean": float(np.mean(step_ms)),
                    "var": _variance(step_ms),
                }
            stats[arm] = arm_stats
        return stats

    def improvements(self) -> dict[str, float | None]:
        """Relative reductions of the dual arm against linear MPC.

        Mean reductions are keyed by metric; ``<metric>_var`` keys hold the
        reduction of the per-run variance. ``step_time_ratio`` is the dual
        step time over the linear step time.
        """
        if not {"linear-mpc", "dual"} <= set(self.arms):
            return {}
        stats = self.statistics()
        linear, dual = stats["linear-mpc"], stats["dual"]
        result: dict[str, float | None] = {}
        for metric in METRICS:
            result[metric] = _relative_reduction(
                linear[metric]["mean"], dual[metric]["mean"]
            )
        for metric in ("cost", "est_error"):
            result[f"{metric}_var"] = _relative_reduction(
                linear[metric]["var"], dual[metric]["var"]
            )
        if "step_ms" in linear and "step_ms" in dual and linear["step_ms"]["mean"] > 0:
            result["step_time_ratio"] = dual["step_ms"]["mean"] / linear["step_ms"]["mean"]
        return result

    def to_dict(self) -> dict[str, Any]:
        """Summary document written to ``summary.json``."""
        document: dict[str, Any] = dict(self.statistics())
        document["improvements"] = self.improvements()
        document["runs"] = self.num_runs
        document["seed"] = self.master_seed
        return document


def _runs_frame(
    results: list[tuple[int, str, RunRecord]], timing: bool
) -> pd.DataFrame:
    rows = [
        {
            "run": run_index,
            "controller": arm,
            "cost": record.realized_cost,
            "est_error": record.mean_estimation_error,
            "cov_trace": record.mean_cov_trace,
            "step_ms": record.mean_step_ms if timing else np.nan,
        }
        for run_index, arm, record in results
    ]
    return pd.DataFrame(rows, columns=RUNS_COLUMNS)


def write_outputs(
    summary: McSummary, out_dir: str | Path, trace: bool = False
) -> list[Path]:
    """Write ``runs.csv``, ``summary.json`` and optional per-run traces.

    Returns:
        Paths of the files written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    runs_path = out_dir / RUNS_FILE
    summary.runs.to_csv(runs_path, index=False, na_rep="")
    written.append(runs_path)

    summary_path = out_dir / SUMMARY_FILE
    summary_path.write_text(json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")
    written.append(summary_path)

    if trace:
        for run_index in range(summary.num_runs):
            frames = [
                summary.records[arm][run_index].trace_frame() for arm in summary.arms
            ]
            trace_path = out_dir / f"trace_{run_index}.csv"
            pd.concat(frames, ignore_index=True).to_csv(trace_path, index=False, na_rep="")
            written.append(trace_path)

    for path in written:
        logger.info(f"Wrote {path}")
    return written


def run_monte_carlo(
    cfg: ExperimentConfig,
    runs: int | None = None,
    master_seed: int | None = None,
    out_dir: str | Path | None = None,
    *,
    workers: int = 1,
    trace: bool = False,
    timing: bool = False,
    verbose: bool = False,
    info_logging: bool = False,
) -> McSummary:
    """Run M closed loops per arm with paired per-run seeds.

    Args:
        cfg: Experiment configuration (``cfg.controller`` selects the arms)
        runs: M (defaults to ``cfg.runs``)
        master_seed: Master seed (defaults to ``cfg.seed``)
        out_dir: Directory for ``runs.csv`` and ``summary.json`` (no files if None)
        workers: Worker processes; 1 runs in-process
        trace: Also write ``trace_<run>.csv`` per run
        timing: Fill the ``step_ms`` column (makes ``runs.csv`` nondeterministic)
        verbose: DEBUG logging in worker processes
        info_logging: INFO logging in worker processes

    Returns:
        McSummary

    Raises:
        RunFailedError: If any run fails; names the run, arm and seed
    """
    runs = cfg.runs if runs is None else runs
    master_seed = cfg.seed if master_seed is None else master_seed
    if runs < 1:
        raise ContractError(f"runs must be at least 1, got {runs}")
    if workers < 1:
        raise ContractError(f"workers must be at least 1, got {workers}")

    seeds = run_seeds(master_seed, runs)
    arms = cfg.arms
    jobs = [(cfg, arm, index, seed) for index, seed in enumerate(seeds) for arm in arms]
    logger.info(
        f"Running {runs} paired runs for {', '.join(arms)} "
        f"(seed {master_seed}, {workers} worker{'s' if workers > 1 else ''})"
    )

    if workers == 1:
        records = [_run_job(job) for job in jobs]
    else:
        with multiprocessing.Pool(
            processes=workers,
            initializer=configure_logging,
            initargs=(verbose, info_logging),
        ) as pool:
            records = pool.map(_run_job, jobs)

    results = [(job[2], job[1], record) for job, record in zip(jobs, records, strict=True)]
    by_arm: dict[str, list[RunRecord]] = {arm: [] for arm in arms}
    for _, arm, record in results:
        by_arm[arm].append(record)

    summary = McSummary(
        runs=_runs_frame(results, timing), records=by_arm, master_seed=master_seed
    )
    for arm, arm_stats in summary.statistics().items():
        logger.info(
            f"{arm}: cost {arm_stats['cost']['mean']:.4f}, "
            f"est_error {arm_stats['est_error']['mean']:.4f}, "
            f"cov_trace {arm_stats['cov_trace']['mean']:.4f}"
        )

    if out_dir is not None:
        write_outputs(summary, out_dir, trace=trace)
    return summary
