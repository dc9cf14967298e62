# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Command-line interface for soc-dual-control."""

from __future__ import annotations

import sys
from collections.abc import Sequence

import click

from . import __version__
from .errors import ConfigError, DualControlError, RunFailedError
from .harness.config import CONTROLLER_CHOICES, load_config, reference_config
from .harness.monte_carlo import McSummary, configure_logging, run_monte_carlo

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


@click.command()
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Experiment JSON file (built-in reference experiment if omitted)",
)
@click.option("--runs", type=click.IntRange(min=1), default=None, help="Runs per arm (M)")
@click.option(
    "--controller",
    type=click.Choice(CONTROLLER_CHOICES),
    default=None,
    help="Controller arm(s) to run",
)
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Master seed")
@click.option(
    "--out",
    type=click.Path(file_okay=False),
    default="results",
    show_default=True,
    help="Output directory",
)
@click.option("--horizon", type=click.IntRange(min=1), default=None, help="Horizon N")
@click.option(
    "--candidates", type=click.IntRange(min=1), default=None, help="Dual candidates L"
)
@click.option("--steps", type=click.IntRange(min=1), default=None, help="Steps T per run")
@click.option("--trace", is_flag=True, help="Write trace_<run>.csv per-step logs")
@click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Worker processes",
)
@click.option(
    "--timing", is_flag=True, help="Record step times in runs.csv (not reproducible)"
)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose (debug) logging")
@click.option("--info-logging", is_flag=True, help="Enable info-level logging")
@click.version_option(version=__version__)
def main(
    config_path: str | None,
    runs: int | None,
    controller: str | None,
    seed: int | None,
    out: str,
    horizon: int | None,
    candidates: int | None,
    steps: int | None,
    trace: bool,
    workers: int,
    timing: bool,
    verbose: bool,
    info_logging: bool,
) -> None:
    """SOC dual control - compare linear MPC with randomized dual control.

    Runs paired closed-loop Monte Carlo simulations of a multi-battery system
    and writes runs.csv and summary.json to the output directory.
    """
    configure_logging(verbose, info_logging)

    try:
        cfg = load_config(config_path) if config_path else reference_config()
        cfg = cfg.with_overrides(
            runs=runs,
            controller=controller,
            seed=seed,
            horizon=horizon,
            num_candidates=candidates,
            steps=steps,
        )
    except ConfigError as e:
        click.echo(f"Config error: {e}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    click.echo(
        f"🔋 {cfg.runs} run(s) of {' vs '.join(cfg.arms)}: "
        f"n={cfg.model.n}, N={cfg.horizon}, T={cfg.steps}, L={cfg.num_candidates}, "
        f"seed={cfg.seed}"
    )

    try:
        summary = run_monte_carlo(
            cfg,
            out_dir=out,
            workers=workers,
            trace=trace,
            timing=timing,
            verbose=verbose,
            info_logging=info_logging,
        )
    except RunFailedError as e:
        click.echo(f"Run failed: {e}", err=True)
        sys.exit(EXIT_RUNTIME_ERROR)
    except (DualControlError, OSError) as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_RUNTIME_ERROR)

    show_summary(summary)
    click.echo(f"✅ Results written to {out}")


def show_summary(summary: McSummary) -> None:
    """Print per-arm means and the dual-vs-linear comparison."""
    for arm, stats in summary.statistics().items():
        line = (
            f"  {arm}: cost {stats['cost']['mean']:.4f}, "
            f"est_error {stats['est_error']['mean']:.4f}, "
            f"cov_trace {stats['cov_trace']['mean']:.4f}"
        )
        if "step_ms" in stats:
            line += f", step {stats['step_ms']['mean']:.1f} ms"
        click.echo(line)

    improvements = summary.improvements()
    for metric in ("cost", "est_error", "cov_trace"):
        value = improvements.get(metric)
        if value is not None:
            click.echo(f"  dual vs linear-mpc {metric}: {100.0 * value:+.1f}% reduction")


def cli_main(args: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting.

    Args:
        args: Command-line arguments (defaults to ``sys.argv[1:]``)

    Returns:
        0 on success, 1 on usage or configuration errors, 2 on runtime failures
    """
    try:
        main.main(
            args=list(args) if args is not None else None,
            prog_name="soc-dual-control",
            standalone_mode=False,
        )
    except click.ClickException as e:
        e.show()
        return EXIT_CONFIG_ERROR
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_CONFIG_ERROR
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_OK
    return EXIT_OK


def run() -> None:
    """Console-script entry point."""
    sys.exit(cli_main())


if __name__ == "__main__":
    run()
