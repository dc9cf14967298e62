#!/usr/bin/env python3
"""Invoke tasks for soc-dual-control project automation."""

import shutil
from pathlib import Path

from invoke.context import Context
from invoke.tasks import task

PACKAGE = "soc_dual_control"


@task
def clean(_: Context) -> None:
    """Clean build artifacts, cache files, and experiment output."""
    print("🧹 Cleaning build artifacts and cache files...")

    dirs_to_clean = [
        "build",
        "dist",
        "*.egg-info",
        ".pytest_cache",
        ".ruff_cache",
        ".coverage",
        "htmlcov",
        "__pycache__",
        "results",
    ]

    for pattern in dirs_to_clean:
        if "*" in pattern or pattern == "__pycache__":
            for path in Path(".").glob(f"**/{pattern}"):
                if path.is_dir():
                    print(f"  Removing directory: {path}")
                    shutil.rmtree(path, ignore_errors=True)
                elif path.is_file():
                    path.unlink(missing_ok=True)
        elif Path(pattern).is_dir():
            print(f"  Removing directory: {pattern}")
            shutil.rmtree(pattern, ignore_errors=True)
        elif Path(pattern).is_file():
            Path(pattern).unlink()

    print("✅ Clean completed")


@task
def format(ctx: Context) -> None:
    """Format code with ruff."""
    print("🎨 Formatting code with ruff...")
    ctx.run("ruff format src tests")
    print("✅ Code formatting completed")


@task
def lint(ctx: Context, fix: bool = False) -> None:
    """Run linting with ruff.

    Args:
        fix: Automatically fix fixable issues (default: False)
    """
    print("🔍 Linting code with ruff...")
    cmd = "ruff check src tests"
    if fix:
        cmd += " --fix"
    ctx.run(cmd)
    print("✅ Linting completed")


@task
def typecheck(ctx: Context) -> None:
    """Run type checking with pyright."""
    print("🔬 Type checking with pyright...")
    ctx.run(f"pyright src/{PACKAGE}")
    print("✅ Type checking completed")


@task
def spell(ctx: Context, fix: bool = False) -> None:
    """Run spell checking with codespell."""
    print("📝 Spell checking with codespell...")
    ctx.run("codespell --write-changes" if fix else "codespell")
    print("✅ Spell checking completed")


@task
def security(ctx: Context) -> None:
    """Run security analysis with bandit."""
    print("🔒 Running security analysis with bandit...")
    ctx.run(f"bandit -r src/{PACKAGE}")
    print("✅ Bandit analysis completed")


@task
def reuse_lint(ctx: Context) -> None:
    """Verify REUSE compliance (check SPDX headers)."""
    print("📋 Checking REUSE compliance...")
    ctx.run("reuse lint", timeout=30)
    print("✅ REUSE compliance check passed")


@task
def test(
    ctx: Context, coverage: bool = True, verbose: bool = False, fast: bool = False
) -> None:
    """Run tests with pytest.

    Args:
        coverage: Generate coverage report (default: True)
        verbose: Run with verbose output (default: False)
        fast: Skip tests marked slow (moment checks, statistical comparisons)
    """
    print("🧪 Running tests with pytest...")

    cmd = "pytest"
    if not coverage:
        cmd += " --no-cov"
    if verbose:
        cmd += " -v"
    if fast:
        cmd += " -m 'not slow'"
    cmd += " tests"

    ctx.run(cmd)
    print("✅ Tests completed")


@task
def experiment(
    ctx: Context,
    config: str = "configs/reference.json",
    runs: int = 0,
    workers: int = 1,
    out: str = "results",
) -> None:
    """Run the paired Monte Carlo experiment.

    Args:
        config: Experiment JSON file (default: configs/reference.json)
        runs: Runs per arm; 0 keeps the value from the config
        workers: Worker processes (default: 1)
        out: Output directory (default: results)
    """
    print(f"🔋 Running experiment from {config}...")
    cmd = f"soc-dual-control --config {config} --out {out} --workers {workers}"
    if runs:
        cmd += f" --runs {runs}"
    ctx.run(cmd)
    print(f"✅ Experiment written to {out}/")


@task(pre=[format, lint, typecheck, spell, security])
def quality(_: Context) -> None:
    """Run code quality checks: format, lint, typecheck, spell check and security.

    Does NOT run tests - use 'invoke test' separately for functional testing.
    """
    print("🎯 Quality checks completed successfully!")


@task(pre=[clean])
def build(ctx: Context) -> None:
    """Build the package for distribution."""
    print("🔨 Building package...")
    ctx.run("uv build")

    print("\n📦 Built files:")
    dist_path = Path("dist")
    if dist_path.exists():
        for file in sorted(dist_path.glob("*")):
            print(f"  {file.name} ({file.stat().st_size / 1024:.1f}K)")

    print("✅ Build completed")


@task
def install(ctx: Context, dev: bool = False) -> None:
    """Install the package in editable mode.

    Args:
        dev: Install with development dependencies (default: False)
    """
    print("📥 Installing package...")
    ctx.run("uv sync --group dev" if dev else "uv pip install -e .")
    print("✅ Installation completed")


@task
def docs(ctx: Context) -> None:
    """Build documentation with MkDocs."""
    print("📚 Building documentation...")
    ctx.run("mkdocs build")
    print("✅ Documentation built to site/")


@task
def docs_serve(ctx: Context) -> None:
    """Serve documentation locally with live reload."""
    print("📚 Serving documentation at http://127.0.0.1:8000")
    ctx.run("mkdocs serve")


@task
def dev_setup(ctx: Context) -> None:
    """Set up development environment."""
    print("🔧 Setting up development environment...")
    ctx.run("uv sync --group dev")
    ctx.run("pre-commit install")
    print("✅ Development environment setup completed")


@task
def all(ctx: Context) -> None:
    """Run complete CI pipeline: clean, quality checks, tests, and build."""
    print("🎯 Running complete CI pipeline...")
    clean(ctx)
    quality(ctx)
    test(ctx)
    build(ctx)
    print("🎉 Complete pipeline finished successfully!")
