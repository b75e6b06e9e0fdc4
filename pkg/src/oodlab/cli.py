"""Command-line entry point: ``oodlab {check,curve,counterexample,verdict}``."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import io as lab_io
from .errors import NoCounterexampleError, OodLabError
from .experiments import (
    ExperimentConfig,
    curve_header,
    fitted_slope,
    run_condition_report,
    run_counterexample,
    run_learning_curve,
    run_verdict,
)

FORMATS = ("json", "csv", "table")
EXIT_NO_COUNTEREXAMPLE = 2


def _flatten(obj, prefix: str = "") -> list[dict]:
    """Turn nested JSON-like data into ``key``/``value`` rows for csv and table output."""
    obj = lab_io.to_jsonable(obj)
    rows = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            rows += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            rows += _flatten(v, f"{prefix}[{i}]")
    else:
        rows.append({"key": prefix, "value": obj})
    return rows


def _render(payload, fmt: str, rows=None, header=None) -> str:
    if fmt == "json":
        return lab_io.dumps(payload)
    if rows is None:
        rows, header = _flatten(payload), ["key", "value"]
    if fmt == "csv":
        return lab_io.rows_to_csv(rows, header)
    return lab_io.rows_to_table(rows, header)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _load(mode: str, config: str, seed):
    return ExperimentConfig.from_file(config, mode=mode, seed=seed)


def _common(f):
    f = click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True)(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write here instead of stdout.")(f)
    f = click.option("--seed", type=int, default=None, help="Override the config seed.")(f)
    f = click.option("--config", type=click.Path(exists=True, dir_okay=False), required=True)(f)
    return f


@click.group()
def main():
    """Desk-scale experiments on OOD learnability over finite domains."""


@main.command()
@_common
def curve(config, seed, out, fmt):
    """Learning curve: mean excess risk (or AUC regret) per sample size."""
    cfg = _load("curve", config, seed)
    rows = run_learning_curve(cfg)
    header = curve_header(cfg)
    col = "auc_regret" if "auc_regret" in header else header[1]
    payload = {"rows": rows, "header": header, "fitted_slope": {col: fitted_slope(rows, col)}}
    _emit(_render(payload, fmt, rows, header), out or cfg.out)


@main.command()
@_common
def check(config, seed, out, fmt):
    """Condition reports for every member and class, plus the verdict."""
    cfg = _load("check", config, seed)
    _emit(_render(run_condition_report(cfg), fmt), out or cfg.out)


@main.command()
@_common
def verdict(config, seed, out, fmt):
    """Learnability verdict for the configured domain space."""
    cfg = _load("verdict", config, seed)
    _emit(_render(run_verdict(cfg), fmt), out or cfg.out)


@main.command()
@_common
def counterexample(config, seed, out, fmt):
    """Build a counterexample certificate; exit 2 if none exists."""
    cfg = _load("counterexample", config, seed)
    try:
        payload = run_counterexample(cfg)
    except NoCounterexampleError as e:
        click.echo(f"no counterexample: {e}", err=True)
        sys.exit(EXIT_NO_COUNTEREXAMPLE)
    _emit(_render(payload, fmt), out or cfg.out)


def run(argv=None) -> int:
    """Invoke the CLI and map library errors to exit code 1."""
    try:
        main.main(args=argv, standalone_mode=False)
    except SystemExit as e:
        return int(e.code or 0)
    except click.ClickException as e:
        e.show()
        return 1
    except (OodLabError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        return 1
    return 0


def entry():
    sys.exit(run())


if __name__ == "__main__":
    entry()
