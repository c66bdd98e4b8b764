"""``blab`` command line: run, validate and grid-dump experiment configs.

Exit status: 0 all checks passed, 1 a check failed, 2 the config could not
be parsed or validated (no files are written), 3 a numerical failure.
"""

from __future__ import annotations

import csv
import io as _io
import sys
from pathlib import Path

import click

from . import experiments
from .errors import BlabError, ConfigError
from .io import dumps

EXIT_OK, EXIT_ASSERTION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def csv_text(rows) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_outputs(prefix: str, outcome: experiments.Outcome, cfg: experiments.ExperimentConfig) -> None:
    doc = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "params": cfg.params,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in outcome.checks],
        "passed": outcome.passed,
        "report": outcome.document,
    }
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.csv").write_text(csv_text(outcome.rows))
    Path(f"{prefix}.json").write_text(dumps(doc) + "\n")


def _load(config, seed=None, out=None):
    try:
        return experiments.load_config(config, seed=seed, output=out)
    except (ConfigError, BlabError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


@click.group()
def main():
    """Weighted Bergman kernel experiments."""


@main.command()
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", "prefix", default=None, help="Output path prefix for .csv and .json.")
@click.option("--threads", type=click.IntRange(1, 256), default=1, help="Worker threads for kernel builds.")
def run(config, seed, prefix, threads):
    """Run the experiment described by CONFIG."""
    cfg = _load(config, seed, prefix)
    try:
        outcome = experiments.run(cfg, workers=threads)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (BlabError, ArithmeticError, FloatingPointError) as exc:
        click.echo(f"numerical failure: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    write_outputs(cfg.output, outcome, cfg)
    for c in outcome.checks:
        click.echo(c.line())
    sys.exit(EXIT_OK if outcome.passed else EXIT_ASSERTION)


@main.command()
@click.argument("config", type=click.Path(dir_okay=False))
def validate(config):
    """Parse and range-check CONFIG without running it."""
    cfg = _load(config)
    click.echo(f"ok: {cfg.experiment} (seed {cfg.seed}, output {cfg.output})")


@main.command("grid-dump")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--out", "path", default=None, help="CSV path; defaults to <output>_grid.csv.")
def grid_dump(config, path):
    """Write the quadrature grid for CONFIG as re,im,weight rows."""
    cfg = _load(config)
    try:
        grid = experiments.experiment_grid(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except BlabError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    path = path or f"{cfg.output}_grid.csv"
    grid.dump_csv(path)
    click.echo(f"{len(grid.weights)} nodes, area {grid.area!r} -> {path}")


if __name__ == "__main__":  # pragma: no cover
    main()
