"""``symvort`` command line.

Exit codes: 0 success, 2 configuration error, 3 runtime failure (collision,
implicit solver stall); partial outputs of a failed run are flagged in the
manifest. ``SYMVORT_OUTPUT_ROOT`` overrides the directory that relative
``output.dir`` paths are resolved against.
"""
from __future__ import annotations

import datetime
import os
import sys
from pathlib import Path

import click

from .. import __version__, kernels
from ..core import SingularConfigurationError
from ..integrators import StepFailure
from . import config as config_mod
from . import experiments, io

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

OUTPUT_ROOT_ENV = "SYMVORT_OUTPUT_ROOT"


def output_dir(cfg):
    d = Path(cfg["output"]["dir"])
    if d.is_absolute():
        return d
    root = os.environ.get(OUTPUT_ROOT_ENV)
    return (Path(root) if root else Path.cwd()) / d


def _manifest(cfg, result, status, failure=None):
    m = {
        "tool": "symvort",
        "version": __version__,
        "backend": kernels.active().name,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": cfg,
        "seed": cfg["seed"],
        "status": status,
        "partial": status != "ok",
        "failure": failure,
        "files": result.files if result else [],
        "results": result.extra if result else {},
    }
    if cfg["kind"] == "simulate" and result is not None:
        m["drift"] = result.extra.get("drift", {})
    return m


def run_config(cfg, echo=click.echo):
    """Execute a resolved config; returns the exit code."""
    outdir = output_dir(cfg)
    result, status, failure, code = None, "ok", None, EXIT_OK
    try:
        result = experiments.execute(cfg, outdir)
    except experiments.RuntimeFailure as err:
        result, status, failure, code = err.result, "failed", str(err), EXIT_RUNTIME
    except (StepFailure, SingularConfigurationError) as err:
        status, failure, code = "failed", str(err), EXIT_RUNTIME
    except ValueError as err:
        # config that passed the schema but is semantically unusable (e.g. N mismatch)
        status, failure, code = "failed", str(err), EXIT_CONFIG
    outdir.mkdir(parents=True, exist_ok=True)
    io.write_manifest(outdir / "manifest.json", _manifest(cfg, result, status, failure))
    lines = [f"symvort {__version__} :: {cfg['kind']}", f"seed: {cfg['seed']}", f"status: {status}"]
    if cfg.get("description"):
        lines.insert(1, cfg["description"])
    if failure:
        lines.append(f"failure: {failure}")
    if result is not None:
        lines += result.summary
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")
    echo("\n".join(lines))
    echo(f"outputs in {outdir}")
    return code


def _load_or_exit(path):
    try:
        cfg = config_mod.load(path)
    except config_mod.ConfigError as err:
        click.echo(f"config error: {err}", err=True)
        sys.exit(EXIT_CONFIG)
    grid = cfg.get("field", {}).get("grid_file")
    if grid and not Path(grid).is_absolute():
        cfg["field"]["grid_file"] = str((Path(path).parent / grid).resolve())
    return cfg


@click.group()
@click.version_option(__version__, prog_name="symvort")
def cli():
    """Symplectic point-vortex experiments."""


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
def run(config_path):
    """Run the experiment described by CONFIG_PATH (YAML)."""
    cfg = _load_or_exit(config_path)
    sys.exit(run_config(cfg))


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
def validate(config_path):
    """Check CONFIG_PATH against the schema and print the resolved config."""
    cfg = _load_or_exit(config_path)
    click.echo(config_mod.dump(cfg), nl=False)


@cli.command()
@click.argument("name", required=False)
@click.option("--emit-config", is_flag=True, help="Print the resolved YAML config instead of a description.")
@click.option("--list", "list_", is_flag=True, help="List the preset catalog.")
def preset(name, emit_config, list_):
    """Show or emit the preset NAME."""
    if list_ or name is None:
        for key in sorted(config_mod.PRESETS):
            click.echo(f"{key:20s} {config_mod.PRESETS[key]['description']}")
        return
    try:
        cfg = config_mod.preset(name)
    except config_mod.ConfigError as err:
        click.echo(f"config error: {err}", err=True)
        sys.exit(EXIT_CONFIG)
    if emit_config:
        click.echo(config_mod.dump(cfg), nl=False)
    else:
        click.echo(f"{name}: {cfg['description']}")
        click.echo(f"kind: {cfg['kind']}")
        click.echo("use --emit-config to print the full YAML config")


if __name__ == "__main__":
    cli()
