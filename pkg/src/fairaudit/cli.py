"""Command-line interface.

Verbs: generate (write a synthetic dataset), run (execute a pipeline from a
YAML config), report (print a comparison table for a stored experiment),
serve (start the HTTP service), demo (seed the bundled reference experiment).

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import functools
import json
import sys

import click
import yaml

from . import compare
from .errors import ConfigError, FairauditError
from .jsonio import round_sig
from .pipeline import (
    ExperimentStore,
    PipelineConfig,
    reference_experiment,
    run_pipeline,
)
from .synthgen import GenConfig, bias_profile, generate


def _exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, yaml.YAMLError) as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(1)
        except FairauditError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


@click.group()
def main():
    """Fairness audit and bias mitigation for binary tabular classification."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="YAML file with generator settings.")
@click.option("--n", type=int, default=None, help="Row count override.")
@click.option("--seed", type=int, default=None, help="Seed override.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Destination CSV path.")
@click.option("--graph-out", type=click.Path(), default=None,
              help="Also write the ground-truth causal graph as JSON.")
@_exit_codes
def generate_cmd(config_path, n, seed, out_path, graph_out):
    """Generate a synthetic credit-lending dataset."""
    doc = {}
    if config_path:
        with open(config_path) as f:
            doc = yaml.safe_load(f) or {}
    if n is not None:
        doc["n"] = n
    if seed is not None:
        doc["seed"] = seed
    try:
        cfg = GenConfig(**doc)
    except TypeError as exc:
        raise ConfigError(f"bad generator config: {exc}") from None
    table, graph = generate(cfg)
    table.to_csv(out_path)
    profile = bias_profile(table)
    if graph_out:
        with open(graph_out, "w") as f:
            json.dump(graph.to_dict(), f, indent=1)
    click.echo(
        f"wrote {table.n} rows to {out_path} "
        f"(label dp {round_sig(profile.label_dp)}, di {round_sig(profile.di_ratio)})"
    )


main.add_command(generate_cmd, name="generate")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="Pipeline YAML config.")
@click.option("--store", "store_path", required=True, type=click.Path(),
              help="Experiment store directory.")
@_exit_codes
def run(config_path, store_path):
    """Run a full audit pipeline and persist the experiment."""
    with open(config_path) as f:
        doc = yaml.safe_load(f)
    config = PipelineConfig.from_dict(doc)
    store = ExperimentStore(store_path)
    experiment = run_pipeline(config, store=store)
    click.echo(f"experiment {experiment.id}: {len(experiment.entries)} entries, "
               f"{len(experiment.failures)} failures")
    for failure in experiment.failures:
        click.echo(f"  failed: {failure['strategy_id']}: {failure['error']}", err=True)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--experiment", "exp_id", default=None,
              help="Experiment id (defaults to the only one in the store).")
@click.option("--phi", default="dp")
@click.option("--pi", default="f1")
@click.option("--beta", default=1.0, type=float)
@click.option("--bound", "Phi", default=0.05, type=float,
              help="Fairness bound for constrained mode.")
@click.option("--mode", default="tradeoff", type=click.Choice(["tradeoff", "constrained"]))
@_exit_codes
def report(store_path, exp_id, phi, pi, beta, Phi, mode):
    """Print a per-strategy metric table plus the selector's ranking."""
    store = ExperimentStore(store_path)
    if exp_id is None:
        all_ids = [s["id"] for s in store.list()]
        if len(all_ids) != 1:
            raise ConfigError(
                f"store holds {len(all_ids)} experiments; pass --experiment"
            )
        exp_id = all_ids[0]
    try:
        experiment = store.load(exp_id)
    except KeyError:
        raise FairauditError(f"experiment {exp_id!r} not found") from None
    selector = compare.SelectorConfig(
        phi_metric=phi, pi_metric=pi, beta=beta, Phi=Phi, mode=mode
    ).validate()

    headers = ["strategy", "family", "dp", "eo", "eopp", "pp", "auroc", "accuracy", "f1"]
    click.echo("  ".join(f"{h:>13}" for h in headers))
    for e in experiment.entries:
        cells = [e.strategy_id, e.family]
        for key in ("dp", "eo", "eopp", "pp"):
            v = e.fairness.get(key)
            cells.append("--" if v is None else f"{v:+.3f}")
        for key in ("auroc", "accuracy", "f1"):
            v = e.performance.get(key)
            cells.append("--" if v is None else f"{v:.3f}")
        click.echo("  ".join(f"{c:>13}" for c in cells))

    ranked = compare.rank(experiment.entries, selector)
    selection = compare.constrained_best(experiment.entries, selector)
    click.echo("")
    click.echo(f"selector: mode={mode} phi={phi} pi={pi} beta={beta} Phi={Phi}")
    if mode == "constrained":
        click.echo(f"feasible: {', '.join(selection.feasible) or '(none)'}")
        if selection.winner:
            click.echo(f"winner: {selection.winner.strategy_id}")
        else:
            sid = selection.suggestion.strategy_id if selection.suggestion else "(none)"
            click.echo(f"winner: none feasible; nearest is {sid}")
    else:
        top = ranked[0]
        click.echo(f"best tradeoff: {top.strategy_id} (score {round_sig(top.score)})")
    for failure in experiment.failures:
        click.echo(f"failed: {failure['strategy_id']}: {failure['error']}")


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path())
@_exit_codes
def demo(store_path):
    """Seed the bundled reference benchmark experiment into a store."""
    store = ExperimentStore(store_path)
    experiment = reference_experiment()
    store.save(experiment)
    click.echo(f"seeded experiment {experiment.id} into {store_path}")


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="Also serve a built dashboard (frontend/dist) at /.")
@_exit_codes
def serve(store_path, host, port, ui_dir):
    """Serve experiments and comparisons over HTTP."""
    from .service import serve as _serve

    _serve(store_path, host=host, port=port, ui_dir=ui_dir)


if __name__ == "__main__":
    main()
