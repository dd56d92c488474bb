"""Experiment command line: generate, learn, sweep, uci-prepare, shd, export-dot."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import numpy as np

from .datasets import SplitDataset, read_data_csv, save_split, uci_prepare
from .graph import graph_to_dot, load_graph_json, shd as graph_shd
from .horseshoe import HsScaleMap
from .lgbn import fit_expert_graph, save_lgbn_json
from .serialize import save_learned_json
from .sweep import (
    RESULT_COLUMNS,
    format_value,
    load_sweep_config,
    run_learn,
    run_sweep,
    _load_expert_file,
)
from .synthetic import GenConfig, gen_structure, load_truth, sample_dataset, save_truth

__all__ = ["main"]


@click.group()
def main():
    """Semi-parametric Bayesian network experiments."""


def _parse_hs(text: str) -> HsScaleMap | None:
    if text == "none":
        return None
    parts = text.split(",")
    try:
        if len(parts) == 1:
            tau = float(parts[0])
            return HsScaleMap(tau_expert=tau, tau_nonexpert=tau)
        if len(parts) == 2:
            return HsScaleMap(tau_expert=float(parts[0]), tau_nonexpert=float(parts[1]))
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    raise click.BadParameter("use 'none', a single scale, or 'expert,nonexpert'")


@main.command()
@click.option("--mode", type=click.Choice(["id", "ed"]), default="id", show_default=True)
@click.option("--nodes", type=click.IntRange(min=2), required=True,
              help="Number of variables.")
@click.option("--seed", "seeds", type=int, multiple=True, required=True,
              help="Seed; repeat for several datasets.")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--n-train", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--n-val", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--n-test", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--p-linear", type=float, default=0.5, show_default=True)
@click.option("--p-modify", type=float, default=0.5, show_default=True)
@click.option("--p-add", type=float, default=None,
              help="Default 0.5 for id, 0.01 for ed.")
@click.option("--root-variance", type=float, default=0.01, show_default=True)
@click.option("--noise-variance", type=float, default=0.01, show_default=True)
def generate(mode, nodes, seeds, out, n_train, n_val, n_test, p_linear, p_modify,
             p_add, root_variance, noise_variance):
    """Write synthetic train/val/test CSVs plus truth.json per seed."""
    out = Path(out)
    for seed in seeds:
        config = GenConfig(n=nodes, mode=mode, p_linear=p_linear, p_modify=p_modify,
                           p_add=p_add, root_variance=root_variance,
                           noise_variance=noise_variance, n_train=n_train,
                           n_val=n_val, n_test=n_test, seed=seed)
        truth = gen_structure(config)
        dataset = sample_dataset(truth, config)
        target = out / f"seed{seed}"
        save_split(target, dataset)
        save_truth(truth, config, target / "truth.json")
        click.echo(f"wrote {target}")


def _append_metrics(path, row: dict) -> None:
    path = Path(path)
    new_file = not path.exists()
    with open(path, "a", newline="") as handle:
        writer = csv.writer(handle)
        if new_file:
            writer.writerow(RESULT_COLUMNS)
        writer.writerow([format_value(row[c]) for c in RESULT_COLUMNS])


@main.command()
@click.option("--train", "train_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--val", "val_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--test", "test_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--expert", "expert_path", type=click.Path(exists=True, dir_okay=False),
              help="Expert graph JSON; defaults to the truth file's linear edges.")
@click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False),
              help="Ground truth JSON; enables SHD and oracle-linear mode.")
@click.option("--mode", type=click.Choice(["oracle-linear", "two-step", "one-step"]),
              default="one-step", show_default=True)
@click.option("--hs", default="none", show_default=True,
              help="'none', a single scale, or 'expert,nonexpert'.")
@click.option("--hs-weight", type=float, default=1.0, show_default=True)
@click.option("--threshold", type=float, default=0.2, show_default=True)
@click.option("--noise-variance", type=float, default=0.01, show_default=True,
              help="Used when the expert file carries no per-node variances.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Recorded in the metrics row.")
@click.option("--out", type=click.Path(dir_okay=False), default="learned.json",
              show_default=True)
@click.option("--metrics", "metrics_path", type=click.Path(dir_okay=False),
              help="Append the metrics row to this CSV.")
def learn(train_path, val_path, test_path, expert_path, truth_path, mode, hs,
          hs_weight, threshold, noise_variance, seed, out, metrics_path):
    """Run structure learning on one dataset and write learned.json."""
    train, names = read_data_csv(train_path)
    val, val_names = read_data_csv(val_path)
    test, test_names = read_data_csv(test_path)
    if val_names != names or test_names != names:
        raise click.ClickException("train/val/test column names differ")
    dataset = SplitDataset(train=train, val=val, test=test, node_names=names)

    truth = None
    if truth_path is not None:
        truth, _ = load_truth(truth_path)
    if expert_path is not None:
        expert, noise = _load_expert_file(expert_path)
    elif truth is not None:
        expert, noise = truth.expert, None
    else:
        raise click.ClickException("provide --expert and/or --truth")
    if expert.node_names != names:
        raise click.ClickException(
            f"expert graph nodes {expert.node_names} do not match data columns {names}"
        )
    if noise is None:
        noise = noise_variance

    hs_scales = _parse_hs(hs)
    try:
        outcome = run_learn(dataset, expert, noise, mode, hs_scales, hs_weight,
                            threshold, truth=truth, seed=seed)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None

    save_learned_json(outcome.graph, outcome.cpds, out)
    row = {
        "seed": seed, "n": expert.n, "mode": mode,
        "hs_expert": None if hs_scales is None else hs_scales.tau_expert,
        "hs_nonexpert": None if hs_scales is None else hs_scales.tau_nonexpert,
        "hs_weight": None if hs_scales is None else hs_weight,
        "threshold": threshold, "shd": outcome.shd,
        "test_loglik": outcome.test_loglik, "wall_time_s": outcome.wall_time_s,
        "status": "ok",
    }
    if metrics_path is not None:
        _append_metrics(metrics_path, row)
    shd_text = "" if outcome.shd is None else f" shd={outcome.shd}"
    click.echo(f"wrote {out}:{shd_text} test_loglik={outcome.test_loglik:.4f} "
               f"({outcome.n_fits} fits, {outcome.wall_time_s:.1f}s)")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--out", type=click.Path(file_okay=False),
              help="Override the config's output_dir.")
def sweep(config_path, workers, out):
    """Run a sweep config: one row per (grid cell, seed)."""
    config = load_sweep_config(config_path)
    if out is not None:
        config["output_dir"] = out
    results = run_sweep(config, workers=workers, progress=click.echo)
    click.echo(f"wrote {results} and {results.parent / 'summary.csv'}")


@main.command("uci-prepare")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--columns", type=int, default=7, show_default=True,
              help="Expected raw column count.")
@click.option("--train-fraction", type=float, default=0.9, show_default=True)
@click.option("--standardize/--no-standardize", default=True, show_default=True)
def uci_prepare_cmd(input_path, out, seed, columns, train_fraction, standardize):
    """Prepare a real dataset: drop constant columns, split, fit the
    linear-Gaussian expert graph with per-node noise variances."""
    data, names = read_data_csv(input_path)
    if data.shape[1] != columns:
        raise click.ClickException(
            f"{input_path} has {data.shape[1]} columns, expected {columns} "
            "(pass --columns to override)"
        )
    dataset, dropped = uci_prepare(data, names, seed, train_fraction=train_fraction,
                                   standardize=standardize)
    out = Path(out)
    save_split(out, dataset)
    fit_block = np.vstack([dataset.train, dataset.val])
    model = fit_expert_graph(fit_block, node_names=dataset.node_names)
    save_lgbn_json(model, out / "expert.json")
    echo = {
        "seed": seed,
        "dropped_columns": dropped,
        "standardize": standardize,
        "train_fraction": train_fraction,
        "rows": {"train": dataset.train.shape[0], "val": dataset.val.shape[0],
                 "test": dataset.test.shape[0]},
    }
    (out / "prepare.json").write_text(json.dumps(echo, indent=2) + "\n")
    click.echo(
        f"wrote {out}: {dataset.train.shape[0]}/{dataset.val.shape[0]}/"
        f"{dataset.test.shape[0]} rows, dropped {dropped or 'nothing'}, "
        f"expert graph with {int(model.graph.linear.sum())} edges"
    )


@main.command()
@click.argument("graph_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("graph_b", type=click.Path(exists=True, dir_okay=False))
def shd(graph_a, graph_b):
    """Typed structural Hamming distance between two graph JSON files."""
    a = load_graph_json(graph_a)
    b = load_graph_json(graph_b)
    if a.node_names != b.node_names:
        raise click.ClickException("graphs are over different node sets")
    click.echo(str(graph_shd(a, b)))


@main.command("export-dot")
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False),
              help="Write here instead of stdout.")
def export_dot(graph_path, out):
    """Render a graph JSON file as DOT (linear solid, GP dashed)."""
    text = graph_to_dot(load_graph_json(graph_path))
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
