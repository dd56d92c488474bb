"""Experiment sweep harness: config parsing, per-cell runs, results files.

A sweep config is YAML with ``schema_version: 1``; see the README for the
full schema. Every (grid cell, seed) pair becomes one row of results.csv
with a fixed column set; cells are independent and may run in a worker
pool, with all BLAS threading pinned to one thread per cell so results
are byte-identical regardless of scheduling.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml
from threadpoolctl import threadpool_limits

from .cpd import TrainConfig, total_test_loglik
from .datasets import SplitDataset, read_data_csv
from .graph import LearnedGraph, graph_from_json, shd
from .horseshoe import HsScaleMap
from .search import SearchConfig, search_structure
from .serialize import learned_to_json
from .synthetic import GenConfig, GroundTruth, gen_structure, load_truth, sample_dataset

__all__ = [
    "RESULT_COLUMNS",
    "SCHEMA_VERSION",
    "LearnOutcome",
    "load_sweep_config",
    "run_learn",
    "run_sweep",
]

SCHEMA_VERSION = 1
RESULT_COLUMNS = ["seed", "n", "mode", "hs_expert", "hs_nonexpert", "hs_weight",
                  "threshold", "shd", "test_loglik", "wall_time_s", "status"]
SUMMARY_COLUMNS = ["name", "mode", "hs_expert", "hs_nonexpert", "hs_weight",
                   "threshold", "n_ok", "mean_shd", "median_test_loglik"]

_GEN_KEYS = ("p_linear", "p_modify", "p_add", "root_variance", "noise_variance",
             "n_train", "n_val", "n_test")
_TRAIN_KEYS = ("max_iterations", "patience", "step_size", "init_amplitude",
               "init_lengthscale")


@dataclass
class LearnOutcome:
    """One structure-learning run: learned model plus its metrics."""

    graph: LearnedGraph
    cpds: dict
    search_score: float
    shd: int | None
    test_loglik: float
    wall_time_s: float
    n_fits: int


def _parse_hs(value) -> tuple[float | None, float | None]:
    if value in (None, "none"):
        return None, None
    if isinstance(value, (int, float)):
        return float(value), float(value)
    if isinstance(value, dict):
        if "tau" in value:
            tau = float(value["tau"])
            return tau, tau
        if "tau_expert" in value and "tau_nonexpert" in value:
            return float(value["tau_expert"]), float(value["tau_nonexpert"])
    raise ValueError(
        f"hs must be 'none', a number, {{tau: x}}, or "
        f"{{tau_expert: a, tau_nonexpert: b}}, got {value!r}"
    )


def _cell_name(cell: dict) -> str:
    if cell["hs_expert"] is None:
        hs = "nohs"
    elif cell["hs_expert"] == cell["hs_nonexpert"]:
        hs = f"hs{cell['hs_expert']:g}"
    else:
        hs = f"hs{cell['hs_expert']:g}x{cell['hs_nonexpert']:g}"
    return f"{cell['mode']}-{hs}-w{cell['hs_weight']:g}-t{cell['threshold']:g}"


def _normalize_cell(raw: dict, index: int) -> dict:
    if not isinstance(raw, dict):
        raise ValueError(f"grid entry {index} must be a mapping")
    hs_expert, hs_nonexpert = _parse_hs(raw.get("hs", "none"))
    cell = {
        "mode": raw.get("mode", "one-step"),
        "hs_expert": hs_expert,
        "hs_nonexpert": hs_nonexpert,
        "hs_weight": float(raw.get("hs_weight", 1.0)),
        "threshold": float(raw.get("threshold", 0.2)),
    }
    cell["name"] = str(raw["name"]) if "name" in raw else _cell_name(cell)
    return cell


def load_sweep_config(path) -> dict:
    """Parse and validate a sweep YAML file into a normalized config."""
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError("sweep config must be a mapping")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported schema_version {raw.get('schema_version')!r}; "
            f"expected {SCHEMA_VERSION}"
        )
    if "output_dir" not in raw:
        raise ValueError("output_dir is required")
    dataset = raw.get("dataset")
    if not isinstance(dataset, dict) or "kind" not in dataset:
        raise ValueError("dataset with a 'kind' is required")
    kind = dataset["kind"]
    if kind == "synthetic":
        if "n" not in dataset:
            raise ValueError("synthetic dataset needs 'n'")
        seeds = dataset.get("seeds")
        if not seeds:
            raise ValueError("synthetic dataset needs a nonempty 'seeds' list")
        seeds = [int(s) for s in seeds]
        if len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be distinct")
        dataset["seeds"] = seeds
    elif kind == "csv":
        for key in ("train", "val", "test", "expert"):
            if key not in dataset:
                raise ValueError(f"csv dataset needs '{key}'")
        dataset["seeds"] = [int(dataset.get("seed", 0))]
    else:
        raise ValueError(f"dataset kind must be 'synthetic' or 'csv', got {kind!r}")
    grid_raw = raw.get("grid")
    if not grid_raw:
        raise ValueError("grid must be a nonempty list")
    grid = [_normalize_cell(entry, i) for i, entry in enumerate(grid_raw)]
    names = [cell["name"] for cell in grid]
    if len(set(names)) != len(names):
        raise ValueError(f"grid cell names are not unique: {names}")
    train = raw.get("train") or {}
    if not isinstance(train, dict):
        raise ValueError("train section must be a mapping")
    unknown = set(train) - set(_TRAIN_KEYS)
    if unknown:
        raise ValueError(f"unknown train keys: {sorted(unknown)}")
    train = {k: (int(v) if k in ("max_iterations", "patience") else float(v))
             for k, v in train.items()}
    return {
        "schema_version": SCHEMA_VERSION,
        "output_dir": str(raw["output_dir"]),
        "dataset": dataset,
        "grid": grid,
        "train": train,
    }


def run_learn(dataset: SplitDataset, expert, noise_variances, mode,
              hs_scales: HsScaleMap | None, hs_weight, threshold,
              truth: GroundTruth | None = None, oracle_params=None,
              train_overrides: dict | None = None, seed: int = 0) -> LearnOutcome:
    """One full structure-learning run plus metric evaluation."""
    config = SearchConfig(
        amplitude_threshold=threshold,
        train_config=TrainConfig(mode=mode, hs_weight=hs_weight,
                                 hs_scales=hs_scales, seed=seed,
                                 **(train_overrides or {})),
    )
    if mode == "oracle-linear" and oracle_params is None:
        if truth is None:
            raise ValueError("oracle-linear mode requires ground truth parameters")
        oracle_params = truth.oracle_params()
    started = time.perf_counter()
    result = search_structure(dataset.train, dataset.val, expert, config,
                              noise_variances, oracle_params)
    test_loglik = total_test_loglik(result.cpds, dataset.train, dataset.test)
    wall = time.perf_counter() - started
    shd_value = None
    if truth is not None:
        shd_value = shd(result.graph, truth.learned_view())
    return LearnOutcome(graph=result.graph, cpds=result.cpds,
                        search_score=result.score, shd=shd_value,
                        test_loglik=test_loglik, wall_time_s=wall,
                        n_fits=result.context.fit_count)


def _load_expert_file(path):
    """Expert graph JSON; returns (ExpertGraph, per-node noise variances or None)."""
    payload = json.loads(Path(path).read_text())
    learned = graph_from_json(payload)
    if learned.gp_edges.gp.any():
        raise ValueError(f"expert graph {path} must not contain gp_edges")
    expert = learned.expert
    noise = payload.get("noise_variances")
    if noise is not None:
        try:
            noise = np.array([float(noise[name]) for name in expert.node_names])
        except KeyError as exc:
            raise ValueError(f"noise_variances missing entry for node {exc}") from None
    return expert, noise


def _resolve_dataset(dataset_cfg: dict, seed: int):
    """Materialize (dataset, expert, noise_variances, truth) for one task."""
    if dataset_cfg["kind"] == "synthetic":
        overrides = {k: dataset_cfg[k] for k in _GEN_KEYS if k in dataset_cfg}
        gen = GenConfig(n=int(dataset_cfg["n"]), mode=dataset_cfg.get("mode", "id"),
                        seed=seed, **overrides)
        truth = gen_structure(gen)
        data = sample_dataset(truth, gen)
        return data, truth.expert, gen.noise_variance, truth
    train, names = read_data_csv(dataset_cfg["train"])
    val, _ = read_data_csv(dataset_cfg["val"])
    test, _ = read_data_csv(dataset_cfg["test"])
    data = SplitDataset(train=train, val=val, test=test, node_names=names)
    expert, noise = _load_expert_file(dataset_cfg["expert"])
    if noise is None:
        noise = float(dataset_cfg.get("noise_variance", 0.01))
    truth = None
    if "truth" in dataset_cfg:
        truth, _ = load_truth(dataset_cfg["truth"])
    return data, expert, noise, truth


def _blank_row(seed: int, cell: dict) -> dict:
    return {
        "seed": seed,
        "n": None,
        "mode": cell["mode"],
        "hs_expert": cell["hs_expert"],
        "hs_nonexpert": cell["hs_nonexpert"],
        "hs_weight": cell["hs_weight"] if cell["hs_expert"] is not None else None,
        "threshold": cell["threshold"],
        "shd": None,
        "test_loglik": None,
        "wall_time_s": None,
        "status": "failed",
    }


def _run_cell_task(task: dict) -> tuple[dict, dict | None]:
    """Worker entry: one (cell, seed) run. Returns (row, learned payload)."""
    cell = task["cell"]
    seed = task["seed"]
    row = _blank_row(seed, cell)
    with threadpool_limits(limits=1):
        try:
            data, expert, noise, truth = _resolve_dataset(task["dataset"], seed)
            row["n"] = expert.n
            hs_scales = None
            if cell["hs_expert"] is not None:
                hs_scales = HsScaleMap(tau_expert=cell["hs_expert"],
                                       tau_nonexpert=cell["hs_nonexpert"])
            outcome = run_learn(data, expert, noise, cell["mode"], hs_scales,
                                cell["hs_weight"], cell["threshold"], truth=truth,
                                train_overrides=task.get("train") or None,
                                seed=seed)
        except Exception as exc:
            row["status"] = f"failed: {type(exc).__name__}"
            return row, None
    row.update(shd=outcome.shd, test_loglik=outcome.test_loglik,
               wall_time_s=outcome.wall_time_s, status="ok")
    learned = learned_to_json(outcome.graph, outcome.cpds, extra={
        "run": {"cell": cell["name"], "seed": seed, "mode": cell["mode"],
                "hs_expert": cell["hs_expert"], "hs_nonexpert": cell["hs_nonexpert"],
                "hs_weight": cell["hs_weight"], "threshold": cell["threshold"]},
    })
    return row, learned


def format_value(value) -> str:
    """CSV cell text: empty for missing, shortest round-trip for floats."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_result_rows(path, rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in RESULT_COLUMNS])


def summarize(rows, grid) -> list[dict]:
    """Per-cell mean SHD and median test log-likelihood over ok rows."""
    summary = []
    for cell in grid:
        matched = [r for r in rows
                   if r["status"] == "ok"
                   and r["mode"] == cell["mode"]
                   and r["hs_expert"] == cell["hs_expert"]
                   and r["hs_nonexpert"] == cell["hs_nonexpert"]
                   and r["threshold"] == cell["threshold"]
                   and (cell["hs_expert"] is None or r["hs_weight"] == cell["hs_weight"])]
        shds = [r["shd"] for r in matched if r["shd"] is not None]
        logliks = [r["test_loglik"] for r in matched if r["test_loglik"] is not None]
        summary.append({
            "name": cell["name"],
            "mode": cell["mode"],
            "hs_expert": cell["hs_expert"],
            "hs_nonexpert": cell["hs_nonexpert"],
            "hs_weight": cell["hs_weight"] if cell["hs_expert"] is not None else None,
            "threshold": cell["threshold"],
            "n_ok": len(matched),
            "mean_shd": float(np.mean(shds)) if shds else None,
            "median_test_loglik": float(np.median(logliks)) if logliks else None,
        })
    return summary


def run_sweep(config: dict, workers: int = 1, progress=None) -> Path:
    """Run every (cell, seed) pair and write results under output_dir.

    Writes results.csv, summary.csv, and learned/<cell>-seed<seed>.json per
    successful run. Returns the results.csv path. Row order is fixed by
    (cell index, seed index) regardless of worker scheduling.
    """
    out_dir = Path(config["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    learned_dir = out_dir / "learned"
    learned_dir.mkdir(exist_ok=True)

    tasks = [{"cell": cell, "seed": seed, "dataset": config["dataset"],
              "train": config.get("train") or {}}
             for cell in config["grid"] for seed in config["dataset"]["seeds"]]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell_task, tasks))
    else:
        outcomes = []
        for task in tasks:
            outcomes.append(_run_cell_task(task))
            if progress is not None:
                row = outcomes[-1][0]
                progress(f"{task['cell']['name']} seed {task['seed']}: {row['status']}")

    rows = [row for row, _ in outcomes]
    for task, (row, learned) in zip(tasks, outcomes):
        if learned is not None:
            path = learned_dir / f"{task['cell']['name']}-seed{task['seed']}.json"
            path.write_text(json.dumps(learned, indent=2) + "\n")

    results_path = out_dir / "results.csv"
    write_result_rows(results_path, rows)
    summary = summarize(rows, config["grid"])
    with open(out_dir / "summary.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for entry in summary:
            writer.writerow([format_value(entry[c]) for c in SUMMARY_COLUMNS])
    return results_path
