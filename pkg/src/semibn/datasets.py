"""Dataset containers, CSV round-trips, and the real-data preparation path."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .validation import check_data_matrix

__all__ = [
    "SplitDataset",
    "write_data_csv",
    "read_data_csv",
    "save_split",
    "load_split",
    "drop_constant_columns",
    "standardize_splits",
    "uci_prepare",
]

SPLIT_FILES = ("train.csv", "val.csv", "test.csv")


@dataclass
class SplitDataset:
    """Train/validation/test blocks over the same named columns."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    node_names: list[str]

    def __post_init__(self):
        n = len(self.node_names)
        self.train = check_data_matrix(self.train, n_columns=n, name="train")
        self.val = check_data_matrix(self.val, n_columns=n, allow_empty=True, name="val")
        self.test = check_data_matrix(self.test, n_columns=n, allow_empty=True, name="test")

    @property
    def n_nodes(self) -> int:
        return len(self.node_names)


def write_data_csv(path, data, node_names) -> None:
    """Comma-separated with a header row; floats in shortest round-trip form."""
    data = check_data_matrix(data, n_columns=len(node_names), allow_empty=True, name="data")
    pd.DataFrame(data, columns=list(node_names)).to_csv(path, index=False)


def read_data_csv(path) -> tuple[np.ndarray, list[str]]:
    # round_trip parsing keeps the written shortest-repr floats bit-exact
    frame = pd.read_csv(path, float_precision="round_trip")
    names = [str(c) for c in frame.columns]
    data = check_data_matrix(frame.to_numpy(dtype=np.float64), allow_empty=True,
                             name=str(path))
    return data, names


def save_split(directory, dataset: SplitDataset) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, block in zip(SPLIT_FILES, (dataset.train, dataset.val, dataset.test)):
        write_data_csv(directory / name, block, dataset.node_names)


def load_split(directory) -> SplitDataset:
    directory = Path(directory)
    blocks = []
    names = None
    for name in SPLIT_FILES:
        data, cols = read_data_csv(directory / name)
        if names is None:
            names = cols
        elif cols != names:
            raise ValueError(f"{name} columns {cols} do not match train columns {names}")
        blocks.append(data)
    return SplitDataset(train=blocks[0], val=blocks[1], test=blocks[2], node_names=names)


def drop_constant_columns(data, node_names) -> tuple[np.ndarray, list[str], list[str]]:
    """Remove zero-variance columns; returns (data, kept names, dropped names)."""
    data = check_data_matrix(data, n_columns=len(node_names), name="data")
    spans = np.ptp(data, axis=0)
    keep = [i for i, s in enumerate(spans) if s > 0.0]
    dropped = [node_names[i] for i in range(len(node_names)) if i not in keep]
    return data[:, keep], [node_names[i] for i in keep], dropped


def standardize_splits(dataset: SplitDataset) -> SplitDataset:
    """Z-score all splits using train+val statistics (test stays unseen)."""
    fit_block = np.vstack([dataset.train, dataset.val]) if dataset.val.size else dataset.train
    mean = fit_block.mean(axis=0)
    std = fit_block.std(axis=0)
    if (std == 0.0).any():
        raise ValueError("cannot standardize a constant column; drop it first")
    return SplitDataset(
        train=(dataset.train - mean) / std,
        val=(dataset.val - mean) / std,
        test=(dataset.test - mean) / std,
        node_names=list(dataset.node_names),
    )


def uci_prepare(data, node_names, seed, train_fraction=0.9,
                standardize=True) -> tuple[SplitDataset, list[str]]:
    """Real-data protocol: drop constant columns, shuffle, floor-split
    train/test 9:1, carve validation from train by the same ratio.

    Returns the prepared splits and the dropped column names.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    data, names, dropped = drop_constant_columns(data, list(node_names))
    if data.shape[1] < 2:
        raise ValueError("need at least two non-constant columns")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    order = rng.permutation(data.shape[0])
    n_outer = int(np.floor(train_fraction * data.shape[0]))
    if n_outer < 2 or n_outer == data.shape[0]:
        raise ValueError(f"{data.shape[0]} rows is too few for a {train_fraction:.0%} split")
    outer_train, test_idx = order[:n_outer], order[n_outer:]
    n_inner = int(np.floor(train_fraction * n_outer))
    train_idx, val_idx = outer_train[:n_inner], outer_train[n_inner:]
    dataset = SplitDataset(
        train=data[train_idx], val=data[val_idx], test=data[test_idx], node_names=names,
    )
    if standardize:
        dataset = standardize_splits(dataset)
    return dataset, dropped
