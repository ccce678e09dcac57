"""Synthetic planted-pattern datasets for tests, demos, and benchmarks.

Each class gets a distinct contiguous pattern inserted at a random offset
into each of its trajectories; all remaining points are noise drawn from a
shared vocabulary (or value range). Pattern values never collide with noise
or with another class's pattern, so a class is exactly characterized by its
pattern.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .data import Dataset, DimensionDescriptor, Trajectory

_NAME_BASE = {"categorical": "poi", "numeric": "val", "spatial": "space"}


def _dimension_names(kinds: Sequence[str]) -> list[str]:
    counts: dict[str, int] = {}
    names = []
    for kind in kinds:
        counts[kind] = counts.get(kind, 0) + 1
        base = _NAME_BASE[kind]
        names.append(base if counts[kind] == 1 else f"{base}{counts[kind]}")
    return names


def generate_planted_dataset(
    n_classes: int,
    trajs_per_class: int,
    traj_len: int,
    pattern_len: int,
    noise_vocab: int,
    seed: int,
    dims: Sequence[str] = ("categorical",),
) -> Dataset:
    """Build a labeled dataset with one planted pattern per class.

    Deterministic for a given seed. ``noise_vocab`` is the number of
    distinct categorical noise symbols; numeric and spatial noise is drawn
    uniformly from [0, 50), far from the planted values (>= 1000).

    Raises
    ------
    ValueError
        If ``pattern_len`` exceeds ``traj_len`` or a parameter is not positive.
    """
    if pattern_len > traj_len:
        raise ValueError(f"pattern_len {pattern_len} exceeds traj_len {traj_len}")
    for name, value in (
        ("n_classes", n_classes),
        ("trajs_per_class", trajs_per_class),
        ("traj_len", traj_len),
        ("pattern_len", pattern_len),
        ("noise_vocab", noise_vocab),
    ):
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value}")

    names = _dimension_names(dims)
    descriptors = [DimensionDescriptor(n, k, i) for i, (n, k) in enumerate(zip(names, dims))]
    rng = np.random.default_rng(seed)

    # Symbol tables: noise codes 0..noise_vocab-1, then per-class pattern codes.
    vocab: dict[str, list[str]] = {}
    pattern_code: dict[str, list[list[int]]] = {}
    for name, kind in zip(names, dims):
        if kind != "categorical":
            continue
        symbols = [f"n{j}" for j in range(noise_vocab)]
        codes = []
        for c in range(n_classes):
            row = []
            for i in range(pattern_len):
                row.append(len(symbols))
                symbols.append(f"{name}_pat{c}_{i}")
            codes.append(row)
        vocab[name] = symbols
        pattern_code[name] = codes

    trajectories = []
    for c in range(n_classes):
        label = f"c{c}"
        for j in range(trajs_per_class):
            offset = int(rng.integers(0, traj_len - pattern_len + 1))
            cols = []
            for name, kind in zip(names, dims):
                if kind == "categorical":
                    col = rng.integers(0, noise_vocab, size=traj_len).astype(np.int64)
                    col[offset : offset + pattern_len] = pattern_code[name][c]
                elif kind == "numeric":
                    col = rng.uniform(0.0, 50.0, size=traj_len)
                    col[offset : offset + pattern_len] = [1000.0 + 100.0 * c + i for i in range(pattern_len)]
                else:
                    col = rng.uniform(0.0, 50.0, size=(traj_len, 2))
                    for i in range(pattern_len):
                        col[offset + i] = (1000.0 + 100.0 * c + i, 1000.0 + 100.0 * c)
                cols.append(col)
            trajectories.append(Trajectory(f"t{c}_{j}", label, cols))
    return Dataset(descriptors, trajectories, vocab)


def class_pattern_symbols(dataset: Dataset, label: str, dim_name: str = "poi") -> list[str]:
    """The planted symbol sequence of a class, for a categorical dimension."""
    c = int(label.removeprefix("c"))
    symbols = dataset.vocab[dim_name]
    return [s for s in symbols if s.startswith(f"{dim_name}_pat{c}_")]


def split_dataset(dataset: Dataset, test_fraction: float = 0.3, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Stratified hold-out split; both halves share dimensions and symbol tables."""
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in [0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_ids: set[str] = set()
    labels: dict[str, list[Trajectory]] = {}
    for t in dataset.trajectories:
        labels.setdefault(t.label, []).append(t)
    for label in sorted(labels):
        group = labels[label]
        n_test = int(round(len(group) * test_fraction))
        picks = rng.permutation(len(group))[:n_test]
        test_ids.update(group[i].tid for i in picks)
    train = [t for t in dataset.trajectories if t.tid not in test_ids]
    test = [t for t in dataset.trajectories if t.tid in test_ids]
    return (
        Dataset(dataset.dimensions, train, dataset.vocab),
        Dataset(dataset.dimensions, test, dataset.vocab),
    )
