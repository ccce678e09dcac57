"""Per-dimension point distances and best-alignment search.

Point distances: planar Euclidean for spatial dimensions, absolute
difference for numeric, and 0/1 equality for categorical. A slice is
aligned against a target trajectory by sliding it over every offset and
summing point distances per dimension; the winning offset minimizes the
sum of the per-dimension sums, each normalized by that dimension's
dataset-wide maximum point distance so that mixed units compare fairly.
Offset ties break toward the smallest offset.

A target shorter than the slice cannot contain it; the result is the
NOT-CONTAINABLE sentinel, which every consumer treats as maximum distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, DimensionDescriptor, Point, Subtrajectory, Trajectory

# Pair budget before compute_stats falls back to sampling, and the fixed
# seed of that sample (the operation itself takes no seed).
_MAX_EXACT_PAIRS = 10**6
_SAMPLE_SEED = 0


@dataclass(frozen=True)
class DistanceVector:
    """Best-alignment result: one summed distance per candidate dimension.

    ``values`` is None for the NOT-CONTAINABLE sentinel (target shorter
    than the slice); otherwise it is a non-negative float per dimension of
    the candidate's subset, and ``offset`` is the start index of the best
    alignment in the target trajectory.
    """

    values: np.ndarray | None
    offset: int

    @property
    def containable(self) -> bool:
        return self.values is not None


NOT_CONTAINABLE = DistanceVector(None, -1)


@dataclass(frozen=True)
class NormalizationStats:
    """Per-dimension maximum point distance over a training dataset.

    Strictly positive: dimensions with a single constant value get 1.0 so
    normalized aggregation never divides by zero.
    """

    max_point_distance: np.ndarray

    def __post_init__(self):
        if np.any(self.max_point_distance <= 0):
            raise ValueError("normalization stats must be strictly positive")


def point_distance(a: Point, b: Point, dim: DimensionDescriptor) -> float:
    """Distance between two points in one dimension (see module docstring)."""
    va, vb = a.values[dim.index], b.values[dim.index]
    if dim.kind == "categorical":
        return 0.0 if va == vb else 1.0
    if dim.kind == "numeric":
        return abs(va - vb)
    dx = va[0] - vb[0]
    dy = va[1] - vb[1]
    return math.sqrt(dx * dx + dy * dy)


def column_distance_matrix(ca: np.ndarray, cb: np.ndarray, kind: str) -> np.ndarray:
    """Pairwise point distances between two value columns of one dimension."""
    if kind == "categorical":
        return (ca[:, None] != cb[None, :]).astype(np.float64)
    if kind == "numeric":
        return np.abs(ca[:, None] - cb[None, :])
    dx = ca[:, 0][:, None] - cb[:, 0][None, :]
    dy = ca[:, 1][:, None] - cb[:, 1][None, :]
    return np.sqrt(dx * dx + dy * dy)


def point_distance_matrix(a: Trajectory, b: Trajectory, dim: DimensionDescriptor) -> np.ndarray:
    """All pairwise point distances in one dimension, shape (len(a), len(b))."""
    return column_distance_matrix(a.columns[dim.index], b.columns[dim.index], dim.kind)


def slide_window_sums(point_dists: np.ndarray, size: int) -> np.ndarray:
    """Alignment sums of a (slice_len, target_len) point-distance matrix.

    Returns a vector over the target_len - size + 1 alignment offsets where
    entry o is sum_t point_dists[t, o + t]. Summed in ascending t order;
    the bulk scoring path accumulates in the same order so both produce
    bit-identical floats.
    """
    n_off = point_dists.shape[1] - size + 1
    acc = point_dists[0, :n_off].copy()
    for t in range(1, size):
        acc += point_dists[t, t : t + n_off]
    return acc


def best_alignment(
    sub: Subtrajectory,
    target: Trajectory,
    dims: tuple[int, ...],
    stats: NormalizationStats,
    dimensions: tuple[DimensionDescriptor, ...],
) -> DistanceVector:
    """Align a slice against a full trajectory over a dimension subset.

    Returns the per-dimension (unnormalized) sums at the offset that
    minimizes the normalized aggregate, or NOT_CONTAINABLE when the target
    is shorter than the slice.
    """
    if not dims:
        raise ValueError("dimension subset must be non-empty")
    size = len(sub)
    if len(target) < size:
        return NOT_CONTAINABLE
    sums = []
    agg = None
    for k in dims:
        col = sub.trajectory.columns[k][sub.start : sub.stop]
        m = column_distance_matrix(col, target.columns[k], dimensions[k].kind)
        s = slide_window_sums(m, size)
        sums.append(s)
        term = s / stats.max_point_distance[k]
        agg = term if agg is None else agg + term
    offset = int(np.argmin(agg))
    return DistanceVector(np.array([s[offset] for s in sums]), offset)


def _spatial_max(points: np.ndarray) -> float:
    n = len(points)
    if n < 2:
        return 0.0
    if n * (n - 1) // 2 <= _MAX_EXACT_PAIRS:
        dx = points[:, 0][:, None] - points[:, 0][None, :]
        dy = points[:, 1][:, None] - points[:, 1][None, :]
        return float(np.sqrt(dx * dx + dy * dy).max())
    rng = np.random.default_rng(_SAMPLE_SEED)
    i = rng.integers(0, n, size=_MAX_EXACT_PAIRS)
    j = rng.integers(0, n, size=_MAX_EXACT_PAIRS)
    dx = points[i, 0] - points[j, 0]
    dy = points[i, 1] - points[j, 1]
    return float(np.sqrt(dx * dx + dy * dy).max())


def compute_stats(dataset: Dataset) -> NormalizationStats:
    """Per-dimension maximum point distance over a dataset.

    Categorical and numeric maxima are exact (the equality metric is {0, 1};
    the numeric maximum is range max - min). The spatial maximum is exact
    over all point pairs up to 10^6 pairs, and a seeded deterministic sample
    of 10^6 pairs beyond that. Constant dimensions map to 1.0.
    """
    if not dataset.trajectories:
        raise ValueError("cannot compute stats of an empty dataset")
    maxes = np.ones(len(dataset.dimensions))
    for dim in dataset.dimensions:
        cols = [t.columns[dim.index] for t in dataset.trajectories]
        if dim.kind == "categorical":
            distinct = set()
            for c in cols:
                distinct.update(np.unique(c).tolist())
                if len(distinct) > 1:
                    break
            value = 1.0 if len(distinct) > 1 else 0.0
        elif dim.kind == "numeric":
            value = float(max(c.max() for c in cols) - min(c.min() for c in cols))
        else:
            value = _spatial_max(np.concatenate(cols, axis=0))
        maxes[dim.index] = value if value > 0 else 1.0
    return NormalizationStats(maxes)


def aggregate_distances(dists: np.ndarray, dims: tuple[int, ...], stats: NormalizationStats) -> np.ndarray:
    """Normalized scalar distance per row of an (n, |dims|) distance table.

    Accumulates dimension terms in ascending subset order; every scoring
    path uses this same order so aggregated values match bit for bit.
    NOT-CONTAINABLE rows (inf) stay inf.
    """
    agg = None
    for pos, k in enumerate(dims):
        term = dists[:, pos] / stats.max_point_distance[k]
        agg = term.copy() if agg is None else agg + term
    return agg
