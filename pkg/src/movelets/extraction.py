"""Candidate generation and class-frequency scoring for one trajectory.

A movelet candidate is a contiguous slice of a source trajectory restricted
to a non-empty dimension subset. Candidates are scored only against the
trajectories of the source's own class: per dimension, the relative
frequency rescales the candidate's summed alignment distances against the
largest distance observed in the scored pool, and the candidate quality is
the mean of the per-dimension frequencies. The pruning threshold tau is a
configurable fraction of the best quality in the pool; candidates below it
land in the bucket, kept for staged recovery during discovery.

Two generation strategies:

- ``no-pivots``: enumerate every slice of size 1..m crossed with every
  dimension subset, score once, apply one tau cut.
- ``pivots``: start from size-1 slices; at each size keep only the tau
  survivors, resolve overlaps within a dimension subset toward the higher
  quality, and grow survivors by one adjacent point (front or back) to
  seed the next size. Each size derives its own tau from its own best.

m is the full trajectory length, or floor(log2(length)) when the log limit
is on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .counting import log_size_limit
from .data import DimensionDescriptor, Subtrajectory, Trajectory
from .distance import NormalizationStats, column_distance_matrix


@dataclass(frozen=True)
class ExtractionConfig:
    """Knobs of the candidate search.

    variant: "no-pivots" or "pivots".
    log_limit: cap candidate sizes at floor(log2(trajectory length)).
    tau_factor: fraction of the best quality that defines the pruning
        threshold; in (0, 1].
    """

    variant: str = "no-pivots"
    log_limit: bool = True
    tau_factor: float = 0.9

    def __post_init__(self):
        if self.variant not in ("no-pivots", "pivots"):
            raise ValueError(f"unknown extraction variant {self.variant!r}")
        if not 0.0 < self.tau_factor <= 1.0:
            raise ValueError(f"tau_factor must be in (0, 1], got {self.tau_factor}")


@dataclass
class MoveletCandidate:
    """A slice of a source trajectory restricted to a dimension subset.

    Distance tables are filled in as the candidate moves through the
    pipeline: ``class_dists`` against the source's class during extraction,
    ``dataset_dists`` against every trajectory during discovery. Rows of
    value inf mark NOT-CONTAINABLE targets. ``pool_max`` holds, per dataset
    dimension, the largest finite distance seen in the candidate pool this
    candidate was scored with (the denominator of the relative frequency).
    """

    source: Trajectory
    start: int
    stop: int
    dims: tuple[int, ...]

    class_tids: tuple[str, ...] | None = None
    class_dists: np.ndarray | None = None
    class_offsets: np.ndarray | None = None
    pool_max: np.ndarray | None = None

    quality: float | None = None
    quality_kind: str | None = None
    sp: np.ndarray | None = None
    fscore: float | None = None
    duplicate_count: int = 1

    dataset_tids: tuple[str, ...] | None = None
    dataset_dists: np.ndarray | None = None
    dataset_offsets: np.ndarray | None = None

    @property
    def length(self) -> int:
        return self.stop - self.start

    @property
    def subtrajectory(self) -> Subtrajectory:
        return Subtrajectory(self.source, self.start, self.stop)

    def key(self) -> tuple[int, int, tuple[int, ...]]:
        return (self.start, self.stop, self.dims)

    def value_key(self) -> tuple:
        """Hashable identity by dimension subset and point values (not position)."""
        parts: list = [self.dims]
        for k in self.dims:
            col = self.source.columns[k][self.start : self.stop]
            if col.ndim == 2:
                parts.append(tuple(map(tuple, col.tolist())))
            else:
                parts.append(tuple(col.tolist()))
        return tuple(parts)

    def overlaps(self, other: "MoveletCandidate") -> bool:
        return self.source is other.source and self.start < other.stop and other.start < self.stop

    def covered_class_ids(self) -> frozenset[str]:
        """Class trajectories containing the candidate exactly (all-zero distance rows)."""
        if self.class_dists is None:
            raise ValueError("class distances not computed yet")
        zero = (self.class_dists == 0.0).all(axis=1)
        return frozenset(tid for tid, z in zip(self.class_tids, zero) if z)


@dataclass
class ExtractionResult:
    """Outcome of one trajectory's candidate search.

    ``best_candidates`` passed the tau cut (deduplicated); ``bucket`` holds
    everything excluded, sorted by quality descending. ``tau`` is the
    threshold applied (for the pivots variant, the smallest of the per-size
    thresholds, so the quality >= tau invariant holds for every survivor);
    ``taus`` lists the per-size values. ``scored_keys`` records every
    (start, stop, dims) candidate that was generated and scored.
    """

    best_candidates: list[MoveletCandidate]
    bucket: list[MoveletCandidate]
    tau: float
    taus: list[float] = field(default_factory=list)
    scored_keys: list[tuple[int, int, tuple[int, ...]]] = field(default_factory=list)

    @property
    def n_scored(self) -> int:
        return len(self.scored_keys)


def dimension_subsets(d: int) -> list[tuple[int, ...]]:
    """All non-empty subsets of range(d), ordered by size then lexicographically."""
    out = []
    for size in range(1, d + 1):
        out.extend(itertools.combinations(range(d), size))
    return out


def rank_key(c: MoveletCandidate):
    # Deterministic total order: quality desc, longer slice first, then
    # smaller start, then subset order.
    return (-c.quality, -(c.stop - c.start), c.start, c.dims)


def compute_candidate_distances(
    source: Trajectory,
    jobs: dict[tuple[int, tuple[int, ...]], np.ndarray],
    targets,
    dimensions: tuple[DimensionDescriptor, ...],
    stats: NormalizationStats,
) -> dict[tuple[int, tuple[int, ...]], tuple[np.ndarray, np.ndarray]]:
    """Best-alignment distances for batches of slices of one source trajectory.

    ``jobs`` maps (size, dims subset) to an array of slice start indices.
    Returns, per job, the distance table of shape (n_starts, n_targets,
    len(subset)) and the chosen offsets (n_starts, n_targets). Targets
    shorter than a size get inf distances and offset -1.

    Window sums grow incrementally with the size: the sums at size L are
    the sums at L-1 plus one more point-distance diagonal, which keeps the
    whole batch at a handful of array operations per target and matches
    ``slide_window_sums`` bit for bit.
    """
    sizes = sorted({size for size, _ in jobs})
    by_size: dict[int, list[tuple[tuple[int, ...], np.ndarray]]] = {s: [] for s in sizes}
    for (size, dims), starts in jobs.items():
        by_size[size].append((dims, starts))
    need_dims = sorted({k for _, dims in jobs for k in dims})

    out: dict[tuple[int, tuple[int, ...]], tuple[np.ndarray, np.ndarray]] = {}
    n_targets = len(targets)
    for (size, dims), starts in jobs.items():
        out[(size, dims)] = (
            np.empty((len(starts), n_targets, len(dims))),
            np.empty((len(starts), n_targets), dtype=np.int64),
        )

    n_src = len(source)
    for j, target in enumerate(targets):
        n_tgt = len(target)
        mats = {
            k: column_distance_matrix(source.columns[k], target.columns[k], dimensions[k].kind)
            for k in need_dims
        }
        ws = dict(mats)
        cur = 1
        for size in sizes:
            if size > n_tgt:
                for dims, starts in by_size[size]:
                    dists, offsets = out[(size, dims)]
                    dists[:, j, :] = np.inf
                    offsets[:, j] = -1
                continue
            while cur < size:
                for k in need_dims:
                    ws[k] = ws[k][: n_src - cur, : n_tgt - cur] + mats[k][cur:, cur:]
                cur += 1
            for dims, starts in by_size[size]:
                rows = {k: ws[k][starts] for k in dims}
                agg = None
                for k in dims:
                    term = rows[k] / stats.max_point_distance[k]
                    agg = term.copy() if agg is None else agg + term
                best = np.argmin(agg, axis=1)
                dists, offsets = out[(size, dims)]
                pick = np.arange(len(starts))
                for pos, k in enumerate(dims):
                    dists[:, j, pos] = rows[k][pick, best]
                offsets[:, j] = best
    return out


def relative_frequency(candidate: MoveletCandidate, class_set, dim_index: int) -> float:
    """Normalized presence of a candidate across its class, in one dimension.

    Each class trajectory contributes its summed alignment distance in the
    dimension, rescaled against the pool-wide maximum; a NOT-CONTAINABLE
    trajectory contributes nothing. If the pool maximum is zero the
    frequency is 1.0 by definition.
    """
    if dim_index not in candidate.dims:
        raise ValueError(f"dimension {dim_index} not in candidate subset {candidate.dims}")
    if candidate.class_dists is None or candidate.pool_max is None:
        raise ValueError("candidate has not been scored against its class yet")
    pos = candidate.dims.index(dim_index)
    col = candidate.class_dists[:, pos]
    max_k = float(candidate.pool_max[dim_index])
    if max_k == 0.0:
        return 1.0
    contrib = np.where(np.isfinite(col), max_k - col, 0.0)
    return float(contrib.sum() / (max_k * len(class_set)))


def frequency_quality(candidate: MoveletCandidate, class_set) -> float:
    """Mean per-dimension relative frequency; stored on the candidate."""
    freqs = [relative_frequency(candidate, class_set, k) for k in candidate.dims]
    quality = float(sum(freqs) / len(freqs))
    candidate.quality = quality
    candidate.quality_kind = "frequency"
    candidate.sp = None
    return quality


def _pool_maximum(table, n_dims: int) -> np.ndarray:
    maxes = np.zeros(n_dims)
    for (_, dims), (dists, _) in table.items():
        for pos, k in enumerate(dims):
            col = dists[:, :, pos]
            finite = col[np.isfinite(col)]
            if finite.size:
                maxes[k] = max(maxes[k], float(finite.max()))
    return maxes


def _score_pool(
    candidates: list[MoveletCandidate],
    table,
    index_of: dict[tuple, tuple[tuple, int]],
    class_set,
    n_dims: int,
) -> None:
    """Attach class distances, pool maxima, and frequency qualities to a scored pool."""
    pool_max = _pool_maximum(table, n_dims)
    tids = tuple(t.tid for t in class_set)
    for c in candidates:
        job, row = index_of[c.key()]
        dists, offsets = table[job]
        c.class_tids = tids
        c.class_dists = dists[row]
        c.class_offsets = offsets[row]
        c.pool_max = pool_max
        frequency_quality(c, class_set)


def _score_batch(candidates, class_set, dimensions, stats):
    """Bulk-score a batch of candidates from one source trajectory against its class."""
    jobs: dict[tuple[int, tuple[int, ...]], list[int]] = {}
    for c in candidates:
        jobs.setdefault((c.length, c.dims), []).append(c.start)
    job_arrays = {key: np.array(starts, dtype=np.int64) for key, starts in jobs.items()}
    index_of = {}
    for (size, dims), starts in jobs.items():
        for row, start in enumerate(starts):
            index_of[(start, start + size, dims)] = ((size, dims), row)
    source = candidates[0].source
    table = compute_candidate_distances(source, job_arrays, class_set, dimensions, stats)
    _score_pool(candidates, table, index_of, class_set, len(dimensions))


def redundancy_filter(candidates: list[MoveletCandidate]) -> list[MoveletCandidate]:
    """Drop exact duplicates (same dimension subset and point values).

    Keeps the first occurrence in the given order (callers pass a
    descending-quality list) and records how many copies it stood for.
    """
    survivors: dict[tuple, MoveletCandidate] = {}
    for c in candidates:
        key = c.value_key()
        if key in survivors:
            survivors[key].duplicate_count += 1
        else:
            survivors[key] = c
    return list(survivors.values())


def _size_cap(trajectory: Trajectory, cfg: ExtractionConfig) -> int:
    n = len(trajectory)
    return log_size_limit(n) if cfg.log_limit else n


def extract_no_pivots(
    trajectory: Trajectory,
    class_set,
    cfg: ExtractionConfig,
    stats: NormalizationStats,
    dimensions: tuple[DimensionDescriptor, ...],
) -> ExtractionResult:
    """Score the full slice-by-subset candidate universe, then cut once at tau."""
    if not class_set:
        raise ValueError("class set must be non-empty")
    n = len(trajectory)
    m = _size_cap(trajectory, cfg)
    subsets = dimension_subsets(len(dimensions))
    candidates = [
        MoveletCandidate(trajectory, s, s + size, dims)
        for size in range(1, m + 1)
        for dims in subsets
        for s in range(n - size + 1)
    ]
    _score_batch(candidates, class_set, dimensions, stats)
    candidates.sort(key=rank_key)
    tau = candidates[0].quality * cfg.tau_factor
    best = [c for c in candidates if c.quality >= tau]
    bucket = [c for c in candidates if c.quality < tau]
    best = redundancy_filter(best)
    return ExtractionResult(
        best_candidates=best,
        bucket=bucket,
        tau=tau,
        taus=[tau],
        scored_keys=[c.key() for c in candidates],
    )


def _resolve_overlaps(survivors: list[MoveletCandidate]) -> tuple[list[MoveletCandidate], list[MoveletCandidate]]:
    """Within each dimension subset, keep the higher-quality of overlapping slices."""
    kept: list[MoveletCandidate] = []
    losers: list[MoveletCandidate] = []
    by_dims: dict[tuple[int, ...], list[MoveletCandidate]] = {}
    for c in survivors:
        by_dims.setdefault(c.dims, []).append(c)
    for dims in sorted(by_dims):
        group = sorted(by_dims[dims], key=rank_key)
        chosen: list[MoveletCandidate] = []
        for c in group:
            if any(c.overlaps(other) for other in chosen):
                losers.append(c)
            else:
                chosen.append(c)
        kept.extend(chosen)
    return kept, losers


def extract_pivots(
    trajectory: Trajectory,
    class_set,
    cfg: ExtractionConfig,
    stats: NormalizationStats,
    dimensions: tuple[DimensionDescriptor, ...],
) -> ExtractionResult:
    """Iterative widening: tau survivors of each size seed the next size.

    Size 1 scores every point; size w+1 candidates extend a surviving
    size-w slice with its previous or next neighbor point, per dimension
    subset. Each size is scored as its own pool and gets its own tau.
    """
    if not class_set:
        raise ValueError("class set must be non-empty")
    n = len(trajectory)
    m = _size_cap(trajectory, cfg)
    subsets = dimension_subsets(len(dimensions))

    best_acc: list[MoveletCandidate] = []
    bucket_acc: list[MoveletCandidate] = []
    taus: list[float] = []
    scored_keys: list[tuple] = []
    frontier: dict[tuple[int, ...], list[tuple[int, int]]] = {}

    for size in range(1, m + 1):
        if size == 1:
            gen = {dims: [(s, s + 1) for s in range(n)] for dims in subsets}
        else:
            gen = {}
            for dims in subsets:
                grown = set()
                for s, e in frontier.get(dims, ()):
                    if s > 0:
                        grown.add((s - 1, e))
                    if e < n:
                        grown.add((s, e + 1))
                if grown:
                    gen[dims] = sorted(grown)
        candidates = [
            MoveletCandidate(trajectory, s, e, dims)
            for dims in subsets
            if dims in gen
            for s, e in gen[dims]
        ]
        if not candidates:
            break
        _score_batch(candidates, class_set, dimensions, stats)
        scored_keys.extend(c.key() for c in candidates)
        candidates.sort(key=rank_key)
        tau = candidates[0].quality * cfg.tau_factor
        taus.append(tau)
        survivors = [c for c in candidates if c.quality >= tau]
        bucket_acc.extend(c for c in candidates if c.quality < tau)
        survivors, overlap_losers = _resolve_overlaps(survivors)
        bucket_acc.extend(overlap_losers)
        survivors = redundancy_filter(survivors)
        best_acc.extend(survivors)
        frontier = {}
        for c in survivors:
            frontier.setdefault(c.dims, []).append((c.start, c.stop))

    best_acc.sort(key=rank_key)
    bucket_acc.sort(key=rank_key)
    return ExtractionResult(
        best_candidates=best_acc,
        bucket=bucket_acc,
        tau=min(taus) if taus else 0.0,
        taus=taus,
        scored_keys=scored_keys,
    )


def extract(trajectory, class_set, cfg, stats, dimensions) -> ExtractionResult:
    """Dispatch to the configured extraction variant."""
    if cfg.variant == "pivots":
        return extract_pivots(trajectory, class_set, cfg, stats, dimensions)
    return extract_no_pivots(trajectory, class_set, cfg, stats, dimensions)
