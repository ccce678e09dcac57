"""Promotion of frequent candidates to movelets.

Candidates that survived extraction are re-scored against the entire
dataset. Trajectories are ordered by aggregated normalized distance to the
candidate and every tie-closed prefix of that ordering is tried as the
predicted-positive set for the candidate's class; the best F1 is the
candidate's score and the split points sp are the per-dimension maxima
inside the winning prefix. A candidate whose best F1 does not beat the
degenerate predict-everything-positive prefix carries no class signal and
is dropped. Survivors become movelets greedily, best score first, skipping
any candidate that overlaps an already selected movelet in the source
trajectory.

If nothing survives, recovery re-runs the same procedure over the bucket in
consecutive slices of one tenth of the bucket (highest quality first),
stopping at the first slice that yields movelets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .distance import NormalizationStats, aggregate_distances
from .extraction import MoveletCandidate, compute_candidate_distances, rank_key


@dataclass
class Movelet:
    """A discriminative subtrajectory: a promoted candidate with its split points.

    ``covered_class`` holds same-class trajectory ids at exactly zero
    distance (hard containment, used for queue pruning); ``covered_dataset``
    holds ids of any class within the split points in every dimension.
    """

    candidate: MoveletCandidate
    sp: np.ndarray
    fscore: float
    covered_class: frozenset[str]
    covered_dataset: frozenset[str]
    mid: str | None = None

    @property
    def source(self):
        return self.candidate.source

    @property
    def start(self) -> int:
        return self.candidate.start

    @property
    def stop(self) -> int:
        return self.candidate.stop

    @property
    def dims(self) -> tuple[int, ...]:
        return self.candidate.dims

    @property
    def length(self) -> int:
        return self.candidate.length


def trivial_fscore(n_class: int, n_total: int) -> float:
    """F1 of predicting every trajectory positive: 2p/(1+p) at prevalence p."""
    p = n_class / n_total
    return 2.0 * p / (p + 1.0)


def ensure_dataset_distances(candidates, dataset: Dataset, stats: NormalizationStats) -> None:
    """Fill ``dataset_dists`` for candidates of one source trajectory (batched)."""
    pending = [c for c in candidates if c.dataset_dists is None]
    if not pending:
        return
    jobs: dict[tuple[int, tuple[int, ...]], list[int]] = {}
    for c in pending:
        jobs.setdefault((c.length, c.dims), []).append(c.start)
    job_arrays = {key: np.array(v, dtype=np.int64) for key, v in jobs.items()}
    index_of = {}
    for (size, dims), starts in jobs.items():
        for row, start in enumerate(starts):
            index_of[(start, start + size, dims)] = ((size, dims), row)
    source = pending[0].source
    table = compute_candidate_distances(
        source, job_arrays, dataset.trajectories, dataset.dimensions, stats
    )
    tids = tuple(t.tid for t in dataset.trajectories)
    for c in pending:
        job, row = index_of[c.key()]
        dists, offsets = table[job]
        c.dataset_tids = tids
        c.dataset_dists = dists[row]
        c.dataset_offsets = offsets[row]


def fscore_quality(
    candidate: MoveletCandidate, dataset: Dataset, stats: NormalizationStats
) -> tuple[np.ndarray, float]:
    """Best prefix F1 of the candidate over the dataset, and its split points.

    Trajectories are sorted ascending by aggregated normalized distance
    (stable, so ties keep dataset order); prefix boundaries that would split
    a group of equal distances are skipped, which makes a boundary
    equivalent to thresholding the distance. F1 ties break toward the
    smaller prefix. The split points are the per-dimension distance maxima
    inside the winning prefix.
    """
    ensure_dataset_distances([candidate], dataset, stats)
    label = candidate.source.label
    labels = np.array([t.label == label for t in dataset.trajectories])
    agg = aggregate_distances(candidate.dataset_dists, candidate.dims, stats)

    order = np.argsort(agg, kind="stable")
    sorted_agg = agg[order]
    positive = labels[order]
    n = len(order)
    n_class = int(labels.sum())

    tp = np.cumsum(positive)
    b = np.arange(1, n + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = tp / b
        recall = tp / n_class
        f1 = np.where(tp > 0, 2.0 * precision * recall / (precision + recall), 0.0)

    closed = np.ones(n, dtype=bool)
    closed[:-1] = sorted_agg[:-1] < sorted_agg[1:]
    valid = np.nonzero(closed)[0]
    best = valid[int(np.argmax(f1[valid]))]

    prefix_rows = candidate.dataset_dists[order[: best + 1]]
    sp = prefix_rows.max(axis=0)
    score = float(f1[best])
    candidate.sp = sp
    candidate.fscore = score
    return sp, score


def covered_by_movelet(movelet: Movelet, class_set) -> frozenset[str]:
    """Same-class trajectory ids at exactly zero distance in every dimension."""
    c = movelet.candidate
    if c.dataset_dists is None:
        raise ValueError("movelet candidate has no dataset distances")
    zero_rows = (c.dataset_dists == 0.0).all(axis=1)
    wanted = {t.tid for t in class_set}
    return frozenset(tid for tid, z in zip(c.dataset_tids, zero_rows) if z and tid in wanted)


def _dedupe_equal(candidates) -> list[MoveletCandidate]:
    # Same dimension subset and point values: keep the first occurrence.
    seen = set()
    out = []
    for c in candidates:
        key = c.value_key()
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


def select_non_overlapping(candidates) -> list[MoveletCandidate]:
    """Greedy pick by fscore descending (ties: longer slice, smaller start),
    skipping candidates that overlap an already selected one."""
    ordered = sorted(candidates, key=lambda c: (-c.fscore, -c.length, c.start, c.dims))
    chosen: list[MoveletCandidate] = []
    for c in ordered:
        if not any(c.overlaps(k) for k in chosen):
            chosen.append(c)
    return chosen


def promote_candidates(candidates, dataset: Dataset, stats: NormalizationStats) -> list[Movelet]:
    """Score candidates of one source trajectory and keep the movelets.

    Drops candidates whose best F1 does not exceed the trivial all-positive
    baseline, then resolves overlaps greedily.
    """
    if not candidates:
        return []
    ensure_dataset_distances(candidates, dataset, stats)
    label = candidates[0].source.label
    n_class = len(dataset.by_class(label))
    floor = trivial_fscore(n_class, len(dataset.trajectories))
    scored = []
    for c in candidates:
        _, score = fscore_quality(c, dataset, stats)
        if score > floor:
            scored.append(c)
    selected = select_non_overlapping(scored)
    class_set = dataset.by_class(label)
    movelets = []
    for c in selected:
        within_sp = (c.dataset_dists <= c.sp).all(axis=1)
        covered_dataset = frozenset(
            tid for tid, ok in zip(c.dataset_tids, within_sp) if ok
        )
        m = Movelet(
            candidate=c,
            sp=c.sp,
            fscore=c.fscore,
            covered_class=frozenset(),
            covered_dataset=covered_dataset,
        )
        m.covered_class = covered_by_movelet(m, class_set)
        movelets.append(m)
    return movelets


def discover_movelets(
    best_candidates,
    bucket,
    dataset: Dataset,
    stats: NormalizationStats,
    trace: list | None = None,
) -> list[Movelet]:
    """Movelets of one source trajectory, with staged bucket recovery.

    Equal candidates are filtered first; survivors of the F1 floor are
    selected greedily without point overlap. When nothing survives and the
    bucket is non-empty, consecutive slices of ceil(|bucket| / 10)
    candidates (quality descending) are retried until one yields movelets
    or the bucket is exhausted. ``trace`` (if given) collects one record
    per attempt.
    """

    def attempt(cands, stage):
        unique = _dedupe_equal(cands)
        movelets = promote_candidates(unique, dataset, stats)
        if trace is not None:
            trace.append(
                {"stage": stage, "candidates": len(cands), "scored": len(unique), "movelets": len(movelets)}
            )
        return movelets

    movelets = attempt(best_candidates, "best")
    if movelets or not bucket:
        return movelets
    ordered = sorted(bucket, key=rank_key)
    slice_size = math.ceil(len(ordered) / 10)
    for i, lo in enumerate(range(0, len(ordered), slice_size)):
        movelets = attempt(ordered[lo : lo + slice_size], f"bucket_slice_{i + 1}")
        if movelets:
            break
    return movelets
