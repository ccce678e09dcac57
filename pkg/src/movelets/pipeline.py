"""Greedy class-aware discovery loop over a labeled dataset.

Each class is processed independently (and may run on its own worker): its
trajectories enter a queue in dataset order; the head is popped, candidates
are extracted and promoted to movelets, and every class trajectory covered
by a strict majority of those movelets is removed from the queue, so near
duplicates of an already mined trajectory are never searched. Bookkeeping
counts trajectories compared (popped and processed) versus pruned (removed
as covered), which always sum to the class size.
"""

from __future__ import annotations

import json
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .data import Dataset
from .discovery import Movelet, discover_movelets
from .distance import NormalizationStats, compute_stats
from .extraction import ExtractionConfig, extract


class ConfigurationError(ValueError):
    """The dataset or configuration cannot support a discovery run."""


@dataclass
class ClassStats:
    candidates_generated: int = 0
    movelets_found: int = 0
    trajectories_compared: int = 0
    trajectories_pruned: int = 0
    wall_time: float = 0.0


@dataclass
class RunReport:
    """Per-class and total bookkeeping of one discovery run."""

    method: str
    config: dict
    per_class: dict[str, ClassStats] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def totals(self) -> ClassStats:
        total = ClassStats()
        for s in self.per_class.values():
            total.candidates_generated += s.candidates_generated
            total.movelets_found += s.movelets_found
            total.trajectories_compared += s.trajectories_compared
            total.trajectories_pruned += s.trajectories_pruned
            total.wall_time += s.wall_time
        total.wall_time = self.wall_time
        return total

    def to_dict(self) -> dict:
        fields = ("candidates_generated", "movelets_found", "trajectories_compared", "trajectories_pruned", "wall_time")
        return {
            "method": self.method,
            "config": self.config,
            "per_class": {
                label: {f: getattr(s, f) for f in fields} for label, s in self.per_class.items()
            },
            "total": {f: getattr(self.totals, f) for f in fields},
        }

    def to_text(self) -> str:
        """Plain key = value rendering, one fact per line."""
        lines = [f"method = {self.method}"]
        for key, value in self.config.items():
            lines.append(f"config.{key} = {value}")
        d = self.to_dict()
        for label in d["per_class"]:
            for f, v in d["per_class"][label].items():
                lines.append(f"class.{label}.{f} = {v}")
        for f, v in d["total"].items():
            lines.append(f"total.{f} = {v}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def covered_trajectories(movelets: list[Movelet]) -> set[str]:
    """Class trajectories covered by a strict majority of the given movelets."""
    if not movelets:
        return set()
    counts: dict[str, int] = {}
    for m in movelets:
        for tid in m.covered_class:
            counts[tid] = counts.get(tid, 0) + 1
    half = len(movelets) / 2
    return {tid for tid, c in counts.items() if c > half}


def _process_class(label, dataset, cfg, stats):
    t0 = time.perf_counter()
    class_set = dataset.by_class(label)
    queue = deque(class_set)
    report = ClassStats()
    movelets: list[Movelet] = []
    while queue:
        current = queue.popleft()
        extraction = extract(current, class_set, cfg, stats, dataset.dimensions)
        report.candidates_generated += extraction.n_scored
        found = discover_movelets(extraction.best_candidates, extraction.bucket, dataset, stats)
        covered = covered_trajectories(found)
        if covered:
            before = len(queue)
            queue = deque(t for t in queue if t.tid not in covered)
            report.trajectories_pruned += before - len(queue)
        report.trajectories_compared += 1
        report.movelets_found += len(found)
        movelets.extend(found)
    report.wall_time = time.perf_counter() - t0
    return movelets, report


def run(
    dataset: Dataset,
    cfg: ExtractionConfig,
    workers: int | None = None,
    method_name: str | None = None,
) -> tuple[list[Movelet], RunReport]:
    """Full discovery over a dataset: extraction, promotion, queue pruning.

    Classes are independent work units and run on a thread pool of
    ``workers`` (defaults to one per class). Results are assembled in
    class order, so runs are deterministic regardless of worker count.
    """
    if len(dataset.classes) < 2:
        raise ConfigurationError("at least 2 classes required")
    stats = compute_stats(dataset)
    t0 = time.perf_counter()
    labels = list(dataset.classes)
    pool_size = workers if workers else len(labels)
    report = RunReport(
        method=method_name or cfg.variant,
        config={
            "variant": cfg.variant,
            "log_limit": cfg.log_limit,
            "tau_factor": cfg.tau_factor,
            "workers": pool_size,
        },
    )
    movelets: list[Movelet] = []
    with ThreadPoolExecutor(max_workers=max(1, pool_size)) as pool:
        results = list(pool.map(lambda lb: _process_class(lb, dataset, cfg, stats), labels))
    for label, (found, class_report) in zip(labels, results):
        report.per_class[label] = class_report
        movelets.extend(found)
    for i, m in enumerate(movelets):
        m.mid = f"m{i:04d}"
    report.wall_time = time.perf_counter() - t0
    return movelets, report
