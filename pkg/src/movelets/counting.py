"""Closed-form counts of the candidate search space.

A trajectory of length n has n*(n+1)/2 contiguous subtrajectories; limiting
the slice size to m leaves sum_{w=1..m} (n-w+1). Each subtrajectory is
crossed with every non-empty dimension subset, a factor of 2^d - 1.
"""

from __future__ import annotations

import math


def log_size_limit(n: int) -> int:
    """Size cap used by the log-limited variants: floor(log2(n)), at least 1."""
    if n < 1:
        raise ValueError(f"trajectory length must be >= 1, got {n}")
    return max(1, int(math.floor(math.log2(n))))


def count_subtrajectories(n: int, limit: int | None = None) -> int:
    """Number of contiguous slices of a length-n trajectory, optionally capped at size ``limit``."""
    if n < 1:
        raise ValueError(f"trajectory length must be >= 1, got {n}")
    if limit is None:
        return n * (n + 1) // 2
    if limit < 1:
        raise ValueError(f"size limit must be >= 1, got {limit}")
    m = min(limit, n)
    return sum(n - w + 1 for w in range(1, m + 1))


def count_candidates(n: int, d: int, limit: int | None = None) -> int:
    """Slices crossed with the 2^d - 1 non-empty dimension subsets."""
    if d < 1:
        raise ValueError(f"dimension count must be >= 1, got {d}")
    return count_subtrajectories(n, limit) * (2**d - 1)
