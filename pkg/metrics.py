"""
In-process work counters for the shortcutting drivers.

Counters mirror the work/span quantities the algorithms are analyzed by:
vertices and arcs visited by searches, the largest hop distance any search
was allowed to run, shortcut counts and abort/retry tallies.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np


@dataclass
class WorkCounters:
    arcs_visited: int = 0
    vertices_visited: int = 0
    searches: int = 0
    max_search_dist: int = 0
    core_visits: int = 0
    fringe_visits: int = 0
    max_tag_len: int = 0
    shortcuts: int = 0
    aborts: int = 0
    retries: int = 0

    def observe_search(self, dist: int) -> None:
        self.searches += 1
        if dist > self.max_search_dist:
            self.max_search_dist = dist

    def merge(self, other: "WorkCounters") -> None:
        """Fold another run's counters in; callers merge in run-index order."""
        self.arcs_visited += other.arcs_visited
        self.vertices_visited += other.vertices_visited
        self.searches += other.searches
        self.max_search_dist = max(self.max_search_dist, other.max_search_dist)
        self.core_visits += other.core_visits
        self.fringe_visits += other.fringe_visits
        self.max_tag_len = max(self.max_tag_len, other.max_tag_len)
        self.shortcuts += other.shortcuts
        self.aborts += other.aborts
        self.retries += other.retries

    @property
    def work(self) -> int:
        return self.arcs_visited + self.vertices_visited

    def as_dict(self) -> dict:
        return asdict(self)


def timer():
    """Start a wall-clock timer; the returned closure reports elapsed milliseconds."""
    start = time.perf_counter()

    def _elapsed_ms() -> float:
        return (time.perf_counter() - start) * 1000.0

    return _elapsed_ms


def scaling_slope(sizes: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(size)."""
    if len(sizes) != len(values) or len(set(sizes)) < 2:
        raise ValueError("need values at two or more distinct sizes")
    if min(sizes) <= 0 or min(values) <= 0:
        raise ValueError("sizes and values must be positive")
    slope, _ = np.polyfit(np.log(np.asarray(sizes, dtype=float)), np.log(np.asarray(values, dtype=float)), 1)
    return float(slope)
