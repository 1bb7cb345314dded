"""
Oracle - brute-force ground truth used by the tests and the `verify` command.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

import config
from digraph import Arc, ArcInput, Digraph, _arc_array, union_with_shortcuts
from spanning_tree import DirectedTree

logger = logging.getLogger("oracle")


class OracleGuardError(ValueError):
    """Graph too large for a quadratic-memory oracle."""


@dataclass
class VerifyReport:
    violations: List[Tuple[object, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, item, reason: str) -> None:
        self.violations.append((item, reason))


def _reach(g: Digraph, s: int) -> List[int]:
    adj = g.out_lists
    seen = {s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return sorted(seen)


class ClosureMatrix:
    """Reflexive reachability: bits[u, v] is True iff there is a (possibly empty) path u -> v."""

    def __init__(self, bits: np.ndarray):
        self.bits = bits

    @property
    def n(self) -> int:
        return int(self.bits.shape[0])

    def reaches(self, u: int, v: int) -> bool:
        return bool(self.bits[u, v])

    def pairs(self) -> List[Arc]:
        """Related pairs (u, v) with u != v."""
        off_diagonal = self.bits & ~np.eye(self.n, dtype=bool)
        return [tuple(p) for p in np.argwhere(off_diagonal).tolist()]

    def __eq__(self, other) -> bool:
        return isinstance(other, ClosureMatrix) and np.array_equal(self.bits, other.bits)


def transitive_closure(g: Digraph) -> ClosureMatrix:
    """One BFS per vertex."""
    if g.n > config.ORACLE_MAX_N:
        raise OracleGuardError(f"closure oracle limited to n <= {config.ORACLE_MAX_N}, got {g.n}")
    bits = np.zeros((g.n, g.n), dtype=bool)
    for u in range(g.n):
        bits[u, _reach(g, u)] = True
    return ClosureMatrix(bits)


def reach_set(g: Digraph, s: int) -> List[int]:
    return _reach(g, s)


def verify_shortcuts(g: Digraph, shortcuts: ArcInput) -> VerifyReport:
    """Every shortcut (u, v) must have u reaching v in g, and G_S must keep g's closure."""
    if not isinstance(shortcuts, np.ndarray) and hasattr(shortcuts, "arc_array"):
        shortcuts = shortcuts.arc_array()
    arcs = _arc_array(shortcuts)
    closure = transitive_closure(g)
    report = VerifyReport()
    for u, v in arcs.tolist():
        if not (0 <= u < g.n and 0 <= v < g.n):
            report.add((u, v), "endpoint out of range")
        elif not closure.reaches(u, v):
            report.add((u, v), f"{v} is not reachable from {u}")
    if report.ok and transitive_closure(union_with_shortcuts(g, arcs)) != closure:
        report.add(None, "closure of G_S differs from closure of G")
    if not report.ok:
        logger.warning(f"⚠️ {len(report.violations)} shortcut violations on n={g.n}")
    return report


def hop_distance(g: Digraph, u: int, v: int) -> Optional[int]:
    """Minimum number of arcs on a u -> v path; None when v is unreachable."""
    if u == v:
        return 0
    adj = g.out_lists
    dist = {u: 0}
    queue = deque([u])
    while queue:
        w = queue.popleft()
        for x in adj[w]:
            if x not in dist:
                dist[x] = dist[w] + 1
                if x == v:
                    return dist[x]
                queue.append(x)
    return None


def estimate_diameter(g: Digraph, pairs: Optional[Sequence[Arc]] = None, samples: int = 0,
                      rng=None) -> Optional[int]:
    """
    Largest finite hop distance over `pairs`, or over `samples` random
    source vertices (all their targets) when no pairs are given.
    None means no related pair was measured.
    """
    if pairs is None:
        pairs = []
        if samples and g.n:
            sources = [rng.randrange(g.n) for _ in range(samples)] if rng else range(min(samples, g.n))
            for s in sources:
                pairs.extend((s, v) for v in _reach(g, s) if v != s)
    best = None
    for u, v in pairs:
        d = hop_distance(g, u, v)
        if d is not None and (best is None or d > best):
            best = d
    return best


def verify_tree(g: Digraph, t: DirectedTree, s: int) -> VerifyReport:
    """Tree arcs must be arcs of g, rooted at s, acyclic, and span exactly the reach of s."""
    report = VerifyReport()
    if t.root != s:
        report.add(t.root, f"root is {t.root}, expected {s}")
    if s in t.parent:
        report.add(s, "root has an incoming tree arc")
    for v, u in sorted(t.parent.items()):
        if not (0 <= u < g.n and 0 <= v < g.n) or not g.has_arc(u, v):
            report.add((u, v), "arc not in graph")

    for v in sorted(t.parent):
        seen = {v}
        w = v
        while w in t.parent:
            w = t.parent[w]
            if w in seen:
                report.add(v, "cycle through tree parents")
                break
            seen.add(w)
        else:
            if w != t.root:
                report.add(v, f"not connected to root (stops at {w})")

    reach = set(_reach(g, s)) if 0 <= s < g.n else set()
    tree_vertices = t.vertices()
    missing = reach - tree_vertices
    extra = tree_vertices - reach
    if missing:
        report.add(sorted(missing), "not spanning")
    if extra:
        report.add(sorted(extra), "vertices outside the reach of the root")
    return report
