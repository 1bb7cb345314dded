"""
Search - distance-limited BFS over a Digraph.

Covers:
- single-source hop-limited searches, optionally split into a core
  (<= core_dist hops) and a fringe (core_dist < hops <= fringe_dist)
- the tagged multi-source search that runs a whole group of pivots as one
  level-synchronous BFS, with first-core-wins resolution
- hop-limited BFS with an exhaustion flag, used by the reachability driver
"""

import logging
import random
from bisect import bisect_left, insort
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import accumulate
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Set

import config
from digraph import Digraph, Direction
from metrics import WorkCounters

logger = logging.getLogger("search")

Blocked = Optional[Callable[[int], bool]]


class SearchError(ValueError):
    """Invalid search request (dead pivot, bad distances, unordered pivots)."""


class TagCapacityExceeded(RuntimeError):
    """A vertex was claimed by more pivots than its tag list can hold."""

    def __init__(self, vertex: int, capacity: int):
        super().__init__(f"vertex {vertex} exceeded tag capacity {capacity}")
        self.vertex = vertex
        self.capacity = capacity


class Relation(str, Enum):
    NEVER = "never"
    PARTLY = "partly"
    FULLY = "fully"


@dataclass
class SearchResult:
    """
    Outcome of one search from `root`.

    parent maps every non-root reached vertex to its predecessor on the BFS
    tree (in search direction); depth holds hop counts from the root.
    """
    root: int
    direction: Direction
    core: Set[int]
    fringe: Set[int] = field(default_factory=set)
    parent: Dict[int, int] = field(default_factory=dict)
    depth: Dict[int, int] = field(default_factory=dict)

    def reached(self) -> Set[int]:
        return self.core | self.fringe


class FrontierEntry(NamedTuple):
    vertex: int
    pivot: int
    parent: int = -1


class PivotEntry(NamedTuple):
    id: int
    vertex: int
    alive: bool = True


@dataclass
class MultiSearchOutcome:
    raw: Dict[int, SearchResult]
    resolved: Dict[int, SearchResult]


@dataclass
class LayeredBfs:
    distance: Dict[int, int]
    parent: Dict[int, int]
    exhausted: bool

    @property
    def reached(self) -> Set[int]:
        return set(self.distance)


def default_tag_cap(n: int) -> int:
    """TAG_CAP_FACTOR * ceil(log2(n + 2))."""
    return config.TAG_CAP_FACTOR * (n + 1).bit_length()


class TagTable:
    """Per-vertex sorted lists of the pivot ids whose core reached the vertex."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._tags: Dict[int, List[int]] = {}

    def add(self, vertex: int, pivot_id: int) -> None:
        tags = self._tags.setdefault(vertex, [])
        i = bisect_left(tags, pivot_id)
        if i < len(tags) and tags[i] == pivot_id:
            return
        if len(tags) >= self.capacity:
            raise TagCapacityExceeded(vertex, self.capacity)
        insort(tags, pivot_id)

    def tags(self, vertex: int) -> tuple:
        return tuple(self._tags.get(vertex, ()))

    def min_tag(self, vertex: int) -> Optional[int]:
        tags = self._tags.get(vertex)
        return tags[0] if tags else None

    def max_len(self) -> int:
        return max((len(t) for t in self._tags.values()), default=0)

    def snapshot(self) -> Dict[int, tuple]:
        return {v: tuple(t) for v, t in sorted(self._tags.items())}

    def reset(self) -> None:
        self._tags.clear()

    def __len__(self) -> int:
        return len(self._tags)


class SequentialSchedule:
    """Reference superstep schedule: tasks run in index order."""

    def order(self, count: int) -> Iterable[int]:
        return range(count)


class PermutedSchedule:
    """Runs the tasks of every superstep in a random order."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def order(self, count: int) -> Iterable[int]:
        idx = list(range(count))
        self._rng.shuffle(idx)
        return idx


SEQUENTIAL = SequentialSchedule()


def _bfs(g: Digraph, x: int, core_dist: Optional[int], fringe_dist: Optional[int],
         direction: Direction, blocked: Blocked, counters: Optional[WorkCounters]) -> SearchResult:
    adj = g.adjacency(direction)
    depth = {x: 0}
    parent: Dict[int, int] = {}
    frontier = [x]
    level = 0
    arcs = 0
    while frontier and (fringe_dist is None or level < fringe_dist):
        level += 1
        nxt = []
        for u in frontier:
            nbrs = adj[u]
            arcs += len(nbrs)
            for v in nbrs:
                if v in depth or (blocked is not None and blocked(v)):
                    continue
                depth[v] = level
                parent[v] = u
                nxt.append(v)
        frontier = nxt

    if core_dist is None or core_dist >= (fringe_dist if fringe_dist is not None else level):
        core = set(depth)
        fringe: Set[int] = set()
    else:
        core = {v for v, d in depth.items() if d <= core_dist}
        fringe = {v for v, d in depth.items() if d > core_dist}

    if counters is not None:
        counters.arcs_visited += arcs
        counters.vertices_visited += len(depth)
        counters.core_visits += len(core)
        counters.fringe_visits += len(fringe)
        counters.observe_search(fringe_dist if fringe_dist is not None else max(depth.values()))
    return SearchResult(x, direction, core, fringe, parent, depth)


def _check_root(g: Digraph, x: int, blocked: Blocked) -> None:
    if not 0 <= x < g.n:
        raise SearchError(f"search root {x} outside 0..{g.n - 1}")
    if blocked is not None and blocked(x):
        raise SearchError(f"search root {x} is dead")


def limited_search(g: Digraph, x: int, dist: Optional[int], direction: Direction = Direction.FORWARD,
                   blocked: Blocked = None, counters: Optional[WorkCounters] = None) -> SearchResult:
    """
    Vertices reachable from x (forward) or reaching x (backward) within `dist`
    hops through non-blocked vertices. dist=None searches without a limit.
    """
    if dist is not None and dist < 0:
        raise SearchError(f"search distance must be >= 0, got {dist}")
    _check_root(g, x, blocked)
    return _bfs(g, x, dist, dist, direction, blocked, counters)


def core_fringe_search(g: Digraph, x: int, core_dist: int, fringe_dist: int,
                       direction: Direction = Direction.FORWARD, blocked: Blocked = None,
                       counters: Optional[WorkCounters] = None) -> SearchResult:
    """One traversal to fringe_dist; vertices beyond core_dist form the fringe."""
    if core_dist < 0 or fringe_dist <= core_dist:
        raise SearchError(f"need 0 <= core_dist < fringe_dist, got {core_dist}, {fringe_dist}")
    _check_root(g, x, blocked)
    return _bfs(g, x, core_dist, fringe_dist, direction, blocked, counters)


def dedup_frontier(entries: Iterable[FrontierEntry]) -> List[FrontierEntry]:
    """Sort by (vertex, pivot) and keep one entry per pair, the one with the smallest parent."""
    out: List[FrontierEntry] = []
    last = None
    for e in sorted(entries):
        key = (e.vertex, e.pivot)
        if key != last:
            out.append(e)
            last = key
    return out


def resolve_first_core_wins(raw: Dict[int, SearchResult], tags: TagTable) -> Dict[int, SearchResult]:
    """Drop from pivot j's core and fringe every vertex already claimed by a core of a pivot < j."""
    resolved = {}
    for pid, res in raw.items():
        def _keep(v: int) -> bool:
            t = tags.min_tag(v)
            return t is None or t >= pid
        resolved[pid] = replace(res, core={v for v in res.core if _keep(v)},
                                fringe={v for v in res.fringe if _keep(v)})
    return resolved


def tagged_multi_search(g: Digraph, pivots: Sequence[PivotEntry], core_dist: int, fringe_dist: int,
                        direction: Direction, tags: TagTable, blocked: Blocked = None,
                        schedule=None, counters: Optional[WorkCounters] = None) -> MultiSearchOutcome:
    """
    Core/fringe searches from every live pivot, run as one BFS over a shared
    frontier of (vertex, pivot) entries.

    Each level is a superstep: every frontier entry owns a preassigned slot
    range (prefix sums over degrees) in the next frontier, reads only state
    from earlier levels, and writes only its own slots. The barrier then
    sorts and deduplicates the slots and commits depths. The result is the
    same for every task order the schedule picks.

    Tags of pivot j are added to every vertex of its raw core; raw results
    are returned alongside the first-core-wins resolution against `tags`.
    Raises TagCapacityExceeded when a tag list overflows.
    """
    if core_dist < 0 or fringe_dist <= core_dist:
        raise SearchError(f"need 0 <= core_dist < fringe_dist, got {core_dist}, {fringe_dist}")
    ids = [p.id for p in pivots]
    if any(a >= b for a, b in zip(ids, ids[1:])):
        raise SearchError("pivot ids must be strictly increasing")
    live = [p for p in pivots if p.alive]
    for p in live:
        _check_root(g, p.vertex, blocked)
    schedule = schedule or SEQUENTIAL

    adj = g.adjacency(direction)
    depth: Dict[int, Dict[int, int]] = {p.id: {p.vertex: 0} for p in live}
    parent: Dict[int, Dict[int, int]] = {p.id: {} for p in live}
    frontier = dedup_frontier(FrontierEntry(p.vertex, p.id) for p in live)
    level = 0
    arcs = 0
    while frontier and level < fringe_dist:
        level += 1
        offsets = [0, *accumulate(len(adj[e.vertex]) for e in frontier)]
        slots: List[Optional[FrontierEntry]] = [None] * offsets[-1]
        for t in schedule.order(len(frontier)):
            e = frontier[t]
            seen = depth[e.pivot]
            base = offsets[t]
            for k, v in enumerate(adj[e.vertex]):
                if v in seen or (blocked is not None and blocked(v)):
                    continue
                slots[base + k] = FrontierEntry(v, e.pivot, e.vertex)
        arcs += offsets[-1]
        frontier = dedup_frontier(s for s in slots if s is not None)
        # barrier
        for e in frontier:
            depth[e.pivot][e.vertex] = level
            parent[e.pivot][e.vertex] = e.parent

    raw: Dict[int, SearchResult] = {}
    for p in live:
        d = depth[p.id]
        core = {v for v, h in d.items() if h <= core_dist}
        fringe = {v for v, h in d.items() if h > core_dist}
        raw[p.id] = SearchResult(p.vertex, direction, core, fringe, parent[p.id], d)

    for p in live:
        for v in sorted(raw[p.id].core):
            tags.add(v, p.id)

    if counters is not None:
        counters.arcs_visited += arcs
        for res in raw.values():
            counters.vertices_visited += len(res.depth)
            counters.core_visits += len(res.core)
            counters.fringe_visits += len(res.fringe)
            counters.observe_search(fringe_dist)
        counters.max_tag_len = max(counters.max_tag_len, tags.max_len())

    return MultiSearchOutcome(raw, resolve_first_core_wins(raw, tags))


def bfs_layers(g: Digraph, s: int, max_hops: int,
               counters: Optional[WorkCounters] = None) -> LayeredBfs:
    """
    Exact hop distances from s up to max_hops.

    exhausted is True iff the reached set is the whole forward reach of s,
    i.e. no vertex of the last layer has an unvisited out-neighbor.
    """
    if not 0 <= s < g.n:
        raise SearchError(f"BFS source {s} outside 0..{g.n - 1}")
    adj = g.out_lists
    distance = {s: 0}
    parent: Dict[int, int] = {}
    frontier = [s]
    level = 0
    arcs = 0
    while frontier and level < max_hops:
        level += 1
        nxt = []
        for u in frontier:
            arcs += len(adj[u])
            for v in adj[u]:
                if v not in distance:
                    distance[v] = level
                    parent[v] = u
                    nxt.append(v)
        frontier = nxt

    exhausted = True
    for u in frontier:
        arcs += len(adj[u])
        if any(v not in distance for v in adj[u]):
            exhausted = False
            break

    if counters is not None:
        counters.arcs_visited += arcs
        counters.vertices_visited += len(distance)
        counters.observe_search(max_hops)
    return LayeredBfs(distance, parent, exhausted)


def classify_relation(g: Digraph, u: int, v: int, d_min: int, d_max: int) -> Relation:
    """
    Relation of u and v for an iteration whose searches run between d_min
    and d_max hops: fully related within d_min, partly within d_max.
    """
    if d_min > d_max:
        raise SearchError(f"need d_min <= d_max, got {d_min}, {d_max}")
    from_u = limited_search(g, u, d_max, Direction.FORWARD).depth
    from_v = limited_search(g, v, d_max, Direction.FORWARD).depth
    best = min(from_u.get(v, d_max + 1), from_v.get(u, d_max + 1))
    if best <= d_min:
        return Relation.FULLY
    if best <= d_max:
        return Relation.PARTLY
    return Relation.NEVER
