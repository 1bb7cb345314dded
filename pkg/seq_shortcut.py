"""
Sequential Shortcutting - the randomized pivot recursion and its multi-run driver.

A pivot x splits the current vertex set by one forward and one backward
search: vertices in both are done (V_B), vertices only reached forward
(V_S) or only backward (V_P) recurse on their own, and the rest (V_R)
continue with the next pivot. Every reached vertex gets a shortcut to or
from x.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

import config
from digraph import Digraph, Direction, diameter_bound, induced_subgraph, lg, union_with_shortcuts
from metrics import WorkCounters
from rng import derive_seed, make_rng
from search import bfs_layers, limited_search
from spanning_tree import BfsTreeRecord, ShortcutHistory

logger = logging.getLogger("seq-shortcut")

Arc = Tuple[int, int]


class ReachabilityFailed(RuntimeError):
    """The Las Vegas reachability loop ran out of attempts."""


@dataclass
class ShortcutProvenance:
    run_id: int
    pivot: int
    direction: Direction
    tree_ref: Optional[int] = None


@dataclass
class ShortcutSet:
    """Raw shortcut arcs (duplicates kept) with the search that produced each one."""
    arcs: List[Arc] = field(default_factory=list)
    provenance: List[ShortcutProvenance] = field(default_factory=list)
    records: List[BfsTreeRecord] = field(default_factory=list)

    def add(self, tail: int, head: int, provenance: ShortcutProvenance) -> None:
        self.arcs.append((tail, head))
        self.provenance.append(provenance)

    def record(self, rec: BfsTreeRecord) -> int:
        self.records.append(rec)
        return len(self.records) - 1

    def extend(self, other: "ShortcutSet") -> None:
        """Append another set, shifting its tree references past our records."""
        offset = len(self.records)
        self.arcs.extend(other.arcs)
        for p in other.provenance:
            ref = None if p.tree_ref is None else p.tree_ref + offset
            self.provenance.append(ShortcutProvenance(p.run_id, p.pivot, p.direction, ref))
        self.records.extend(other.records)

    def arc_array(self) -> np.ndarray:
        return np.asarray(self.arcs, dtype=np.int64).reshape(-1, 2)

    def distinct_arcs(self) -> List[Arc]:
        return sorted(set(self.arcs))

    def __len__(self) -> int:
        return len(self.arcs)


@dataclass
class ReachabilityResult:
    reached: List[int]
    retries: int
    hop_cap: int


class RunConfig(BaseModel):
    seed: int = 0
    max_depth: Optional[int] = Field(default=None, ge=0)
    record_trees: bool = False
    run_id: int = 0


def _emit(out: ShortcutSet, x: int, succ: Sequence[int], pred: Sequence[int], run_id: int,
          refs: Tuple[Optional[int], Optional[int]]) -> None:
    for v in succ:
        if v != x:
            out.add(x, v, ShortcutProvenance(run_id, x, Direction.FORWARD, refs[0]))
    for u in pred:
        if u != x:
            out.add(u, x, ShortcutProvenance(run_id, x, Direction.BACKWARD, refs[1]))


def seq_sc1(g: Digraph, rng, counters: Optional[WorkCounters] = None, run_id: int = 0) -> ShortcutSet:
    """
    Plain recursion: uniform pivot, unbounded searches, recurse on
    G[V_S], G[V_P] and G[V_R]. Subgraphs are materialized at every step.
    """
    out = ShortcutSet()
    stack: List[Tuple[Digraph, List[int]]] = [(g, list(range(g.n)))]
    while stack:
        sub, ids = stack.pop()
        if sub.n == 0:
            continue
        x = rng.randrange(sub.n)
        succ = limited_search(sub, x, None, Direction.FORWARD, counters=counters).core
        pred = limited_search(sub, x, None, Direction.BACKWARD, counters=counters).core
        _emit(out, ids[x], [ids[v] for v in sorted(succ)], [ids[u] for u in sorted(pred)],
              run_id, (None, None))

        both = succ & pred
        rest = set(range(sub.n)) - succ - pred
        for part in (succ - both, pred - both, rest):
            if part:
                child, mapping = induced_subgraph(sub, part)
                stack.append((child, [ids[v] for v in mapping.kept.tolist()]))

    if counters is not None:
        counters.shortcuts += len(out)
    return out


def seq_sc2(g: Digraph, cfg: RunConfig, counters: Optional[WorkCounters] = None,
            permutation: Optional[Sequence[int]] = None) -> ShortcutSet:
    """
    Flattened recursion with a depth cutoff.

    Vertices are permuted once up front; a subproblem takes its pivots in
    permutation order and skips vertices already removed. Subproblems are
    regions of one label array over g, and a search only enters vertices
    of its own region, so no subgraph is ever built.
    """
    n = g.n
    max_depth = lg(n) if cfg.max_depth is None else cfg.max_depth
    if permutation is None:
        perm = list(range(n))
        make_rng(cfg.seed).shuffle(perm)
    else:
        perm = list(permutation)
        if sorted(perm) != list(range(n)):
            raise ValueError("permutation must list every vertex exactly once")
    position = {v: i for i, v in enumerate(perm)}

    out = ShortcutSet()
    region = [0] * n
    next_region = 1
    stack: List[Tuple[int, int, List[int]]] = [(0, 0, perm)] if n else []

    while stack:
        rid, depth, verts = stack.pop()
        if depth >= max_depth:
            continue

        def _blocked(v: int, rid: int = rid) -> bool:
            return region[v] != rid

        for x in verts:
            if region[x] != rid:
                continue
            fwd = limited_search(g, x, None, Direction.FORWARD, _blocked, counters)
            bwd = limited_search(g, x, None, Direction.BACKWARD, _blocked, counters)
            succ, pred = fwd.core, bwd.core
            if config.DEBUG_CHECKS:
                assert all(region[v] == rid for v in succ | pred), "search left its subproblem"

            refs: Tuple[Optional[int], Optional[int]] = (None, None)
            if cfg.record_trees:
                refs = (out.record(BfsTreeRecord(x, Direction.FORWARD, 1, cfg.run_id, fwd.parent, fwd.depth)),
                        out.record(BfsTreeRecord(x, Direction.BACKWARD, 1, cfg.run_id, bwd.parent, bwd.depth)))
            _emit(out, x, sorted(succ), sorted(pred), cfg.run_id, refs)

            both = succ & pred
            for v in both:
                region[v] = -1
            for part in (succ - both, pred - both):
                if not part:
                    continue
                for v in part:
                    region[v] = next_region
                stack.append((next_region, depth + 1, sorted(part, key=position.__getitem__)))
                next_region += 1

    if counters is not None:
        counters.shortcuts += len(out)
    logger.debug(f"seq_sc2 run {cfg.run_id}: {len(out)} shortcuts, {next_region} subproblems")
    return out


def seq_diameter_reduce(g: Digraph, runs: Optional[int] = None, seed: int = 0, workers: int = 1,
                        record_trees: bool = False,
                        counters: Optional[WorkCounters] = None) -> ShortcutSet:
    """
    Union of `runs` independent seq_sc2 runs on g (default SEQ_RUNS_FACTOR * lg n).

    Run r uses seed derive_seed(seed, r); results are merged in run order,
    whether or not the runs were spread over worker threads.
    """
    runs = config.SEQ_RUNS_FACTOR * lg(g.n) if runs is None else runs
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    configs = [RunConfig(seed=derive_seed(seed, r), record_trees=record_trees, run_id=r) for r in range(runs)]
    run_counters = [WorkCounters() for _ in configs]

    def _one(r: int) -> ShortcutSet:
        return seq_sc2(g, configs[r], run_counters[r])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, range(runs)))
    else:
        results = [_one(r) for r in range(runs)]

    out = ShortcutSet()
    for res, rc in zip(results, run_counters):
        out.extend(res)
        if counters is not None:
            counters.merge(rc)
    logger.info(f"✅ {runs} sequential runs on n={g.n}, m={g.m}: {len(out)} shortcuts")
    return out


def seq_history(g: Digraph, shortcuts: ShortcutSet) -> ShortcutHistory:
    """All sequential runs search g itself, so their shortcuts splice in one level."""
    return ShortcutHistory([g, union_with_shortcuts(g, shortcuts.arc_array())], list(shortcuts.records))


def seq_reachability(g: Digraph, s: int, runs: Optional[int] = None, seed: int = 0,
                     hop_cap: Optional[int] = None, max_attempts: Optional[int] = None,
                     counters: Optional[WorkCounters] = None) -> ReachabilityResult:
    """Shortcut with seq_diameter_reduce, then hop-limited BFS; retry until the BFS exhausts."""
    if not 0 <= s < g.n:
        raise ValueError(f"source {s} outside 0..{g.n - 1}")
    hop_cap = config.DIAMETER_FACTOR * diameter_bound(g.n) if hop_cap is None else hop_cap
    max_attempts = config.REACH_MAX_ATTEMPTS if max_attempts is None else max_attempts
    for attempt in range(max_attempts):
        shortcuts = seq_diameter_reduce(g, runs, derive_seed(seed, f"attempt-{attempt}"), counters=counters)
        layered = bfs_layers(union_with_shortcuts(g, shortcuts.arc_array()), s, hop_cap, counters)
        if layered.exhausted:
            return ReachabilityResult(sorted(layered.reached), attempt, hop_cap)
        logger.warning(f"⚠️ BFS from {s} hit the {hop_cap}-hop cap, retrying (attempt {attempt + 1})")
        if counters is not None:
            counters.retries += 1
    raise ReachabilityFailed(f"reachability from {s} did not exhaust within {max_attempts} attempts")
