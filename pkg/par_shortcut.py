"""
Parallel Shortcutting - distance-limited pivot recursion, the diameter
reduction driver built on it, and Las Vegas reachability.

par_sc permutes the vertices and processes them in groups whose sizes
grow geometrically towards the middle of the schedule and shrink again.
All pivots of a group search at once, to a random layered distance that
drops from group to group. Vertices within the core distance of a pivot
are removed; vertices in the fringe (one more layer) are copied into the
recursive subproblems so that paths crossing the core boundary survive.

Recursion is run breadth-first: every subproblem of one height forms a
batch, and budgets are checked between batches, so an over-budget run
stops cleanly at a batch boundary.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

import config
from digraph import Digraph, Direction, ceil_cuberoot, diameter_bound, induced_subgraph, lg, union_with_shortcuts
from metrics import WorkCounters
from rng import split
from search import (
    LayeredBfs,
    PivotEntry,
    SearchResult,
    TagCapacityExceeded,
    TagTable,
    bfs_layers,
    default_tag_cap,
    resolve_first_core_wins,
    tagged_multi_search,
)
from seq_shortcut import ReachabilityFailed, ReachabilityResult, ShortcutProvenance, ShortcutSet
from spanning_tree import BfsTreeRecord, ShortcutHistory

logger = logging.getLogger("par-shortcut")


class Profile(str, Enum):
    PAPER = "paper"
    DESK = "desk"


class AbortReason(str, Enum):
    WORK = "work"
    SHORTCUTS = "shortcuts"
    TAGS = "tags"


class ParScAborted(RuntimeError):
    def __init__(self, reason: AbortReason, detail: str = ""):
        super().__init__(f"par_sc aborted ({reason.value}){': ' + detail if detail else ''}")
        self.reason = reason


class RetryCapExhausted(RuntimeError):
    def __init__(self, reason: AbortReason, attempts: int):
        super().__init__(f"par_sc aborted {attempts} times in a row, last on the {reason.value} budget")
        self.reason = reason
        self.attempts = attempts


def group_sizes(count: int, eps_pi: float) -> List[int]:
    """
    Pivot group sizes for `count` vertices.

    Sizes floor((1+eps)^i) for i = 1..k-1 are used at both ends of the
    schedule; k is the smallest value whose mirrored sizes cover count, and
    the two middle groups split what is left. Empty groups are dropped.
    """
    if count <= 0:
        return []
    sizes: List[int] = []
    i = 1
    while True:
        sizes.append(math.floor((1 + eps_pi) ** i))
        if 2 * sum(sizes) >= count:
            break
        i += 1
    outer = sizes[:-1]
    rest = count - 2 * sum(outer)
    groups = outer + [(rest + 1) // 2, rest // 2] + outer[::-1]
    return [s for s in groups if s > 0]


def schedule_half_length(count: int, eps_pi: float) -> int:
    """k for `count` vertices: half the number of iterations a call may run."""
    if count <= 0:
        return 0
    total = 0
    k = 0
    while 2 * total < count:
        k += 1
        total += math.floor((1 + eps_pi) ** k)
    return k


@dataclass
class PivotSchedule:
    """Random pivot order split into groups; `groups` holds (start, length) pairs over `permutation`."""
    permutation: List[int]
    groups: List[Tuple[int, int]]
    alive: Dict[int, bool] = field(default_factory=dict)

    def group(self, i: int) -> List[int]:
        start, length = self.groups[i - 1]
        return self.permutation[start:start + length]

    def kill(self, v: int) -> None:
        self.alive[v] = False


def pivot_schedule(vertices, eps_pi: float, rng) -> PivotSchedule:
    """Shuffle `vertices` with rng and cut the order into group_sizes groups, all pivots alive."""
    if not 0 < eps_pi <= 1:
        raise ValueError(f"eps_pi must be in (0, 1], got {eps_pi}")
    perm = list(vertices)
    rng.shuffle(perm)
    groups = []
    start = 0
    for size in group_sizes(len(perm), eps_pi):
        groups.append((start, size))
        start += size
    return PivotSchedule(perm, groups, {v: True for v in perm})


class ParScParams(BaseModel):
    """Global parameters of par_sc; distances are in hops, D is the layer width."""
    n: int = Field(ge=1)
    D: int = Field(ge=1)
    N_L: int = Field(ge=2)
    N_k: int = Field(ge=1)
    eps_pi: float = Field(gt=0, le=1)
    max_shortcuts: int = Field(ge=0)
    max_work: int = Field(ge=0)
    tag_cap: int = Field(ge=1)
    h_top: int = Field(ge=0)

    @model_validator(mode="after")
    def _iterations_fit_offsets(self) -> "ParScParams":
        k = schedule_half_length(self.n, self.eps_pi)
        if 2 * k > self.N_k:
            raise ValueError(f"N_k={self.N_k} is below 2k={2 * k} for n={self.n}, eps_pi={self.eps_pi}")
        return self

    @property
    def max_search_dist(self) -> int:
        return self.h_top * self.N_k * self.N_L * self.D


def make_params(n: int, profile: Profile = Profile.DESK, m: int = 0, **overrides) -> ParScParams:
    """
    Parameters for an n-vertex, m-arc graph.

    paper: D = n^(2/3) lg^(4/3), N_L = lg^7, eps = 1/lg^3 (for inspection;
    far too large to run). desk: D = n^(2/3), N_L = lg + 2, eps = 1/2.
    N_k is always 2k unless overridden.
    """
    if n < 1:
        raise ValueError(f"make_params needs n >= 1, got {n}")
    profile = Profile(profile)
    L = lg(n)
    if profile == Profile.PAPER:
        values = dict(D=diameter_bound(n), N_L=L ** 7, eps_pi=1 / L ** 3)
    else:
        values = dict(D=ceil_cuberoot(n * n), N_L=L + 2, eps_pi=0.5)
    values.update(
        n=n,
        max_shortcuts=config.BUDGET_FACTOR * n * L * L,
        max_work=config.BUDGET_FACTOR * (n + m) * L * L,
        tag_cap=default_tag_cap(n),
        h_top=L,
    )
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "N_k" not in values:
        values["N_k"] = 2 * schedule_half_length(n, values["eps_pi"])
    return ParScParams(**values)


def draw_distance(rng, p: ParScParams, h: int, i: int) -> int:
    """Core distance of iteration i at height h, in units of D."""
    if h < 1 or not 1 <= i <= p.N_k:
        raise ValueError(f"draw_distance needs h >= 1 and 1 <= i <= N_k={p.N_k}, got h={h}, i={i}")
    return rng.randint(1, p.N_L - 1) + h * p.N_k * p.N_L - i * p.N_L


def distance_window(p: ParScParams, h: int, i: int) -> Tuple[int, int]:
    """(smallest core distance, largest fringe distance) iteration i can use, in units of D."""
    top = h * p.N_k * p.N_L
    return top - i * p.N_L + 1, top - (i - 1) * p.N_L


@dataclass
class Budget:
    max_shortcuts: int
    max_work: int
    shortcuts_used: int = 0
    work_used: int = 0

    def check(self) -> None:
        if self.work_used > self.max_work:
            raise ParScAborted(AbortReason.WORK, f"{self.work_used} > {self.max_work}")
        if self.shortcuts_used > self.max_shortcuts:
            raise ParScAborted(AbortReason.SHORTCUTS, f"{self.shortcuts_used} > {self.max_shortcuts}")


Subproblem = Tuple[Digraph, List[int]]


class _ParScRun:
    """State of one par_sc call: output, budget and the next batch of subproblems."""

    def __init__(self, p: ParScParams, rng, budget: Budget, record_trees: bool,
                 round_index: int, run_id: int, schedule):
        self.p = p
        self.rng = rng
        self.budget = budget
        self.record_trees = record_trees
        self.round_index = round_index
        self.run_id = run_id
        self.schedule = schedule
        self.counters = WorkCounters()
        self.out = ShortcutSet()

    def _record(self, ids: List[int], res: SearchResult) -> Optional[int]:
        if not self.record_trees:
            return None
        return self.out.record(BfsTreeRecord(
            ids[res.root], res.direction, self.round_index, self.run_id,
            {ids[v]: ids[u] for v, u in res.parent.items()},
            {ids[v]: d for v, d in res.depth.items()},
        ))

    def _emit(self, ids: List[int], fwd: SearchResult, bwd: SearchResult) -> None:
        x = ids[fwd.root]
        ref = self._record(ids, fwd)
        for v in sorted(fwd.reached()):
            if ids[v] != x:
                self.out.add(x, ids[v], ShortcutProvenance(self.run_id, x, Direction.FORWARD, ref))
        ref = self._record(ids, bwd)
        for u in sorted(bwd.reached()):
            if ids[u] != x:
                self.out.add(ids[u], x, ShortcutProvenance(self.run_id, x, Direction.BACKWARD, ref))

    def solve(self, sub: Digraph, ids: List[int], h: int) -> List[Subproblem]:
        """All iterations of one subproblem; returns its children at height h - 1."""
        p = self.p
        plan = pivot_schedule(range(sub.n), p.eps_pi, self.rng)
        alive = plan.alive
        tags = TagTable(p.tag_cap)
        children: List[Subproblem] = []

        def _blocked(v: int) -> bool:
            return not alive[v]

        for i, (start, _) in enumerate(plan.groups, start=1):
            pivots = [PivotEntry(start + j, x, alive[x]) for j, x in enumerate(plan.group(i))]
            d = draw_distance(self.rng, p, h, i)
            core_dist, fringe_dist = d * p.D, (d + 1) * p.D
            assert fringe_dist <= p.max_search_dist, "search distance above h_top * N_k * N_L * D"
            if not any(pv.alive for pv in pivots):
                continue

            tags.reset()
            try:
                fwd = tagged_multi_search(sub, pivots, core_dist, fringe_dist, Direction.FORWARD,
                                          tags, _blocked, self.schedule, self.counters)
                bwd = tagged_multi_search(sub, pivots, core_dist, fringe_dist, Direction.BACKWARD,
                                          tags, _blocked, self.schedule, self.counters)
            except TagCapacityExceeded as e:
                raise ParScAborted(AbortReason.TAGS, str(e))

            # shortcuts come from the raw sets; resolution only shapes the recursion
            for pid in fwd.raw:
                self._emit(ids, fwd.raw[pid], bwd.raw[pid])
            fwd_resolved = resolve_first_core_wins(fwd.raw, tags)
            bwd_resolved = bwd.resolved

            dying = set()
            for pid in fwd.raw:
                r_plus, r_minus = fwd_resolved[pid].core, bwd_resolved[pid].core
                both = r_plus & r_minus
                if h > 1:
                    for part in ((r_plus - both) | fwd_resolved[pid].fringe,
                                 (r_minus - both) | bwd_resolved[pid].fringe):
                        if part:
                            child, mapping = induced_subgraph(sub, part)
                            children.append((child, [ids[v] for v in mapping.kept.tolist()]))
                dying |= fwd.raw[pid].core | bwd.raw[pid].core

            if config.DEBUG_CHECKS:
                claimed = [fwd_resolved[pid].core | bwd_resolved[pid].core for pid in fwd.raw]
                assert sum(map(len, claimed)) == len(set().union(*claimed)) == len(dying), \
                    "resolved cores do not partition the covered vertices"
            for v in dying:
                plan.kill(v)

        return children

    def run(self, g: Digraph, h: int) -> ShortcutSet:
        batch: List[Subproblem] = [(g, list(range(g.n)))] if g.n else []
        while batch and h > 0:
            # a zero budget cannot pay for any search
            if self.budget.max_work == 0 or self.budget.work_used > self.budget.max_work:
                raise ParScAborted(AbortReason.WORK,
                                   f"{self.budget.work_used} used of {self.budget.max_work} before height {h}")
            next_batch: List[Subproblem] = []
            for sub, ids in batch:
                next_batch.extend(self.solve(sub, ids, h))
            self.budget.work_used = self.counters.work
            self.budget.shortcuts_used = len(self.out)
            self.budget.check()
            batch = next_batch
            h -= 1
        return self.out


def par_sc(g: Digraph, h: int, p: ParScParams, rng, budget: Optional[Budget] = None,
           record_trees: bool = False, round_index: int = 1, run_id: int = 0,
           counters: Optional[WorkCounters] = None, schedule=None) -> ShortcutSet:
    """
    Distance-limited shortcutting of g from height h.

    Raises ParScAborted when the work, shortcut or tag budget is exceeded;
    partial shortcuts are discarded with the exception.
    """
    if not 0 <= h <= p.h_top:
        raise ValueError(f"height must be within 0..h_top={p.h_top}, got {h}")
    budget = budget or Budget(p.max_shortcuts, p.max_work)
    state = _ParScRun(p, rng, budget, record_trees, round_index, run_id, schedule)
    try:
        out = state.run(g, h)
    except ParScAborted:
        state.counters.aborts += 1
        raise
    finally:
        if counters is not None:
            counters.merge(state.counters)

    if state.counters.fringe_visits > state.counters.core_visits:
        logger.warning(f"⚠️ fringe visits {state.counters.fringe_visits} exceed core visits "
                       f"{state.counters.core_visits} (n={g.n})")
    if counters is not None:
        counters.shortcuts += len(out)
    return out


@dataclass
class ParDiamResult:
    graphs: List[Digraph]
    shortcuts: ShortcutSet
    retries: int = 0
    aborts: Dict[str, int] = field(default_factory=dict)
    counters: WorkCounters = field(default_factory=WorkCounters)

    @property
    def final_graph(self) -> Digraph:
        return self.graphs[-1]

    def history(self) -> ShortcutHistory:
        return ShortcutHistory(list(self.graphs), list(self.shortcuts.records))


def par_diam(g: Digraph, p: ParScParams, rng, outer_rounds: Optional[int] = None,
             inner_runs: Optional[int] = None, record_trees: bool = False,
             retry_cap: Optional[int] = None, counters: Optional[WorkCounters] = None,
             schedule=None, until: Optional[Callable[[Digraph], bool]] = None) -> ParDiamResult:
    """
    Repeated par_sc over a growing graph.

    Each outer round runs inner_runs independent par_sc calls on the current
    graph and adds their shortcuts to it. An aborted call is discarded and
    redrawn, at most retry_cap times. The work budget of a call scales with
    the size of the graph it searches. When `until` is given, it is asked
    after every round and a True answer ends the reduction early.
    """
    outer_rounds = lg(g.n) if outer_rounds is None else outer_rounds
    inner_runs = lg(g.n) if inner_runs is None else inner_runs
    retry_cap = config.RETRY_CAP if retry_cap is None else retry_cap
    if outer_rounds < 1 or inner_runs < 1:
        raise ValueError(f"need outer_rounds, inner_runs >= 1, got {outer_rounds}, {inner_runs}")

    result = ParDiamResult([g], ShortcutSet())
    aborts: Counter = Counter()
    base_size = max(g.n + g.m, 1)
    current = g
    for r in range(1, outer_rounds + 1):
        round_set = ShortcutSet()
        max_work = p.max_work * (current.n + current.m) // base_size
        for run in range(inner_runs):
            run_id = (r - 1) * inner_runs + run
            for attempt in range(retry_cap + 1):
                budget = Budget(p.max_shortcuts, max_work)
                try:
                    s = par_sc(current, p.h_top, p, split(rng), budget, record_trees, r, run_id,
                               result.counters, schedule)
                    break
                except ParScAborted as e:
                    aborts[e.reason.value] += 1
                    last = e.reason
                    if attempt < retry_cap:
                        result.retries += 1
                        logger.warning(f"⚠️ round {r} run {run} aborted on {e.reason.value}, redrawing")
            else:
                result.aborts = dict(aborts)
                if counters is not None:
                    counters.merge(result.counters)
                logger.error(f"❌ round {r} run {run}: retry cap {retry_cap} exhausted")
                raise RetryCapExhausted(last, retry_cap + 1)
            round_set.extend(s)
        current = union_with_shortcuts(current, round_set.arc_array())
        result.graphs.append(current)
        result.shortcuts.extend(round_set)
        logger.info(f"✅ round {r}/{outer_rounds}: {len(round_set)} shortcuts, m={current.m}")
        if until is not None and until(current):
            logger.info(f"✅ stopping after round {r}/{outer_rounds}")
            break

    result.aborts = dict(aborts)
    result.counters.retries += result.retries
    if counters is not None:
        counters.merge(result.counters)
    return result


def reachability(g: Digraph, s: int, p: Optional[ParScParams], rng, hop_cap: Optional[int] = None,
                 outer_rounds: Optional[int] = None, inner_runs: Optional[int] = None,
                 max_attempts: Optional[int] = None,
                 counters: Optional[WorkCounters] = None) -> ReachabilityResult:
    """
    Forward reach of s: par_diam rounds, each followed by a BFS limited to
    hop_cap hops on the graph built so far.

    The answer is returned as soon as one BFS runs out of vertices below the
    cap, so it is always exact. If no round of an attempt gets there, the
    whole attempt is repeated with fresh randomness.
    """
    if not 0 <= s < g.n:
        raise ValueError(f"source {s} outside 0..{g.n - 1}")
    p = p or make_params(g.n, Profile.DESK, m=g.m)
    hop_cap = config.DIAMETER_FACTOR * diameter_bound(g.n) if hop_cap is None else hop_cap
    max_attempts = config.REACH_MAX_ATTEMPTS if max_attempts is None else max_attempts
    retries = 0
    for attempt in range(max_attempts):
        found: List[LayeredBfs] = []

        def _exhausted(current: Digraph) -> bool:
            layered = bfs_layers(current, s, hop_cap, counters)
            if layered.exhausted:
                found.append(layered)
            return layered.exhausted

        try:
            par_diam(g, p, rng, outer_rounds, inner_runs, counters=counters, until=_exhausted)
        except RetryCapExhausted as e:
            logger.warning(f"⚠️ diameter reduction failed ({e}), retrying")
            retries += 1
            continue
        if found:
            layered = found[0]
            if counters is not None:
                counters.retries += retries
            return ReachabilityResult(sorted(layered.reached), retries, hop_cap)
        logger.warning(f"⚠️ BFS from {s} hit the {hop_cap}-hop cap, retrying (attempt {attempt + 1})")
        retries += 1
    raise ReachabilityFailed(f"reachability from {s} did not exhaust within {max_attempts} attempts")
