"""
Spanning Tree - turn a spanning tree of a shortcutted graph back into a
spanning tree of the original graph.

Every search run while shortcutting can be saved as a BfsTreeRecord. A
shortcut (x, v) from a forward search rooted at x is replaced by the record's
tree path x -> v, a shortcut (u, x) from a backward search by the path u -> x.
Paths of different shortcuts may overlap, so instead of substituting paths
we label every candidate arc and keep, for each vertex, the incoming
candidate with the smallest tail label. Labels strictly increase along the
kept arcs, which makes the result a tree.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Set, Tuple

import config
from digraph import Digraph, Direction

logger = logging.getLogger("spanning-tree")

Arc = Tuple[int, int]


class SpliceError(RuntimeError):
    """A tree arc could not be traced back to the graph of the previous level."""


@dataclass
class BfsTreeRecord:
    """
    One saved search tree, in original vertex ids.

    For a forward record parent[v] = u means the arc u -> v was used; for a
    backward record it means the arc v -> u.
    """
    root: int
    direction: Direction
    round: int
    run_id: int
    parent: Dict[int, int] = field(default_factory=dict)
    depth: Dict[int, int] = field(default_factory=dict)

    def arcs(self) -> List[Arc]:
        if self.direction == Direction.FORWARD:
            return [(u, v) for v, u in self.parent.items()]
        return [(v, u) for v, u in self.parent.items()]

    def path_to_root(self, v: int) -> List[int]:
        """Vertices from v to the root following parent links (backward records: a v -> root path)."""
        path = [v]
        limit = self.depth[v]
        while path[-1] != self.root:
            if len(path) > limit:
                raise SpliceError(f"record rooted at {self.root} has a broken parent chain at {v}")
            path.append(self.parent[path[-1]])
        return path


@dataclass
class DirectedTree:
    """Tree rooted at `root`; parent maps every other vertex to the tail of its incoming arc."""
    root: int
    parent: Dict[int, int] = field(default_factory=dict)

    def vertices(self) -> Set[int]:
        return {self.root, *self.parent}

    def arcs(self) -> List[Arc]:
        return sorted((u, v) for v, u in self.parent.items())

    def children(self) -> Dict[int, List[int]]:
        kids: Dict[int, List[int]] = {}
        for v, u in sorted(self.parent.items()):
            kids.setdefault(u, []).append(v)
        return kids

    def __len__(self) -> int:
        return len(self.parent) + 1


@dataclass
class ShortcutHistory:
    """Graph snapshots G_0..G_k and the search trees recorded while building them (round i built G_i)."""
    graphs: List[Digraph]
    records: List[BfsTreeRecord] = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.graphs) - 1

    def records_of_round(self, round_index: int) -> List[Tuple[int, BfsTreeRecord]]:
        return [(i, r) for i, r in enumerate(self.records) if r.round == round_index]


class Label(NamedTuple):
    high: int
    low: int


class LabeledArcCandidate(NamedTuple):
    head: int
    high_tail: int
    low_tail: int
    record_id: int
    tail: int

    @property
    def tail_label(self) -> Label:
        return Label(self.high_tail, self.low_tail)


def label_tree(t: DirectedTree) -> Dict[int, Label]:
    """high(v) = depth of v in t, low(v) = 0."""
    kids = t.children()
    labels = {t.root: Label(0, 0)}
    queue = deque([t.root])
    while queue:
        u = queue.popleft()
        for v in kids.get(u, ()):
            labels[v] = Label(labels[u].high + 1, 0)
            queue.append(v)
    return labels


def bfs_tree(g: Digraph, s: int) -> DirectedTree:
    """BFS tree of s over g; children are discovered in adjacency order."""
    if not 0 <= s < g.n:
        raise SpliceError(f"tree root {s} outside 0..{g.n - 1}")
    adj = g.out_lists
    parent: Dict[int, int] = {}
    seen = {s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                parent[v] = u
                queue.append(v)
    return DirectedTree(s, parent)


def _index_records(records: Iterable[Tuple[int, BfsTreeRecord]]):
    forward: Dict[int, List[Tuple[int, BfsTreeRecord]]] = {}
    backward: Dict[int, List[Tuple[int, BfsTreeRecord]]] = {}
    for rid, rec in records:
        target = forward if rec.direction == Direction.FORWARD else backward
        target.setdefault(rec.root, []).append((rid, rec))
    return forward, backward


def _check_monotone(labels: Dict[int, Label], candidates: List[LabeledArcCandidate],
                    chosen: Dict[int, LabeledArcCandidate]) -> None:
    # a vertex's final label is the smallest label over all of its copies
    final = dict(labels)
    for c in candidates:
        head_label = Label(c.high_tail, c.low_tail + 1) if c.record_id >= 0 else labels[c.head]
        if c.head not in final or head_label < final[c.head]:
            final[c.head] = head_label
    for head, c in chosen.items():
        if not final[c.tail] < final[head]:
            raise SpliceError(f"label order violated on arc ({c.tail}, {head})")


def splice_level(t_i: DirectedTree, records: List[Tuple[int, BfsTreeRecord]],
                 g_prev: Digraph) -> DirectedTree:
    """
    One splicing step: a spanning tree of G_i to one of G_{i-1}.

    `records` are the (record id, record) pairs saved while G_i was built
    from G_{i-1}. Candidates come from every forward record rooted at a tree
    vertex, from the backward-record path of every tree arc that is not in
    G_{i-1}, and from the tree arcs that already exist in G_{i-1}. They are
    sorted by (head, tail label, record id, tail) and the first one per head
    is kept.
    """
    labels = label_tree(t_i)
    forward, backward = _index_records(records)
    candidates: List[LabeledArcCandidate] = []

    for u in sorted(labels):
        high_u = labels[u].high
        for rid, rec in forward.get(u, ()):
            for v, w in rec.parent.items():
                candidates.append(LabeledArcCandidate(v, high_u, rec.depth[w], rid, w))

    for v, u in sorted(t_i.parent.items()):
        if g_prev.has_arc(u, v):
            candidates.append(LabeledArcCandidate(v, labels[u].high, 0, -1, u))
            continue
        justified = any(v in rec.depth for _, rec in forward.get(u, ()))
        traced = [(rid, rec) for rid, rec in backward.get(v, ()) if u in rec.depth]
        if traced:
            rid, rec = min(traced, key=lambda item: item[0])
            path = rec.path_to_root(u)
            for k, (w, x) in enumerate(zip(path, path[1:])):
                candidates.append(LabeledArcCandidate(x, labels[u].high, k, rid, w))
        elif not justified:
            raise SpliceError(f"tree arc ({u}, {v}) is neither in the previous graph nor covered by a record")

    candidates.sort()
    chosen: Dict[int, LabeledArcCandidate] = {}
    for c in candidates:
        if c.head == t_i.root or c.head in chosen:
            continue
        chosen[c.head] = c

    if set(chosen) | {t_i.root} != set(labels):
        raise SpliceError("splice changed the tree's vertex set")
    if config.DEBUG_CHECKS:
        _check_monotone(labels, candidates, chosen)

    return DirectedTree(t_i.root, {v: c.tail for v, c in chosen.items()})


def extract_spanning_tree(history: ShortcutHistory, s: int) -> DirectedTree:
    """BFS tree of s in G_k, spliced level by level down to G_0."""
    t = bfs_tree(history.graphs[-1], s)
    for i in range(history.levels, 0, -1):
        t = splice_level(t, history.records_of_round(i), history.graphs[i - 1])
        logger.debug(f"spliced level {i}: {len(t)} vertices")
    logger.info(f"✅ spanning tree from {s}: {len(t)} vertices over {history.levels} levels")
    return t
