"""
Graph Core - immutable digraphs stored as forward + reverse CSR arrays.

Provides construction, induced subgraphs, unions with shortcut arcs,
deterministic generators and the plain-text edge-list format:

    n m
    u v      (m lines, 0-based vertex ids)
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger("graph-core")

Arc = Tuple[int, int]
ArcList = Sequence[Arc]
ArcInput = Union[Iterable[Arc], np.ndarray]


class GraphError(ValueError):
    """Invalid graph construction or generator parameters."""


class EdgeListParseError(GraphError):
    """Malformed edge-list text; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class Direction(str, Enum):
    """Search direction over a digraph."""
    FORWARD = "forward"
    BACKWARD = "backward"


class GraphKind(str, Enum):
    PATH = "path"
    CYCLE = "cycle"
    LAYERED = "layered"
    RANDOM = "random"


def lg(n: int) -> int:
    """ceil(log2 n), floored at 1 so that tiny graphs still get one level."""
    return max(1, (n - 1).bit_length()) if n > 1 else 1


def ceil_cuberoot(x: int) -> int:
    """Exact integer ceil(x ** (1/3)) for x >= 0."""
    if x <= 0:
        return 0
    c = int(round(x ** (1.0 / 3.0)))
    while c ** 3 < x:
        c += 1
    while c > 0 and (c - 1) ** 3 >= x:
        c -= 1
    return c


def diameter_bound(n: int) -> int:
    """ceil(n^(2/3) * lg(n)^(4/3)), the target hop distance after shortcutting."""
    return ceil_cuberoot(n * n * lg(n) ** 4)


def _arc_array(arcs: ArcInput) -> np.ndarray:
    if isinstance(arcs, np.ndarray):
        return np.asarray(arcs, dtype=np.int64).reshape(-1, 2)
    return np.array(list(arcs), dtype=np.int64).reshape(-1, 2)


def _csr(n: int, keys: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(keys, minlength=n), out=offsets[1:])
    return offsets, values[order]


class Digraph:
    """
    Immutable digraph with forward (out-arcs) and reverse (in-arcs) CSR arrays.

    Forward targets of a vertex keep the order in which the arcs were given.
    Self-loops are never stored; parallel arcs are.
    """

    def __init__(self, n: int, fwd_offsets: np.ndarray, fwd_targets: np.ndarray,
                 rev_offsets: np.ndarray, rev_sources: np.ndarray):
        self._n = int(n)
        self.fwd_offsets = fwd_offsets
        self.fwd_targets = fwd_targets
        self.rev_offsets = rev_offsets
        self.rev_sources = rev_sources
        for arr in (fwd_offsets, fwd_targets, rev_offsets, rev_sources):
            arr.setflags(write=False)

    @classmethod
    def from_arc_array(cls, n: int, arcs: np.ndarray) -> "Digraph":
        """Build from an already validated, loop-free (m, 2) array."""
        tails = arcs[:, 0]
        heads = arcs[:, 1]
        fwd_offsets, fwd_targets = _csr(n, tails, heads)
        rev_offsets, rev_sources = _csr(n, heads, tails)
        return cls(n, fwd_offsets, fwd_targets, rev_offsets, rev_sources)

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return int(self.fwd_targets.shape[0])

    # Python-list mirrors of the CSR rows; traversal loops index these
    @cached_property
    def out_lists(self) -> List[List[int]]:
        off = self.fwd_offsets.tolist()
        tgt = self.fwd_targets.tolist()
        return [tgt[off[v]:off[v + 1]] for v in range(self._n)]

    @cached_property
    def in_lists(self) -> List[List[int]]:
        off = self.rev_offsets.tolist()
        src = self.rev_sources.tolist()
        return [src[off[v]:off[v + 1]] for v in range(self._n)]

    def adjacency(self, direction: Direction) -> List[List[int]]:
        return self.out_lists if direction == Direction.FORWARD else self.in_lists

    def out_neighbors(self, v: int) -> List[int]:
        return self.out_lists[v]

    def in_neighbors(self, v: int) -> List[int]:
        return self.in_lists[v]

    def neighbors(self, v: int, direction: Direction) -> List[int]:
        return self.adjacency(direction)[v]

    def out_degree(self, v: int) -> int:
        return int(self.fwd_offsets[v + 1] - self.fwd_offsets[v])

    def arc_array(self) -> np.ndarray:
        """All arcs as an (m, 2) array in forward-adjacency order."""
        tails = np.repeat(np.arange(self._n, dtype=np.int64), np.diff(self.fwd_offsets))
        return np.column_stack((tails, self.fwd_targets))

    def arcs(self) -> List[Arc]:
        return [(int(u), int(v)) for u, v in self.arc_array().tolist()]

    @cached_property
    def _arc_keys(self) -> frozenset:
        a = self.arc_array()
        return frozenset((a[:, 0] * max(self._n, 1) + a[:, 1]).tolist())

    def has_arc(self, u: int, v: int) -> bool:
        return u * max(self._n, 1) + v in self._arc_keys

    def __repr__(self) -> str:
        return f"Digraph(n={self._n}, m={self.m})"


@dataclass(frozen=True)
class SubgraphMap:
    """Relabeling of an induced subgraph: local id i is original vertex kept[i]."""
    kept: np.ndarray

    @cached_property
    def to_local(self) -> dict:
        return {v: i for i, v in enumerate(self.kept.tolist())}

    def to_original(self, local_ids: Iterable[int]) -> List[int]:
        kept = self.kept
        return [int(kept[i]) for i in local_ids]

    def __len__(self) -> int:
        return int(self.kept.shape[0])


def _check_range(n: int, arcs: np.ndarray) -> None:
    if arcs.size == 0:
        return
    bad = ((arcs < 0) | (arcs >= n)).any(axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        u, v = arcs[i].tolist()
        raise GraphError(f"arc #{i} ({u}, {v}) has an endpoint outside 0..{n - 1}")


def build_digraph(n: int, arcs: ArcInput) -> Digraph:
    """Build a digraph on vertices 0..n-1; self-loops are dropped, duplicates kept."""
    if n < 0:
        raise GraphError(f"vertex count must be non-negative, got {n}")
    a = _arc_array(arcs)
    _check_range(n, a)
    a = a[a[:, 0] != a[:, 1]]
    return Digraph.from_arc_array(n, a)


def induced_subgraph(g: Digraph, keep: Iterable[int]) -> Tuple[Digraph, SubgraphMap]:
    """
    G[keep], relabeled to 0..|keep|-1 in increasing original-id order.

    Cost is proportional to |keep| plus the out-degree of the kept vertices,
    not to the size of g.
    """
    kept = np.unique(np.fromiter(keep, dtype=np.int64))
    if kept.size and (kept[0] < 0 or kept[-1] >= g.n):
        raise GraphError(f"induced subgraph vertex set exceeds 0..{g.n - 1}")
    starts = g.fwd_offsets[kept]
    counts = g.fwd_offsets[kept + 1] - starts
    total = int(counts.sum())
    tails_local = np.repeat(np.arange(kept.size, dtype=np.int64), counts)
    arc_idx = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(total, dtype=np.int64)
    heads = g.fwd_targets[arc_idx]
    pos = np.searchsorted(kept, heads)
    pos_clipped = np.minimum(pos, max(kept.size - 1, 0))
    mask = (pos < kept.size) & (kept[pos_clipped] == heads) if kept.size else np.zeros(0, dtype=bool)
    local = np.column_stack((tails_local[mask], pos[mask]))
    return Digraph.from_arc_array(int(kept.size), local), SubgraphMap(kept)


def union_with_shortcuts(g: Digraph, shortcuts: ArcInput) -> Digraph:
    """G_S = (V, E u S); shortcut self-loops and copies of existing arcs are dropped."""
    s = _arc_array(shortcuts)
    _check_range(g.n, s)
    s = s[s[:, 0] != s[:, 1]]
    if s.size == 0:
        return g
    width = max(g.n, 1)
    existing = g.arc_array()
    existing_keys = existing[:, 0] * width + existing[:, 1]
    new_keys = np.unique(s[:, 0] * width + s[:, 1])
    new_keys = new_keys[~np.isin(new_keys, existing_keys)]
    added = np.column_stack((new_keys // width, new_keys % width))
    logger.debug(f"union_with_shortcuts: {len(s)} shortcuts, {len(added)} new arcs")
    return Digraph.from_arc_array(g.n, np.concatenate((existing, added)))


def generate(kind: Union[GraphKind, str], n: int, *, width: Optional[int] = None,
             m: Optional[int] = None, seed: int = 0) -> Digraph:
    """
    Deterministic instance generator.

    path: 0->1->...->n-1; cycle: path plus (n-1, 0); layered: ceil(n/width)
    layers of consecutive ids with every arc between consecutive layers;
    random: m distinct uniform non-loop arcs drawn from `seed`.
    """
    try:
        kind = GraphKind(kind)
    except ValueError:
        raise GraphError(f"unknown graph kind '{kind}'")
    if n < 0:
        raise GraphError(f"vertex count must be non-negative, got {n}")

    if kind == GraphKind.PATH:
        arcs = [(v, v + 1) for v in range(n - 1)]
    elif kind == GraphKind.CYCLE:
        arcs = [(v, v + 1) for v in range(n - 1)]
        if n > 1:
            arcs.append((n - 1, 0))
    elif kind == GraphKind.LAYERED:
        if width is None or width < 1:
            raise GraphError(f"layered graphs need width >= 1, got {width}")
        layers = [list(range(start, min(start + width, n))) for start in range(0, n, width)]
        arcs = [(u, v) for upper, lower in zip(layers, layers[1:]) for u in upper for v in lower]
    else:
        if m is None or m < 0 or m > n * (n - 1):
            raise GraphError(f"random graphs need 0 <= m <= n(n-1) = {n * (n - 1)}, got {m}")
        rng = random.Random(seed)
        arcs = []
        for code in rng.sample(range(n * (n - 1)), m):
            u, r = divmod(code, n - 1)
            arcs.append((u, r if r < u else r + 1))
    return build_digraph(n, arcs)


def parse_edge_list(text: str) -> Tuple[int, List[Arc]]:
    """(n, arcs) exactly as written, self-loops and duplicates included; blank lines are ignored."""
    rows = [(i, line.split()) for i, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not rows:
        raise EdgeListParseError(1, "missing 'n m' header")

    def _ints(line_number: int, fields: List[str]) -> Tuple[int, int]:
        if len(fields) != 2:
            raise EdgeListParseError(line_number, f"expected two integers, got {len(fields)} fields")
        try:
            return int(fields[0]), int(fields[1])
        except ValueError:
            raise EdgeListParseError(line_number, f"non-integer field in {' '.join(fields)!r}")

    header_line, header = rows[0]
    n, m = _ints(header_line, header)
    if n < 0 or m < 0:
        raise EdgeListParseError(header_line, "counts must be non-negative")
    body = rows[1:]
    if len(body) != m:
        last = body[-1][0] if body else header_line
        raise EdgeListParseError(last, f"declared m={m}, found {len(body)}")

    arcs = []
    for line_number, fields in body:
        u, v = _ints(line_number, fields)
        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListParseError(line_number, f"arc ({u}, {v}) outside 0..{n - 1}")
        arcs.append((u, v))
    return n, arcs


def read_edge_list(text: str) -> Digraph:
    n, arcs = parse_edge_list(text)
    return build_digraph(n, arcs)


def write_edge_list(g: Digraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.arc_array().tolist())
    return "\n".join(lines) + "\n"


def load_edge_list(path: str) -> Digraph:
    with open(path, "r", encoding="utf-8") as f:
        return read_edge_list(f.read())


def save_edge_list(g: Digraph, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(write_edge_list(g))
