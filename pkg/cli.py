"""
Command-line front end.

    python cli.py generate path --n 4 -o g.txt
    python cli.py shortcut g.txt --algo seq --runs 24 -o s.txt
    python cli.py reach g.txt --source 0 --algo par
    python cli.py tree g.txt --source 0 -o t.txt
    python cli.py verify g.txt --shortcuts s.txt
    python cli.py bench --sizes 1024 2048 --kinds path --algos seq --csv out.csv

Exit codes: 0 success, 1 usage / I-O / parse / parameter error,
2 algorithmic abort (retry cap, reachability attempts, tree verification),
3 `verify` found violations.
"""

import argparse
import csv
import json
import logging
import os
import sys
import time
import traceback
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

import config
from digraph import (
    Digraph,
    GraphError,
    build_digraph,
    diameter_bound,
    generate,
    load_edge_list,
    parse_edge_list,
    save_edge_list,
    write_edge_list,
)
from metrics import WorkCounters, scaling_slope, timer
from oracle import estimate_diameter, hop_distance, verify_shortcuts, verify_tree
from par_shortcut import ParScAborted, Profile, RetryCapExhausted, make_params, par_diam, reachability
from rng import derive_seed, make_rng
from seq_shortcut import ReachabilityFailed, ShortcutSet, seq_diameter_reduce, seq_history, seq_reachability
from spanning_tree import DirectedTree, SpliceError, extract_spanning_tree

logger = logging.getLogger("shortcut-cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ABORT = 2
EXIT_VIOLATIONS = 3

CSV_FIELDS = ["algo", "kind", "n", "m", "seed", "shortcuts", "arcsVisited", "maxSearchDist",
              "measuredDiameter", "elapsedMillis", "retries", "error"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class BenchRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    algo: str
    kind: str
    n: int = Field(ge=0)
    m: int = Field(ge=0)
    seed: int
    shortcuts: Optional[int] = Field(default=None, ge=0)
    arcs_visited: Optional[int] = Field(default=None, ge=0, alias="arcsVisited")
    max_search_dist: Optional[int] = Field(default=None, ge=0, alias="maxSearchDist")
    measured_diameter: Optional[int] = Field(default=None, ge=0, alias="measuredDiameter")
    elapsed_millis: Optional[float] = Field(default=None, ge=0, alias="elapsedMillis")
    retries: Optional[int] = Field(default=None, ge=0)
    error: str = ""

    def row(self) -> dict:
        data = self.model_dump(by_alias=True)
        return {k: ("" if data[k] is None else data[k]) for k in CSV_FIELDS}


def _par_params(g: Digraph, args):
    return make_params(g.n, Profile(args.profile), m=g.m, max_shortcuts=args.max_shortcuts,
                       max_work=args.max_work, tag_cap=args.tag_cap)


def _shortcut(g: Digraph, args, counters: WorkCounters, record_trees: bool = False):
    """Run the selected driver; returns (shortcut set, final graph, history or None)."""
    if g.n == 0:
        return ShortcutSet(), g, None
    if args.algo == "seq":
        s = seq_diameter_reduce(g, args.runs, args.seed, workers=args.workers,
                                record_trees=record_trees, counters=counters)
        history = seq_history(g, s)
        return s, history.graphs[-1], history
    result = par_diam(g, _par_params(g, args), make_rng(args.seed), args.rounds, args.runs,
                      record_trees=record_trees, counters=counters)
    return result.shortcuts, result.final_graph, result.history()


def cmd_generate(args) -> int:
    g = generate(args.kind, args.n, width=args.width, m=args.m, seed=args.seed)
    if args.out:
        save_edge_list(g, args.out)
    else:
        sys.stdout.write(write_edge_list(g))
    print(f"{g.n} {g.m}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_shortcut(args) -> int:
    g = load_edge_list(args.input)
    counters = WorkCounters()
    elapsed = timer()
    s, _, _ = _shortcut(g, args, counters)
    out = args.out or os.path.join(config.output_dir, "shortcuts.txt")
    save_edge_list(build_digraph(g.n, s.arc_array()), out)
    print(f"shortcuts={len(s)} arcsVisited={counters.arcs_visited} maxSearchDist={counters.max_search_dist}")
    if args.metrics:
        with open(args.metrics, "w", encoding="utf-8") as f:
            json.dump({**counters.as_dict(), "elapsedMillis": elapsed()}, f, indent=2)
    logger.info(f"✅ wrote {len(s)} shortcuts to {out} ({elapsed():.1f} ms)")
    return EXIT_OK


def cmd_reach(args) -> int:
    g = load_edge_list(args.input)
    if not 0 <= args.source < g.n:
        raise UsageError(f"source {args.source} outside 0..{g.n - 1}")
    if args.algo == "seq":
        result = seq_reachability(g, args.source, args.runs, args.seed)
    else:
        result = reachability(g, args.source, _par_params(g, args), make_rng(args.seed),
                              outer_rounds=args.rounds, inner_runs=args.runs)
    sys.stdout.write("".join(f"{v}\n" for v in result.reached))
    print(f"retries: {result.retries}", file=sys.stderr)
    return EXIT_OK


def cmd_tree(args) -> int:
    g = load_edge_list(args.input)
    if not 0 <= args.source < g.n:
        raise UsageError(f"source {args.source} outside 0..{g.n - 1}")
    _, _, history = _shortcut(g, args, WorkCounters(), record_trees=True)
    t = extract_spanning_tree(history, args.source)
    report = verify_tree(g, t, args.source)
    if not report.ok:
        for item, reason in report.violations:
            print(f"violation: {item}: {reason}", file=sys.stderr)
        logger.error(f"❌ extracted tree failed verification ({len(report.violations)} violations)")
        return EXIT_ABORT
    out = args.out or os.path.join(config.output_dir, "tree.txt")
    save_edge_list(build_digraph(g.n, t.arcs()), out)
    print(f"{len(t)} vertices, {len(t.parent)} arcs")
    return EXIT_OK


def _tree_from_file(path: str, source: int, report_items: list) -> DirectedTree:
    with open(path, "r", encoding="utf-8") as f:
        _, arcs = parse_edge_list(f.read())
    parent = {}
    for u, v in arcs:
        if u == v:
            report_items.append(((u, v), "self-loop in tree"))
            continue
        if v in parent:
            report_items.append(((u, v), "second incoming tree arc"))
        parent[v] = u
    return DirectedTree(source, parent)


def cmd_verify(args) -> int:
    g = load_edge_list(args.input)
    if args.shortcuts:
        report = verify_shortcuts(g, load_edge_list(args.shortcuts).arc_array())
    elif args.tree:
        if args.source is None:
            raise UsageError("--tree needs --source")
        extra: list = []
        t = _tree_from_file(args.tree, args.source, extra)
        report = verify_tree(g, t, args.source)
        report.violations[:0] = extra
    else:
        raise UsageError("verify needs --shortcuts or --tree")
    for item, reason in report.violations:
        print(f"violation: {item}: {reason}")
    if report.ok:
        print("ok")
        return EXIT_OK
    return EXIT_VIOLATIONS


def _measure(g: Digraph, final: Digraph, kind: str, seed: int) -> Optional[int]:
    if final.n == 0:
        return None
    if kind in ("path", "layered"):
        return hop_distance(final, 0, final.n - 1)
    return estimate_diameter(final, samples=4, rng=make_rng(derive_seed(seed, "diameter")))


def bench_cell(algo: str, kind: str, n: int, seed: int, args) -> BenchRecord:
    cell = argparse.Namespace(**{**vars(args), "algo": algo, "seed": seed})
    counters = WorkCounters()
    g = None
    try:
        m = min(args.density * n, n * (n - 1)) if kind == "random" else None
        g = generate(kind, n, width=args.width if kind == "layered" else None, m=m, seed=seed)
        elapsed = timer()
        s, final, _ = _shortcut(g, cell, counters)
        millis = elapsed()
        return BenchRecord(algo=algo, kind=kind, n=g.n, m=g.m, seed=seed, shortcuts=len(s),
                           arcs_visited=counters.arcs_visited, max_search_dist=counters.max_search_dist,
                           measured_diameter=_measure(g, final, kind, seed),
                           elapsed_millis=round(millis, 3), retries=counters.retries)
    except (RetryCapExhausted, ParScAborted, ValueError) as e:
        logger.error(f"❌ bench cell {algo}/{kind}/n={n}/seed={seed} failed: {e}")
        logger.debug(traceback.format_exc())
        return BenchRecord(algo=algo, kind=kind, n=max(n, 0), m=g.m if g is not None else 0,
                           seed=seed, error=str(e))


class ScalingSummary(BaseModel):
    algo: str
    kind: str
    slope: float
    over_cap: List[int] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.slope <= config.DIAMETER_SLOPE_MAX and not self.over_cap


def diameter_scaling(rows: List[BenchRecord]) -> List[ScalingSummary]:
    """Log-log slope of measured diameter against n per (algo, kind), plus the sizes over the hop cap."""
    groups: dict = {}
    for r in rows:
        if not r.error and r.measured_diameter:
            groups.setdefault((r.algo, r.kind), []).append(r)
    summaries = []
    for (algo, kind), group in sorted(groups.items()):
        sizes = [r.n for r in group]
        if len(set(sizes)) < 2:
            continue
        over = sorted({r.n for r in group if r.measured_diameter > config.DIAMETER_FACTOR * diameter_bound(r.n)})
        summaries.append(ScalingSummary(algo=algo, kind=kind, over_cap=over,
                                        slope=scaling_slope(sizes, [r.measured_diameter for r in group])))
    return summaries


def cmd_bench(args) -> int:
    out = args.csv or os.path.join(config.output_dir, "bench.csv")
    rows: List[BenchRecord] = []
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for algo in args.algos:
            for kind in args.kinds:
                for n in args.sizes:
                    for seed in args.seeds:
                        record = bench_cell(algo, kind, n, seed, args)
                        writer.writerow(record.row())
                        f.flush()
                        rows.append(record)
                        logger.info(f"⏱️ {algo}/{kind}/n={n}/seed={seed}: "
                                    f"{record.elapsed_millis} ms {record.error or 'ok'}")
    for summary in diameter_scaling(rows):
        print(f"slope {summary.algo}/{summary.kind}: {summary.slope:.3f}")
        if summary.ok:
            logger.info(f"✅ {summary.algo}/{summary.kind} diameter slope {summary.slope:.3f}")
        else:
            logger.warning(f"⚠️ {summary.algo}/{summary.kind} diameter slope {summary.slope:.3f} "
                           f"(limit {config.DIAMETER_SLOPE_MAX}), over the hop cap at n={summary.over_cap}")
    failed = sum(1 for r in rows if r.error)
    logger.info(f"✅ bench wrote {len(rows)} rows to {out} ({failed} failed)")
    return EXIT_ABORT if rows and failed == len(rows) else EXIT_OK


def _add_algo_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=["seq", "par"], default="seq")
    p.add_argument("--profile", choices=[pr.value for pr in Profile], default=Profile.DESK.value)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=None, help="seq runs, or par inner runs per round")
    p.add_argument("--rounds", type=int, default=None, help="par outer rounds")
    p.add_argument("--max-shortcuts", type=int, default=None)
    p.add_argument("--max-work", type=int, default=None)
    p.add_argument("--tag-cap", type=int, default=None)
    p.add_argument("--workers", type=int, default=1, help="threads for independent seq runs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shortcut", description="Diameter reduction of digraphs by shortcutting")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a generated graph as an edge list")
    p.add_argument("kind", choices=["path", "cycle", "layered", "random"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("shortcut", help="compute shortcuts for a graph")
    p.add_argument("input")
    _add_algo_flags(p)
    p.add_argument("-o", "--out", default=None)
    p.add_argument("--metrics", default=None, help="write counters as JSON")
    p.set_defaults(func=cmd_shortcut)

    p = sub.add_parser("reach", help="vertices reachable from a source")
    p.add_argument("input")
    p.add_argument("--source", type=int, required=True)
    _add_algo_flags(p)
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("tree", help="spanning tree of the reach of a source, in original arcs")
    p.add_argument("input")
    p.add_argument("--source", type=int, required=True)
    _add_algo_flags(p)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("verify", help="check shortcuts or a tree against the oracle")
    p.add_argument("input")
    p.add_argument("--shortcuts", default=None)
    p.add_argument("--tree", default=None)
    p.add_argument("--source", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="scaling experiments to CSV")
    p.add_argument("--sizes", type=int, nargs="*", default=[])
    p.add_argument("--kinds", nargs="+", default=["path"], choices=["path", "cycle", "layered", "random"])
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--algos", nargs="+", default=["seq"], choices=["seq", "par"])
    p.add_argument("--density", type=int, default=4, help="arcs per vertex for random graphs")
    p.add_argument("--width", type=int, default=4, help="layer width for layered graphs")
    p.add_argument("--csv", default=None)
    _add_algo_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=config.LOG_LEVEL)
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.func(args)
    except (RetryCapExhausted, ReachabilityFailed, ParScAborted, SpliceError) as e:
        logger.error(f"❌ {args.command} aborted: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ABORT
    except (UsageError, GraphError, OSError, ValueError) as e:
        logger.error(f"❌ {args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    logger.debug(f"⏱️ {args.command} finished in {time.perf_counter() - start:.2f}s")
    return code


if __name__ == "__main__":
    sys.exit(main())
