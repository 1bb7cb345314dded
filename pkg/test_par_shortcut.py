import random

import pytest

from digraph import build_digraph, diameter_bound, generate
from metrics import WorkCounters
from oracle import reach_set, transitive_closure, verify_shortcuts
from par_shortcut import (
    AbortReason,
    Budget,
    ParScAborted,
    ParScParams,
    Profile,
    ReachabilityFailed,
    RetryCapExhausted,
    distance_window,
    draw_distance,
    group_sizes,
    make_params,
    par_diam,
    par_sc,
    pivot_schedule,
    reachability,
    schedule_half_length,
)
from rng import make_rng
from search import PermutedSchedule


class FixedDraw:
    """Stands in for random.Random where a test needs a known distance draw."""

    def randint(self, a, b):
        return a


def small_params(**kw):
    values = dict(n=4, D=1, N_L=4, N_k=6, eps_pi=1.0, max_shortcuts=100, max_work=10 ** 6, tag_cap=8, h_top=2)
    values.update(kw)
    return ParScParams(**values)


def test_desk_profile():
    p = make_params(1)
    assert (p.D, p.N_L, p.N_k, p.h_top) == (1, 3, 2, 1)
    assert make_params(4096).D == 256


def test_paper_profile_is_computable():
    p = make_params(4096, Profile.PAPER)
    assert p.N_L == 12 ** 7 == 35831808
    assert p.D == diameter_bound(4096)
    assert p.eps_pi == pytest.approx(1 / 1728)
    assert p.N_k == 2 * schedule_half_length(4096, p.eps_pi)


def test_profile_accepts_its_name():
    assert make_params(4096, "paper") == make_params(4096, Profile.PAPER)
    assert make_params(4096, "desk").D == 256


def test_budget_defaults_scale_with_graph_size():
    p = make_params(64, m=200)
    assert p.max_shortcuts == 32 * 64 * 36
    assert p.max_work == 32 * (64 + 200) * 36
    assert p.tag_cap == 8 * 7


@pytest.mark.parametrize("overrides", [{"N_L": 1}, {"N_k": 1}, {"max_work": -1}, {"eps_pi": 0}, {"eps_pi": 1.5}])
def test_invalid_overrides_are_rejected(overrides):
    with pytest.raises(ValueError):
        make_params(16, **overrides)


def test_overrides_win():
    p = make_params(16, max_work=0, tag_cap=3, D=2)
    assert (p.max_work, p.tag_cap, p.D) == (0, 3, 2)


def test_group_sizes_examples():
    assert group_sizes(12, 1.0) == [2, 4, 4, 2]
    assert group_sizes(3, 1.0) == [2, 1]
    assert group_sizes(0, 1.0) == []
    assert schedule_half_length(12, 1.0) == 2


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.25, 0.1])
def test_group_sizes_cover_the_permutation(eps):
    for count in range(1, 300):
        sizes = group_sizes(count, eps)
        assert sum(sizes) == count
        assert len(sizes) <= 2 * schedule_half_length(count, eps)
        k = schedule_half_length(count, eps)
        assert all(s <= int((1 + eps) ** k) for s in sizes)


def test_pivot_schedule():
    plan = pivot_schedule(range(12), 1.0, random.Random(3))
    assert sorted(plan.permutation) == list(range(12))
    assert [length for _, length in plan.groups] == [2, 4, 4, 2]
    assert sum((plan.group(i) for i in range(1, 5)), []) == plan.permutation
    assert all(plan.alive.values())
    plan.kill(plan.permutation[0])
    assert not plan.alive[plan.permutation[0]]

    empty = pivot_schedule([], 0.5, random.Random(0))
    assert empty.permutation == [] and empty.groups == []
    with pytest.raises(ValueError):
        pivot_schedule(range(3), 0, random.Random(0))


def test_draw_distance_example():
    assert draw_distance(FixedDraw(), small_params(), h=2, i=3) == 37


def test_last_iteration_has_no_offset():
    p = small_params()
    rng = random.Random(0)
    draws = {draw_distance(rng, p, 1, p.N_k) for _ in range(200)}
    assert draws <= set(range(1, p.N_L)) and len(draws) > 1


def test_draw_distance_rejects_out_of_schedule_iterations():
    p = small_params()
    with pytest.raises(ValueError):
        draw_distance(random.Random(0), p, 1, p.N_k + 1)
    with pytest.raises(ValueError):
        draw_distance(random.Random(0), p, 0, 1)


def test_distance_windows_descend_without_overlap():
    p = small_params()
    rng = random.Random(1)
    windows = [distance_window(p, 2, i) for i in range(1, p.N_k + 1)]
    for (lo, hi), (next_lo, next_hi) in zip(windows, windows[1:]):
        assert next_hi < lo
    for i, (lo, hi) in enumerate(windows, start=1):
        d = draw_distance(rng, p, 2, i)
        assert lo <= d and d + 1 <= hi <= 2 * p.N_k * p.N_L


def test_arcless_graph_gets_no_shortcuts():
    g = build_digraph(10, [])
    p = make_params(10)
    assert len(par_sc(g, p.h_top, p, make_rng(0))) == 0


def test_three_cycle_is_finished_by_its_first_pivot():
    g = generate("cycle", 3)
    p = make_params(3, m=3)
    for seed in range(5):
        s = par_sc(g, p.h_top, p, make_rng(seed))
        x = s.provenance[0].pivot
        a, b = sorted({0, 1, 2} - {x})
        assert sorted(s.arcs) == sorted([(x, a), (x, b), (a, x), (b, x)])


def test_height_zero_returns_nothing():
    g = generate("cycle", 5)
    p = make_params(5, m=5)
    assert len(par_sc(g, 0, p, make_rng(0))) == 0
    with pytest.raises(ValueError):
        par_sc(g, p.h_top + 1, p, make_rng(0))


def test_zero_work_budget_aborts_and_leaves_state_usable():
    g = generate("random", 40, m=120, seed=3)
    p = make_params(g.n, m=g.m, max_work=0)
    counters = WorkCounters()
    with pytest.raises(ParScAborted) as exc:
        par_sc(g, p.h_top, p, make_rng(0), counters=counters)
    assert exc.value.reason == AbortReason.WORK
    assert counters.aborts == 1 and counters.arcs_visited == 0

    ok = make_params(g.n, m=g.m)
    s = par_sc(g, ok.h_top, ok, make_rng(0))
    assert verify_shortcuts(g, s).ok


def test_exactly_spent_work_budget_is_not_exceeded():
    g = generate("cycle", 6)
    p = make_params(g.n, m=g.m)
    s = par_sc(g, p.h_top, p, make_rng(0), budget=Budget(p.max_shortcuts, 10 ** 6, work_used=10 ** 6))
    assert verify_shortcuts(g, s).ok
    with pytest.raises(ParScAborted) as exc:
        par_sc(g, p.h_top, p, make_rng(0), budget=Budget(p.max_shortcuts, 10 ** 6, work_used=10 ** 6 + 1))
    assert exc.value.reason == AbortReason.WORK


def test_shortcut_budget_aborts():
    p = make_params(3, m=3, max_shortcuts=0)
    with pytest.raises(ParScAborted) as exc:
        par_sc(generate("cycle", 3), p.h_top, p, make_rng(0))
    assert exc.value.reason == AbortReason.SHORTCUTS


def test_tag_overflow_aborts():
    p = ParScParams(n=3, D=3, N_L=3, N_k=2, eps_pi=1.0, max_shortcuts=1000, max_work=10 ** 6,
                    tag_cap=1, h_top=2)
    with pytest.raises(ParScAborted) as exc:
        par_sc(generate("cycle", 3), 2, p, make_rng(0), budget=Budget(1000, 10 ** 6))
    assert exc.value.reason == AbortReason.TAGS


def test_par_sc_preserves_closure_and_search_limit(random_graphs):
    fixtures = [generate("path", 24), generate("cycle", 10), generate("layered", 20, width=4)]
    for i, g in enumerate(random_graphs(500, max_n=64, seed=12) + fixtures):
        p = make_params(g.n, m=g.m)
        counters = WorkCounters()
        s = par_sc(g, p.h_top, p, make_rng(i), counters=counters)
        assert verify_shortcuts(g, s).ok
        assert counters.max_search_dist <= p.max_search_dist
        assert counters.shortcuts == len(s)


def test_par_sc_is_schedule_independent():
    for seed in range(50):
        g = generate("random", 256, m=1024, seed=seed)
        p = make_params(g.n, m=g.m)
        a = par_sc(g, p.h_top, p, make_rng(seed), record_trees=True)
        b = par_sc(g, p.h_top, p, make_rng(seed), record_trees=True, schedule=PermutedSchedule(seed))
        assert a.arcs == b.arcs
        assert a.provenance == b.provenance
        assert [(r.root, r.direction, r.parent) for r in a.records] == \
               [(r.root, r.direction, r.parent) for r in b.records]


def test_par_diam_on_arcless_graph():
    g = build_digraph(6, [])
    result = par_diam(g, make_params(6), make_rng(0), outer_rounds=1, inner_runs=1)
    assert len(result.graphs) == 2
    assert result.graphs[1].arcs() == result.graphs[0].arcs()


def test_par_diam_keeps_every_snapshot_closed(random_graphs):
    for i, g in enumerate(random_graphs(500, max_n=64, seed=30)):
        p = make_params(g.n, m=g.m)
        result = par_diam(g, p, make_rng(i), outer_rounds=2, inner_runs=2)
        closure = transitive_closure(g)
        assert len(result.graphs) == 3
        assert all(transitive_closure(h) == closure for h in result.graphs)
        assert len(result.shortcuts) <= p.max_shortcuts * 2 * 2
        assert verify_shortcuts(g, result.shortcuts).ok


def test_par_diam_stops_when_asked():
    g = generate("path", 32)
    p = make_params(g.n, m=g.m)
    seen = []
    result = par_diam(g, p, make_rng(0), outer_rounds=4, inner_runs=1, until=lambda h: seen.append(h.m) or True)
    assert len(result.graphs) == 2
    assert seen == [result.final_graph.m]


def test_par_diam_gives_up_after_retry_cap():
    g = generate("path", 8)
    p = make_params(g.n, m=g.m, max_work=0)
    with pytest.raises(RetryCapExhausted) as exc:
        par_diam(g, p, make_rng(0), outer_rounds=1, inner_runs=1, retry_cap=2)
    assert exc.value.reason == AbortReason.WORK
    assert exc.value.attempts == 3


def test_reachability_examples(back_arc_graph):
    assert reachability(back_arc_graph, 0, None, make_rng(0)).reached == [0, 1, 2, 3]
    isolated = build_digraph(3, [(1, 2)])
    result = reachability(isolated, 0, None, make_rng(0))
    assert result.reached == [0] and result.retries == 0
    with pytest.raises(ValueError):
        reachability(isolated, 3, None, make_rng(0))


def test_reachability_matches_bfs(random_graphs):
    rng = random.Random(4)
    for i, g in enumerate(random_graphs(100, max_n=512, seed=40, max_density=6)):
        s = rng.randrange(g.n)
        result = reachability(g, s, None, make_rng(i), inner_runs=3)
        assert result.reached == reach_set(g, s)


def test_reachability_gives_up_after_max_attempts():
    g = generate("path", 6)
    p = make_params(g.n, m=g.m, max_work=0)
    with pytest.raises(ReachabilityFailed):
        reachability(g, 0, p, make_rng(0), hop_cap=1, outer_rounds=1, inner_runs=1, max_attempts=2)


def test_reachability_on_long_path():
    n = 10 ** 4
    g = generate("path", n)
    result = reachability(g, 0, None, make_rng(0))
    assert result.reached == list(range(n))
    assert result.retries == 0


def test_tag_lists_stay_within_capacity():
    within = 0
    runs = 0
    for graph_seed in range(10):
        g = generate("random", 2048, m=4 * 2048, seed=graph_seed)
        p = make_params(g.n, m=g.m)
        for seed in range(10):
            counters = WorkCounters()
            runs += 1
            try:
                par_sc(g, p.h_top, p, make_rng(100 * graph_seed + seed), counters=counters)
            except ParScAborted as e:
                assert e.reason in (AbortReason.TAGS, AbortReason.WORK, AbortReason.SHORTCUTS)
                continue
            within += counters.max_tag_len <= p.tag_cap
    assert p.tag_cap == 8 * 12
    assert within >= 0.95 * runs
