import numpy as np
import pytest

from digraph import (
    Direction,
    EdgeListParseError,
    GraphError,
    build_digraph,
    ceil_cuberoot,
    diameter_bound,
    generate,
    induced_subgraph,
    lg,
    load_edge_list,
    parse_edge_list,
    read_edge_list,
    save_edge_list,
    union_with_shortcuts,
    write_edge_list,
)


def test_empty_graph():
    g = build_digraph(0, [])
    assert (g.n, g.m) == (0, 0)


def test_build_keeps_duplicates_and_drops_self_loops(back_arc_graph):
    assert back_arc_graph.m == 4
    assert build_digraph(2, [(0, 0), (0, 1)]).m == 1
    assert build_digraph(2, [(0, 1), (0, 1)]).m == 2


def test_out_of_range_arc_is_named():
    with pytest.raises(GraphError, match=r"arc #1 \(1, 5\)"):
        build_digraph(3, [(0, 1), (1, 5)])


def test_accessors(back_arc_graph):
    g = back_arc_graph
    assert g.out_neighbors(2) == [3]
    assert sorted(g.in_neighbors(2)) == [1, 3]
    assert g.neighbors(2, Direction.BACKWARD) == g.in_neighbors(2)
    assert g.out_degree(0) == 1
    assert g.has_arc(3, 2) and not g.has_arc(2, 1)
    assert g.arcs() == [(0, 1), (1, 2), (2, 3), (3, 2)]


def test_reverse_is_transpose(random_graphs):
    for g in random_graphs(20, max_n=40):
        forward = sorted(g.arcs())
        reverse = sorted((u, v) for v in range(g.n) for u in g.in_neighbors(v))
        assert forward == reverse
        assert np.all(np.diff(g.fwd_offsets) >= 0) and g.fwd_offsets[-1] == g.m


def test_induced_subgraph_examples(back_arc_graph):
    sub, mapping = induced_subgraph(back_arc_graph, {2, 3})
    assert sorted(sub.arcs()) == [(0, 1), (1, 0)]
    assert mapping.to_original([0, 1]) == [2, 3]

    path = generate("path", 3)
    sub, _ = induced_subgraph(path, {0, 2})
    assert (sub.n, sub.m) == (2, 0)

    sub, mapping = induced_subgraph(back_arc_graph, range(4))
    assert sub.arcs() == back_arc_graph.arcs()
    assert mapping.to_local == {0: 0, 1: 1, 2: 2, 3: 3}

    sub, _ = induced_subgraph(back_arc_graph, [])
    assert (sub.n, sub.m) == (0, 0)


def test_induced_subgraph_matches_filter(random_graphs):
    import random
    rng = random.Random(5)
    for g in random_graphs(30, max_n=64):
        keep = {v for v in range(g.n) if rng.random() < 0.5}
        sub, mapping = induced_subgraph(g, keep)
        expected = sorted((u, v) for u, v in g.arcs() if u in keep and v in keep)
        got = sorted(tuple(mapping.to_original(arc)) for arc in sub.arcs())
        assert got == expected
        assert list(mapping.kept) == sorted(keep)


def test_union_with_shortcuts():
    path = generate("path", 3)
    assert union_with_shortcuts(path, [(0, 2)]).m == 3
    assert union_with_shortcuts(path, []).arcs() == path.arcs()
    assert union_with_shortcuts(generate("path", 2), [(0, 1), (0, 0)]).m == 1
    assert union_with_shortcuts(path, [(0, 2), (0, 2)]).m == 3
    with pytest.raises(GraphError):
        union_with_shortcuts(path, [(0, 3)])


def test_generators():
    assert generate("path", 4).arcs() == [(0, 1), (1, 2), (2, 3)]
    assert sorted(generate("cycle", 3).arcs()) == [(0, 1), (1, 2), (2, 0)]
    layered = generate("layered", 5, width=2)
    assert sorted(layered.arcs()) == [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]
    a = generate("random", 8, m=12, seed=7)
    b = generate("random", 8, m=12, seed=7)
    assert a.arcs() == b.arcs()
    assert a.m == 12 and len(set(a.arcs())) == 12


@pytest.mark.parametrize("kind, kwargs", [
    ("layered", {"width": 0}),
    ("random", {"m": 57}),
    ("random", {}),
    ("spiral", {}),
])
def test_generator_rejects_bad_params(kind, kwargs):
    with pytest.raises(GraphError):
        generate(kind, 8, **kwargs)


def test_read_edge_list():
    g = read_edge_list("2 1\n0 1\n")
    assert (g.n, g.arcs()) == (2, [(0, 1)])


def test_write_is_canonical(back_arc_graph):
    shuffled = "4 4\n2 3\n0 1\n3 2\n1 2\n"
    assert write_edge_list(read_edge_list(shuffled)) == "4 4\n0 1\n1 2\n2 3\n3 2\n"
    assert write_edge_list(back_arc_graph) == "4 4\n0 1\n1 2\n2 3\n3 2\n"


def test_edge_count_mismatch_reports_line():
    with pytest.raises(EdgeListParseError, match="declared m=2, found 1") as exc:
        read_edge_list("2 2\n0 1\n")
    assert exc.value.line_number == 2


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("2 1\n0 x\n", 2),
    ("2 1\n0 1 2\n", 2),
    ("2 1\n0 2\n", 2),
])
def test_malformed_edge_lists(text, line):
    with pytest.raises(EdgeListParseError) as exc:
        read_edge_list(text)
    assert exc.value.line_number == line


def test_file_round_trip(tmp_path, back_arc_graph):
    path = tmp_path / "g.txt"
    save_edge_list(back_arc_graph, str(path))
    assert load_edge_list(str(path)).arcs() == back_arc_graph.arcs()


def test_size_helpers():
    assert [lg(n) for n in (1, 2, 3, 4, 5, 4096)] == [1, 1, 2, 2, 3, 12]
    assert [ceil_cuberoot(x) for x in (0, 1, 8, 9, 27, 28)] == [0, 1, 2, 3, 3, 4]
    assert ceil_cuberoot(4096 * 4096) == 256
    assert diameter_bound(4096) == 7034


def test_parse_edge_list_keeps_raw_arcs():
    text = "3 3\n0 1\n1 1\n0 1\n"
    assert parse_edge_list(text) == (3, [(0, 1), (1, 1), (0, 1)])
    assert read_edge_list(text).m == 2
