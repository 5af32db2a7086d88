import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from walkcast.graph import (
    GraphError,
    NetworkFormatError,
    RoadGraph,
    VertexKind,
    build_complete,
    build_cycle,
    build_path,
    build_torus_grid,
    discretize,
    format_network,
    load_network,
    parse_network,
    save_network,
)

Y, O = VertexKind.YELLOW, VertexKind.ORANGE


def test_complete_k2():
    g = build_complete(2)
    assert g.m == 1
    assert list(g.degree) == [1, 1]


def test_complete_k4():
    g = build_complete(4)
    assert g.m == 6
    assert set(g.degree) == {3}
    assert np.all(g.edge_len == 1)


def test_complete_k100_by_enumeration():
    g = build_complete(100)
    pairs = {(min(u, v), max(u, v)) for u, v, _ in g.edges()}
    assert pairs == set(itertools.combinations(range(100), 2))
    assert g.m == 4950


def test_complete_rejects_small():
    with pytest.raises(ValueError):
        build_complete(1)


@pytest.mark.parametrize("w,h", [(2, 2), (2, 5), (5, 2)])
def test_torus_with_side_two_rejected(w, h):
    # side 2 wraps onto the same neighbour twice -> multi-edge
    with pytest.raises(ValueError, match=">= 3"):
        build_torus_grid(w, h)


@pytest.mark.parametrize("w,h", [(3, 3), (30, 30), (4, 7)])
def test_torus_counts(w, h):
    g = build_torus_grid(w, h)
    assert g.n == w * h
    assert g.m == 2 * w * h
    assert set(g.degree) == {4}


def test_adjacency_is_symmetric():
    g = build_torus_grid(4, 5)
    for v in range(g.n):
        for u, ln, eid in g.adjacency(v):
            assert (v, ln, eid) in g.adjacency(u)


def test_rev_slots_point_back():
    g = build_torus_grid(3, 4)
    src = np.repeat(np.arange(g.n), g.degree)
    assert np.array_equal(src[g.rev], g.nbr)
    assert np.array_equal(g.nbr[g.rev], src)


def test_yellow_degree_checked():
    with pytest.raises(GraphError, match="yellow vertex 0 has degree 3"):
        RoadGraph.from_edges(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)], kinds=[Y, O, O, O])


def test_path_with_yellow_middle_accepted():
    g = build_path([O, Y, O])
    assert g.kinds[1] == Y


def test_dead_end_must_be_orange():
    with pytest.raises(GraphError, match="degree 1"):
        build_path([Y, O, O])


@pytest.mark.parametrize(
    "edges,msg",
    [
        ([(0, 1, 1), (1, 2, 1), (0, 1, 2)], "multi-edge"),
        ([(0, 1, 1), (1, 1, 1), (1, 2, 1)], "self-loop"),
        ([(0, 1, 0.0), (1, 2, 1)], "strictly positive"),
        ([(0, 1, float("inf")), (1, 2, 1)], "strictly positive"),
        ([(0, 1, 1)], "disconnected"),
    ],
)
def test_invalid_graphs(edges, msg):
    with pytest.raises(GraphError, match=msg):
        RoadGraph.from_edges(3, edges)


def test_disconnected_components():
    with pytest.raises(GraphError, match="2 components"):
        RoadGraph.from_edges(4, [(0, 1, 1), (2, 3, 1)])


TRIANGLE = """# a triangle
nodes 3
0 orange
1 orange
2 orange
edges 3
0 1 10
1 2 12.5
2 0 7
"""


def test_load_triangle(tmp_path):
    p = tmp_path / "tri.net"
    p.write_text(TRIANGLE)
    g = load_network(p)
    assert (g.n, g.m) == (3, 3)
    assert g.total_length == pytest.approx(29.5)


def test_load_yellow_degree_three_fails():
    text = "nodes 4\n0 yellow\n1 orange\n2 orange\n3 orange\nedges 3\n0 1 1\n0 2 1\n0 3 1\n"
    with pytest.raises(GraphError, match="yellow"):
        parse_network(text)


def test_load_path_with_yellow():
    g = parse_network("nodes 3\n0 orange 0 0\n1 yellow 5 0\n2 orange 10 0\nedges 2\n0 1 5\n1 2 5\n")
    assert g.kinds.tolist() == [0, 1, 0]
    assert g.coords[1].tolist() == [5.0, 0.0]


@pytest.mark.parametrize(
    "text,line",
    [
        ("nodes x\n", 1),
        ("nodes 2\n0 orange\n2 orange\nedges 1\n0 1 1\n", 3),
        ("nodes 2\n0 orange\n1 purple\nedges 1\n0 1 1\n", 3),
        ("nodes 2\n0 orange\n1 orange\nedges 1\n0 1\n", 5),
        ("nodes 2\n0 orange\n1 orange\nedges 1\n0 5 1\n", 5),
        ("nodes 2\n# c\n0 orange 1 1\n1 orange\nedges 1\n0 1 1\n", 4),
        ("nodes 2\n0 orange\n1 orange\nedges 1\n0 1 1\nextra\n", 6),
    ],
)
def test_parse_errors_report_line(text, line):
    with pytest.raises(NetworkFormatError) as exc:
        parse_network(text)
    assert exc.value.line == line


def test_parse_truncated():
    with pytest.raises(NetworkFormatError, match="unexpected end"):
        parse_network("nodes 3\n0 orange\n")


def test_roundtrip(tmp_path):
    g = parse_network("nodes 3\n0 orange 0 0\n1 yellow 5.5 0\n2 orange 11 0.25\nedges 2\n0 1 5.5\n1 2 5.5\n")
    save_network(g, tmp_path / "g.net")
    h = load_network(tmp_path / "g.net")
    assert format_network(h) == format_network(g)


# --- discretization ---------------------------------------------------------------

def test_single_edge_three_parts():
    g = build_path(2, lengths=[120.0])
    h, rep = discretize(g, 50)
    assert (h.n, h.m) == (4, 3)
    assert np.allclose(h.edge_len, 40.0)
    assert h.kinds.tolist() == [O, O, Y, Y]
    assert rep.added_per_edge == [(0, 3)]


def test_boundary_edge_untouched():
    g = build_path(2, lengths=[50.0])
    h, rep = discretize(g, 50)
    assert (h.n, h.m) == (2, 1)
    assert rep.added_per_edge == []


def test_two_edges_hand_count():
    g = build_path(3, lengths=[60.0, 30.0])
    h, rep = discretize(g, 25)
    assert sorted(h.edge_len.tolist()) == pytest.approx([15, 15, 20, 20, 20])
    assert rep.vertices_after - rep.vertices_before == 3
    assert rep.edges_after - rep.edges_before == 3
    assert int((h.kinds == Y).sum()) == 3


def test_discretize_interpolates_coords():
    g = parse_network("nodes 2\n0 orange 0 0\n1 orange 90 0\nedges 1\n0 1 90\n")
    h, _ = discretize(g, 30)
    assert h.coords[:, 0].tolist() == [0, 90, 30, 60]


def test_discretize_rejects_bad_d():
    with pytest.raises(ValueError):
        discretize(build_cycle(3), 0)


def test_table2_differences_are_constant():
    # vertex/edge counts of the three discretizations of the same map
    table = {25: (4251, 4596), 50: (2451, 2796), 75: (1881, 2226)}
    assert {m - n for n, m in table.values()} == {345}


@st.composite
def weighted_graphs(draw):
    n = draw(st.integers(2, 12))
    # random spanning tree keeps it connected
    edges = {}
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges[(u, v)] = None
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=10))
    for u, v in extra:
        if u != v:
            edges[(min(u, v), max(u, v))] = None
    lengths = draw(st.lists(st.floats(0.5, 400, allow_nan=False), min_size=len(edges),
                            max_size=len(edges)))
    return RoadGraph.from_edges(n, [(u, v, ln) for (u, v), ln in zip(edges, lengths)])


@settings(max_examples=150, deadline=None)
@given(weighted_graphs(), st.floats(0.3, 150))
def test_discretize_properties(g, d):
    h, rep = discretize(g, d)
    assert h.edge_len.max() <= d
    assert math.isclose(h.total_length, g.total_length, rel_tol=1e-9)
    assert h.m - h.n == g.m - g.n
    assert rep.vertices_after - rep.vertices_before == rep.edges_after - rep.edges_before
    added = h.kinds[g.n:]
    assert np.all(added == Y) and np.all(h.degree[g.n:] == 2)
    assert np.array_equal(h.kinds[: g.n], g.kinds)
    again, rep2 = discretize(h, d)
    assert rep2.added_per_edge == []
    assert format_network(again) == format_network(h)


@pytest.mark.parametrize("d", [0.1, 0.3, 0.7, 1 / 3])
def test_parts_are_minimal_despite_rounding(d):
    g = build_path(2, lengths=[0.3 * 7])
    h, rep = discretize(g, d)
    (_, j), = rep.added_per_edge
    assert (0.3 * 7) / j <= d
    assert (0.3 * 7) / (j - 1) > d


def test_parse_inline_comments():
    text = """# header
nodes 3
0 orange 0 0   # id kind x y
1 orange 0 100
2 yellow 80 50
edges 3
0 1 120  # u v length
1 2 50
2 0 75
"""
    g = parse_network(text)
    assert (g.n, g.m) == (3, 3) and g.kinds[2] == VertexKind.YELLOW
