import math
import random

import pytest
from hypothesis import given, strategies as st

from navmix.errors import (
    DegenerateDirection,
    DisconnectedGraph,
    InvariantViolation,
    NotABridge,
    UnknownEdge,
)
from navmix.nav_graph import (
    Vertex,
    heading,
    heading_delta,
    is_bridge,
    make_scene,
    norm_edge,
    sector_index,
    side_component,
)

from conftest import count_components_without_edge, random_connected_scene

TWO_PI = 2.0 * math.pi

finite_coord = st.floats(min_value=-100.0, max_value=100.0, allow_nan=False)


def chain(*ids, scene_id="c"):
    vertices = [Vertex(id=v, position=(float(i), 0.0, 0.0)) for i, v in enumerate(ids)]
    edges = list(zip(ids, ids[1:]))
    return make_scene(scene_id, vertices, edges)


# heading ---------------------------------------------------------------


def test_heading_cardinal_directions():
    assert heading((0, 0, 0), (0, 1, 0)) == 0.0
    assert heading((0, 0, 0), (1, 0, 0)) == pytest.approx(math.pi / 2, abs=1e-15)
    assert heading((0, 0, 0), (0, -1, 0)) == pytest.approx(math.pi, abs=1e-15)
    assert heading((0, 0, 0), (-1, 0, 0)) == pytest.approx(3 * math.pi / 2, abs=1e-15)


def test_heading_150_degrees():
    h = heading((0, 0, 0), (1, -math.sqrt(3), 0))
    assert h == pytest.approx(5 * math.pi / 6, abs=1e-12)


def test_heading_ignores_z():
    assert heading((0, 0, 5.0), (0, 1, -3.0)) == 0.0


def test_heading_degenerate():
    with pytest.raises(DegenerateDirection):
        heading((1.0, 2.0, 0.0), (1.0, 2.0, 0.0))
    with pytest.raises(DegenerateDirection):
        heading((1.0, 2.0, 0.0), (1.0, 2.0, 9.0))


@given(finite_coord, finite_coord, finite_coord, finite_coord)
def test_heading_antisymmetry(ax, ay, bx, by):
    a, b = (ax, ay, 0.0), (bx, by, 0.0)
    if (ax, ay) == (bx, by):
        return
    fwd = heading(a, b)
    back = heading(b, a)
    assert 0.0 <= fwd < TWO_PI
    assert abs(abs(heading_delta(fwd, back)) - math.pi) < 1e-9


# sector_index ----------------------------------------------------------


@pytest.mark.parametrize(
    "degrees,expected",
    [(0, 0), (90, 3), (150, 5), (15, 1), (14.999, 0), (345, 0), (344.9, 11), (359.9, 0)],
)
def test_sector_examples(degrees, expected):
    assert sector_index(math.radians(degrees)) == expected


@given(st.floats(min_value=0.0, max_value=TWO_PI, exclude_max=True))
def test_sector_total(h):
    assert 0 <= sector_index(h) <= 11


def test_sector_surjective():
    seen = {sector_index(math.radians(d)) for d in range(360)}
    assert seen == set(range(12))


def test_sector_rejects_out_of_range():
    with pytest.raises(ValueError):
        sector_index(-0.1)
    with pytest.raises(ValueError):
        sector_index(TWO_PI)


# graph construction -----------------------------------------------------


def test_duplicate_edge_named():
    vs = [Vertex(id="a", position=(0, 0, 0)), Vertex(id="b", position=(1, 0, 0))]
    with pytest.raises(InvariantViolation) as exc:
        make_scene("s", vs, [("a", "b"), ("b", "a")])
    assert exc.value.rule == "duplicate-edge"


def test_self_loop_rejected():
    vs = [Vertex(id="a", position=(0, 0, 0)), Vertex(id="b", position=(1, 0, 0))]
    with pytest.raises(InvariantViolation):
        make_scene("s", vs, [("a", "a"), ("a", "b")])


def test_disconnected_rejected():
    vs = [Vertex(id=v, position=(i, 0, 0)) for i, v in enumerate("abcd")]
    with pytest.raises(DisconnectedGraph):
        make_scene("s", vs, [("a", "b"), ("c", "d")])


def test_unknown_endpoint_rejected():
    vs = [Vertex(id="a", position=(0, 0, 0)), Vertex(id="b", position=(1, 0, 0))]
    with pytest.raises(InvariantViolation):
        make_scene("s", vs, [("a", "z")])


def test_single_vertex_scene_ok():
    g = make_scene("s", [Vertex(id="a", position=(0, 0, 0))], [])
    assert g.components() == [frozenset({"a"})]


def test_nonfinite_position_rejected():
    with pytest.raises(InvariantViolation):
        Vertex(id="a", position=(0.0, math.nan, 0.0))


# bridges ----------------------------------------------------------------


def test_path_graph_bridge():
    g = chain("A", "B", "C")
    assert is_bridge(g, ("A", "B"))
    assert is_bridge(g, ("B", "A"))


def test_cycle_has_no_bridge():
    vs = [Vertex(id=v, position=(i, i % 2, 0)) for i, v in enumerate("abcd")]
    g = make_scene("s", vs, [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")])
    for e in g.sorted_edges():
        assert not is_bridge(g, e)


def test_unknown_edge():
    g = chain("A", "B", "C")
    with pytest.raises(UnknownEdge):
        is_bridge(g, ("A", "C"))


def test_bridges_match_removal_oracle():
    rng = random.Random(1234)
    for _ in range(50):
        g = random_connected_scene(rng)
        for e in g.sorted_edges():
            assert is_bridge(g, e) == (count_components_without_edge(g, e) == 2)


# side components ---------------------------------------------------------


def test_side_component_chain():
    g = chain("A", "B", "C")
    assert side_component(g, ("A", "B"), "B") == {"B", "C"}
    assert side_component(g, ("A", "B"), "A") == {"A"}


def test_side_component_dumbbell():
    vs = [Vertex(id=v, position=(i, i % 3, 0)) for i, v in enumerate("abcxyz")]
    edges = [("a", "b"), ("b", "c"), ("a", "c"), ("x", "y"), ("y", "z"), ("x", "z"), ("c", "x")]
    g = make_scene("s", vs, edges)
    assert side_component(g, ("c", "x"), "x") == {"x", "y", "z"}
    assert side_component(g, ("c", "x"), "c") == {"a", "b", "c"}


def test_side_components_partition():
    rng = random.Random(99)
    for _ in range(25):
        g = random_connected_scene(rng)
        for e in g.sorted_edges():
            if not is_bridge(g, e):
                continue
            u, v = e
            left = side_component(g, e, u)
            right = side_component(g, e, v)
            assert left | right == set(g.vertices)
            assert not left & right


def test_side_component_requires_bridge():
    vs = [Vertex(id=v, position=(i, i % 2, 0)) for i, v in enumerate("abc")]
    g = make_scene("s", vs, [("a", "b"), ("b", "c"), ("a", "c")])
    with pytest.raises(NotABridge):
        side_component(g, ("a", "b"), "a")


def test_side_component_bad_anchor():
    g = chain("A", "B", "C")
    with pytest.raises(ValueError):
        side_component(g, ("A", "B"), "C")


def test_norm_edge_orders_endpoints():
    assert norm_edge("z", "a") == ("a", "z")
    with pytest.raises(InvariantViolation):
        norm_edge("a", "a")
