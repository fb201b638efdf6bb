import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import MINIMAL_XODR, T_JUNCTION_XODR
from scenegen.errors import (
    GraphConsistencyError,
    NotFoundError,
    ParseError,
    SerializationError,
)
from scenegen.geometry import DirectedRef, RefSegment, ReferenceLine
from scenegen.opendrive import parse_opendrive
from scenegen.roadgraph import (
    Connection,
    Lane,
    RoadGraph,
    RoadNode,
    base_road_id,
    has_adjacent_straight,
    load_graph,
    neighbors,
    save_graph,
)


def test_minimal_file_is_one_isolated_node():
    g = parse_opendrive(MINIMAL_XODR)
    assert len(g.nodes) == 1
    assert len(g.edges) == 0
    node = g.node("1")
    assert len(node.driving_lanes) == 2
    assert node.junction_options == frozenset()
    assert not node.is_junction


def test_golden_fixture_reproduces_candidate_roads(ranking_graph):
    a = ranking_graph.node("1")
    assert a.junction_options == frozenset({"left", "right", "straight"})
    assert a.lanes_of_kind("shoulder")
    assert len(a.driving_lanes) == 3
    expectations = {
        "2": (frozenset({"right", "straight"}), True, 1),
        "3": (frozenset({"right"}), True, 2),
        "4": (frozenset({"left", "right", "straight"}), False, 1),
        "5": (frozenset({"left", "right"}), False, 2),
    }
    for rid, (options, shoulder, lanes) in expectations.items():
        node = ranking_graph.node(rid)
        assert node.junction_options == options
        assert bool(node.lanes_of_kind("shoulder")) == shoulder
        assert len(node.driving_lanes) == lanes


def test_t_junction_turn_labels_match_hand_geometry():
    # Stem heads north (pi/2); the west exit (heading pi) is +90deg -> left,
    # the east exit (heading 0) is -90deg -> right.
    g = parse_opendrive(T_JUNCTION_XODR)
    stem = g.node("1")
    assert stem.junction_options == frozenset({"left", "right"})
    turns = {e.to_id: e.turn for e in g.outgoing("1")}
    assert turns == {"2": "left", "3": "right"}


def test_neighbors_matches_brute_force(ranking_graph):
    for rid in ranking_graph.nodes:
        got = {n.id for n in neighbors(ranking_graph, rid)}
        expected = {e.to_id for e in ranking_graph.edges if e.from_id == rid}
        assert got == expected
        for turn in ("left", "right", "straight"):
            got_t = {n.id for n in neighbors(ranking_graph, rid, turn)}
            expected_t = {
                e.to_id for e in ranking_graph.edges if e.from_id == rid and e.turn == turn
            }
            assert got_t == expected_t


def test_neighbors_isolated_and_unknown(parade):
    assert neighbors(parade, "1") == []
    assert neighbors(parade, "1", "left") == []
    with pytest.raises(NotFoundError):
        neighbors(parade, "nope")


def test_has_adjacent_straight_cases(ranking_graph, parade):
    # The left neighbor of candidate A continues straight at its far junction.
    assert has_adjacent_straight(ranking_graph, "1", "left") is True
    # Candidate E's left neighbor ends without any options.
    assert has_adjacent_straight(ranking_graph, "5", "left") is False
    assert has_adjacent_straight(parade, "1", "left") is False
    with pytest.raises(NotFoundError):
        has_adjacent_straight(ranking_graph, "nope", "left")
    with pytest.raises(ValueError):
        has_adjacent_straight(ranking_graph, "1", "straight")


def test_every_edge_endpoint_resolves(crossroads, ranking_graph):
    for g in (crossroads, ranking_graph):
        for e in g.edges:
            g.node(e.from_id)
            g.node(e.to_id)
            assert e.turn in ("left", "right", "straight")


def test_junction_options_iff_terminates_at_junction(crossroads, ranking_graph, parade):
    for g in (crossroads, ranking_graph, parade):
        for node in g.nodes.values():
            assert bool(node.junction_options) == node.is_junction


def test_dangling_link_raises():
    bad = T_JUNCTION_XODR.replace('connectingRoad="3"', 'connectingRoad="99"')
    with pytest.raises(GraphConsistencyError) as err:
        parse_opendrive(bad)
    assert "99" in str(err.value)


def test_bad_lane_link_raises():
    bad = T_JUNCTION_XODR.replace('<laneLink from="-1" to="-1"/>', '<laneLink from="-4" to="-1"/>', 1)
    with pytest.raises(GraphConsistencyError):
        parse_opendrive(bad)


def test_malformed_xml_reports_line():
    with pytest.raises(ParseError) as err:
        parse_opendrive("<OpenDRIVE>\n<road\n")
    assert err.value.line is not None


def test_unsupported_geometry_rejected():
    bad = MINIMAL_XODR.replace("<line/>", '<spiral curvStart="0" curvEnd="0.1"/>')
    with pytest.raises(ParseError) as err:
        parse_opendrive(bad)
    assert "spiral" in str(err.value)


def test_round_trip_fixture_graphs(crossroads, ranking_graph, parade):
    for g in (crossroads, ranking_graph, parade):
        assert load_graph(save_graph(g)) == g


def test_round_trip_rejects_corruption(ranking_graph):
    payload = save_graph(ranking_graph)
    with pytest.raises(SerializationError):
        load_graph(payload[: len(payload) // 2])
    with pytest.raises(SerializationError):
        load_graph(payload.replace(b'"version": 1', b'"version": 9', 1))
    with pytest.raises(SerializationError):
        load_graph(b"[1, 2, 3]")


def test_base_road_id():
    assert base_road_id("12") == "12"
    assert base_road_id("12.r") == "12"


_lane_kinds = st.sampled_from(["driving", "sidewalk", "shoulder"])


@st.composite
def graphs(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    nodes = []
    for i in range(n):
        lane_count = draw(st.integers(min_value=1, max_value=4))
        lanes = tuple(
            Lane(-(k + 1), draw(_lane_kinds), draw(st.floats(min_value=1.0, max_value=5.0)))
            for k in range(lane_count)
        )
        length = draw(st.floats(min_value=5.0, max_value=200.0))
        ref = DirectedRef(
            ReferenceLine((RefSegment("line", float(i * 30), 0.0, 0.0, length),)), True
        )
        nodes.append(
            RoadNode(
                id=str(i),
                base_id=str(i),
                length=length,
                lanes=lanes,
                signals=frozenset(draw(st.sets(st.sampled_from(["traffic light", "stop sign", "yield sign"])))),
                objects=frozenset(draw(st.sets(st.sampled_from(["stop line", "simple crosswalk", "speed sign of 60"])))),
                is_junction=False,
                junction_options=frozenset(),
                ref=ref,
            )
        )
    edges = []
    if n > 1:
        for _ in range(draw(st.integers(min_value=0, max_value=4))):
            a = draw(st.integers(min_value=0, max_value=n - 1))
            b = draw(st.integers(min_value=0, max_value=n - 1))
            edges.append(
                Connection(
                    from_id=str(a),
                    to_id=str(b),
                    turn=draw(st.sampled_from(["left", "right", "straight"])),
                    lane_map=((-1, -1),),
                )
            )
    return RoadGraph.build("generated", nodes, edges)


@given(graphs())
@settings(max_examples=60, deadline=None)
def test_round_trip_generated_graphs(g):
    assert load_graph(save_graph(g)) == g


def test_arc_geometry_pose():
    # Quarter circle of radius 20 turning left from the origin heading east.
    seg = RefSegment("arc", 0.0, 0.0, 0.0, length=20 * math.pi / 2, curvature=1 / 20)
    x, y, h = seg.pose_at(seg.length)
    assert x == pytest.approx(20.0, abs=1e-9)
    assert y == pytest.approx(20.0, abs=1e-9)
    assert h == pytest.approx(math.pi / 2, abs=1e-9)
