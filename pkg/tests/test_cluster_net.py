import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage

from clusterlab.cluster_net import (
    Arc, ClusterNet, Node, components, find_crossings, load, region_at, region_loops, save, shoelace, validate,
)
from clusterlab.errors import ParseError, SchemaVersionError
from clusterlab.scenarios import Scenario, circle_net, double_bubble_net, initial_net, sector_net

from conftest import disk_net, island_net, ring, two_square_net


def _swap_arc(net, arc):
    arcs = tuple(arc if a.id == arc.id else a for a in net.arcs)
    return replace(net, arcs=arcs)


def test_two_tangent_squares_validate():
    assert validate(two_square_net()).ok


def test_double_bubble_scenario_validates():
    assert validate(double_bubble_net(1.0, 1.0, 0.05)).ok


def test_equal_labels_flagged():
    net = two_square_net()
    bad = _swap_arc(net, replace(net.arc(0), right=1))
    res = validate(bad)
    assert "degenerate labels" in res.kinds()
    assert any(0 in v.arcs for v in res.violations if v.kind == "degenerate labels")


def test_crossing_arcs_flagged():
    # two unit disks overlapping: their loops cross at two non-node points
    a = ring((0.0, 0.0), 1.0, 64)
    b = ring((1.0, 0.0), 1.0, 64, start_angle=0.05)
    net = ClusterNet(
        2, (Node(0, *a[0]), Node(1, *b[0])),
        (Arc(0, 0, 0, a, 1, 0), Arc(1, 1, 1, b, 2, 0)),
        (math.pi, math.pi), (-2.0, -2.0, 3.0, 2.0),
    )
    res = validate(net)
    assert "planarity" in res.kinds()


def _brute_force_crossings(net):
    """Arc pairs with a proper crossing, all segment pairs tried; shared vertices skipped."""
    segs = []
    for a in net.arcs:
        for p, q in zip(a.points[:-1], a.points[1:]):
            segs.append((p, q, a.id))
    hits = set()

    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            p1, q1, u = segs[i]
            p2, q2, v = segs[j]
            if any(np.array_equal(u, v) for u in (p1, q1) for v in (p2, q2)):
                continue
            d1, d2 = orient(p1, q1, p2), orient(p1, q1, q2)
            d3, d4 = orient(p2, q2, p1), orient(p2, q2, q1)
            if d1 * d2 < 0 and d3 * d4 < 0:
                hits.add((min(u, v), max(u, v)))
    return hits


def test_crossings_agree_with_brute_force():
    a = ring((0.0, 0.0), 1.0, 24)
    b = ring((1.0, 0.3), 1.0, 24, start_angle=0.05)
    net = ClusterNet(
        2, (Node(0, *a[0]), Node(1, *b[0])),
        (Arc(0, 0, 0, a, 1, 0), Arc(1, 1, 1, b, 2, 0)),
        (1.0, 1.0), (-2.0, -2.0, 3.0, 2.0),
    )
    assert set(find_crossings(net)) == _brute_force_crossings(net) == {(0, 1)}
    db = double_bubble_net(1.0, 1.0, 0.1)
    assert find_crossings(db) == [] and _brute_force_crossings(db) == set()


def test_open_boundary_flagged():
    net = two_square_net()
    # drop the outer boundary of region 2: its loop cannot close
    bad = replace(net, arcs=net.arcs[:2])
    assert not validate(bad).ok


def test_zero_length_segment_flagged():
    net = disk_net(n=16)
    pts = net.arcs[0].points
    pts = np.insert(pts, 3, pts[3], axis=0)
    bad = _swap_arc(net, replace(net.arcs[0], points=pts))
    assert "zero_length" in validate(bad).kinds()


def test_disk_loops_orientation():
    net = disk_net(n=64)
    (inner,) = region_loops(net, 1)
    (outer,) = region_loops(net, 0)
    assert shoelace(inner) > 0 > shoelace(outer)
    # same vertices, opposite traversal
    rev = outer[::-1]
    assert any(np.array_equal(np.roll(rev, k, axis=0), inner) for k in range(len(rev)))


def test_double_bubble_loop_structure():
    net = double_bubble_net(1.0, 1.0, 0.1)
    shared = next(a for a in net.arcs if {a.left, a.right} == {1, 2})
    outer1 = next(a for a in net.arcs if {a.left, a.right} == {1, 0})
    (loop,) = region_loops(net, 1)
    # loops are stored without repeating the first vertex
    assert len(loop) == (len(shared.points) - 1) + (len(outer1.points) - 1)
    # the interface is walked with region 1 on the left
    along = shared.points if shared.left == 1 else shared.points[::-1]
    assert any(np.allclose(np.roll(loop, -k, axis=0)[: len(along)], along) for k in range(len(loop)))
    assert shoelace(loop) > 0


@pytest.mark.parametrize("make", [
    lambda: double_bubble_net(1.0, 1.0, 0.05),
    lambda: sector_net((1.0, 1.0, 1.0), 0.05),
    lambda: initial_net(Scenario("gaussian_double_bubble"))[0],
])
def test_every_region_has_positive_area(make):
    net = make()
    for i in range(1, net.m + 1):
        assert sum(shoelace(l) for l in region_loops(net, i)) > 0


def test_sampled_points_lie_in_exactly_one_region():
    net = sector_net((1.0, 1.0, 1.0), 0.05)
    rng = np.random.default_rng(0)
    x0, y0, x1, y1 = net.window
    pts = rng.uniform((x0, y0), (x1, y1), (5000, 2))
    from clusterlab.cluster_net import points_in_polygon

    hits = np.zeros(len(pts), int)
    for i in range(0, net.m + 1):
        inside = np.zeros(len(pts), bool)
        for loop in region_loops(net, i):
            inside ^= points_in_polygon(pts, loop)
        if i == 0:
            inside = ~inside  # the exterior's loops are holes of the plane
        hits += inside
    assert np.all(hits == 1)
    labels = region_at(net, pts)
    assert labels.min() >= 0 and labels.max() <= net.m


def _raster_components(net, i, n=512):
    x0, y0, x1, y1 = net.window
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    X, Y = np.meshgrid(xs, ys)
    lab = region_at(net, np.stack([X.ravel(), Y.ravel()], axis=1)).reshape(n, n)
    _, count = ndimage.label(lab == i)
    return count


@pytest.mark.parametrize("make", [
    lambda: disk_net(n=64),
    lambda: double_bubble_net(1.0, 1.0, 0.05),
    lambda: sector_net((1.0, 1.0, 1.0), 0.05),
    island_net,
])
def test_components_match_raster_flood_fill(make):
    net = make()
    for i in range(net.m + 1):
        assert len(components(net, i)) == _raster_components(net, i)


def test_island_fixture_has_two_components():
    net = island_net()
    comps = components(net, 1)
    assert len(comps) == 2
    assert sorted(round(c.area, 3) for c in comps)[0] < 0.01
    assert len(components(net, 2)) == 1


def test_double_bubble_exterior_is_one_unbounded_component():
    (c,) = components(double_bubble_net(1.0, 1.0, 0.05), 0)
    assert c.unbounded


def test_disk_component_area_and_diameter():
    (c,) = components(disk_net(n=256), 1)
    assert c.area == pytest.approx(128 * math.sin(2 * math.pi / 256), rel=1e-12)
    assert c.diameter == pytest.approx(2.0, abs=1e-12)


def test_save_load_round_trip_disk():
    net = circle_net(math.pi)
    assert load(save(net)) == net


def test_save_load_round_trip_sector():
    net = sector_net((1.0, 2.0, 0.5), 0.05, perturb=0.01, seed=3)
    back = load(save(net))
    assert back == net
    assert save(back) == save(net)


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=20), finite)
def test_round_trip_bit_exact_coordinates(points, target):
    pts = np.array(points + [points[0]], float)
    node = Node(0, float(pts[0, 0]), float(pts[0, 1]))
    net = ClusterNet(1, (node,), (Arc(0, 0, 0, pts, 1, 0),), (target,), (-1.0, -1.0, 1.0, 1.0))
    back = load(save(net))
    assert np.array_equal(back.arcs[0].points, net.arcs[0].points)
    assert back.target_areas == net.target_areas


def test_missing_target_areas_is_parse_error():
    obj = json.loads(save(disk_net(n=8)))
    del obj["target_areas"]
    with pytest.raises(ParseError) as info:
        load(json.dumps(obj))
    assert "target_areas" in str(info.value)


def test_unknown_version_rejected():
    text = save(disk_net(n=8)).decode().replace('"version": "1"', '"version": "99"')
    with pytest.raises(SchemaVersionError):
        load(text)


def test_endpoint_mismatch_is_parse_error():
    text = save(disk_net(n=8)).decode()
    net = load(text)
    moved = replace(net, nodes=(Node(0, net.nodes[0].x + 1e-9, net.nodes[0].y),))
    with pytest.raises(ParseError):
        load(save(moved))


def test_malformed_json_reports_line():
    with pytest.raises(ParseError) as info:
        load('{\n  "version": "1",\n  oops\n}')
    assert info.value.line == 3
