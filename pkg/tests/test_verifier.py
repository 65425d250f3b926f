import math

import numpy as np
import pytest

from clusterlab.cluster_net import Arc, ClusterNet, Node
from clusterlab.density import constant, grushin
from clusterlab.errors import MissingCertificate
from clusterlab.functionals import weighted_perimeter
from clusterlab.probes import EpsBetaCertificate, GrowthCertificate, analytic_certificates
from clusterlab.scenarios import Scenario, initial_net
from clusterlab.verifier import (
    ball_fill, ball_length_check, circle_crossing_check, circle_crossings, gamma_theory, holder_quotient,
    island_check, isoperimetric_check, junction_report, length_in_disk, local_optimality_probe, mean_spacing,
    regularity_report, spider, windowed_tangent_angles,
)

from conftest import DB_RADIUS, disk_net, island_net


def open_arc_net(pts):
    pts = np.asarray(pts, float)
    nodes = (Node(0, *pts[0]), Node(1, *pts[-1]))
    return ClusterNet(1, nodes, (Arc(0, 0, 1, pts, 1, 0),), (1.0,), (-5.0, -5.0, 5.0, 5.0))


def polyline_length(pts):
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def circular_arc(r, sweep, n):
    th = np.linspace(0.0, sweep, n + 1)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)


# junctions


def test_double_bubble_junctions(double_run):
    jr = junction_report(double_run.net)
    assert jr.count == 2 and jr.all_valence_3
    assert jr.max_deviation_deg < 1.0
    assert jr.min_separation == pytest.approx(DB_RADIUS * math.sqrt(3), rel=0.01)
    assert DB_RADIUS * math.sqrt(3) == pytest.approx(1.0895, abs=1e-4)


def test_angles_sum_to_full_turn(any_run):
    for j in junction_report(any_run.net).junctions:
        assert sum(j.angles_deg) == pytest.approx(360.0, abs=1e-9)


def test_converged_isotropic_fixtures_meet_structure(any_run):
    jr = junction_report(any_run.net)
    assert jr.all_valence_3
    assert jr.max_deviation_deg < 2.0
    if jr.min_separation is not None:
        assert jr.min_separation > 10 * mean_spacing(any_run.net)


def test_circle_has_no_junctions(circle_run):
    jr = junction_report(circle_run.net)
    assert jr.count == 0 and jr.min_separation is None


# regularity


def test_straight_arc_has_zero_holder_constant():
    net = open_arc_net(np.stack([np.linspace(0, 3, 61), 0.5 * np.linspace(0, 3, 61)], axis=1))
    rep = regularity_report(net, constant(1.0), analytic_certificates(constant(1.0)))
    assert rep.gamma_theory == pytest.approx(0.5)
    assert rep.arcs[0].k_gamma == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_circular_arc_holder_quotient(r):
    sweep = 2.0
    pts = circular_arc(r, sweep, 400)
    s, th = windowed_tangent_angles(pts, closed=False)
    # theta(s) = s / r, so the quotient over separations up to L peaks at L^(1/2) / r
    L = r * sweep
    k = holder_quotient(s, th, 0.5, 4 * L / 400, L)
    assert k == pytest.approx(math.sqrt(L) / r, rel=0.1)
    assert k <= math.sqrt(L) / r * 1.1


def test_windowed_tangents_follow_circle():
    pts = circular_arc(1.0, 1.5, 300)
    s, th = windowed_tangent_angles(pts, closed=False)
    interior = slice(3, -3)
    assert np.max(np.abs(th[interior] - (s[interior] + math.pi / 2))) < 1e-3


def test_grushin_gamma_from_certificates():
    f = grushin(1.0)
    net, _ = initial_net(Scenario("grushin_bubble"))
    rep = regularity_report(net, f, analytic_certificates(f))
    assert rep.gamma_theory == pytest.approx(0.25, abs=1e-15)
    g, e = analytic_certificates(grushin(0.5))
    assert gamma_theory(g, e, 1.0) == pytest.approx(1 / (2 * 1.5))


def test_gamma_none_when_no_room():
    g = GrowthCertificate(1.0, 1.0, 1.0)
    assert gamma_theory(g, EpsBetaCertificate(1.0), 1.0) is None


def test_regularity_requires_certificates():
    with pytest.raises(MissingCertificate):
        regularity_report(disk_net(n=32), constant(1.0), None)


def test_converged_arcs_have_finite_holder_constants(any_run):
    rep = regularity_report(any_run.net, any_run.field, analytic_certificates(any_run.field))
    for a in rep.arcs:
        assert a.k_gamma is not None and math.isfinite(a.k_gamma)
    assert rep.flagged == []


# ball length


def test_length_in_disk_flat_interface():
    P = np.array([[-5.0, 0.0]])
    Q = np.array([[5.0, 0.0]])
    for r in (0.01, 0.3, 1.0):
        assert length_in_disk(P, Q, (0.2, 0.0), r) / r == pytest.approx(2.0, abs=1e-12)


def test_junction_ratio_approaches_three(double_run):
    net = double_run.net
    P, Q, _ = net.segments()
    j = net.node(net.junction_ids()[0]).position
    r = 3 * mean_spacing(net)
    assert length_in_disk(P, Q, j, r) / r == pytest.approx(3.0, abs=0.02)


def test_ball_length_bound_on_converged(any_run):
    log = ball_length_check(any_run.net, seed=0)
    assert log.passed
    assert log.max_measured < 6.5
    assert log.max_measured <= 3.2


# circle crossings


def test_flat_interface_crossed_twice():
    P = np.array([[-5.0, 0.0]])
    Q = np.array([[5.0, 0.0]])
    assert circle_crossings(P, Q, (0.0, 0.0), 1.0) == 2


def test_junction_circle_crossed_three_times(triple_run):
    net = triple_run.net
    P, Q, _ = net.segments()
    r = 4 * mean_spacing(net)
    for j in net.junction_ids():
        assert circle_crossings(P, Q, net.node(j).position, r * (1 + 1e-7)) == 3


def test_circle_crossing_check_on_converged(any_run):
    log = circle_crossing_check(any_run.net, seed=0)
    assert log.passed


def test_shared_vertex_counted_once():
    # a circle through a polyline vertex: the two segments meeting there share one crossing
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    Q = np.array([[1.0, 0.0], [3.0, 0.0]])
    assert circle_crossings(P, Q, (0.0, 0.0), 1.0) == 1


# islands


def test_island_check_passes_on_converged(any_run):
    assert island_check(any_run.net).passed


def test_island_check_flags_constructed_violation():
    log = island_check(island_net())
    assert not log.passed
    (bad,) = log.failures()
    assert bad.sample.startswith("region 1 component")
    assert "neighbours [2]" in bad.sample


# isoperimetric inequality


def test_isoperimetric_circle_arithmetic():
    r = 0.7
    cert = GrowthCertificate(2.0, math.pi, math.inf)
    lhs = 2 * math.pi * r
    rhs = 1.0 / math.sqrt(math.pi) * math.sqrt(math.pi * r * r)
    assert rhs == pytest.approx(r)
    assert lhs >= rhs
    log = isoperimetric_check(disk_net(radius=r, n=128), constant(1.0), cert)
    assert log.passed
    assert log.entries[0].bound == pytest.approx(r * math.sqrt(128 / 2 * math.sin(2 * math.pi / 128) / math.pi), rel=1e-12)


def test_isoperimetric_on_converged(any_run):
    cert, _ = analytic_certificates(any_run.field)
    log = isoperimetric_check(any_run.net, any_run.field, cert)
    assert log.passed and len(log.entries) == any_run.net.m


def test_isoperimetric_grushin_bubble():
    net, f = initial_net(Scenario("grushin_bubble"))
    cert, _ = analytic_certificates(f)
    assert cert.eta == pytest.approx(1.5)
    assert isoperimetric_check(net, f, cert).passed


def test_isoperimetric_needs_certificate():
    with pytest.raises(MissingCertificate):
        isoperimetric_check(disk_net(n=16), constant(1.0), None)


# competitors


def test_ball_fill_on_flat_interface_costs_half_circle():
    line = np.stack([np.linspace(-2, 2, 401), np.zeros(401)], axis=1)
    net = open_arc_net(line)
    r = 0.3
    comp = ball_fill(net, (0.005, 0.0), r, fill_left=True, spacing=0.002)
    dP = polyline_length(comp.arcs[0].points) - polyline_length(line)
    # chord of length 2r becomes a half circle of length pi r
    assert dP == pytest.approx((math.pi - 2) * r, rel=1e-3)
    # region 1 (left of the rightward line, y > 0) has absorbed the lower half disk
    assert comp.arcs[0].points[:, 1].min() == pytest.approx(-r, abs=1e-4)


def test_ball_fill_not_applicable_with_node_inside(double_run):
    net = double_run.net
    j = net.node(net.junction_ids()[0]).position
    assert ball_fill(net, j, 0.1, True, 0.01) is None


def test_spider_beats_nothing_at_converged_junction(double_run):
    net = double_run.net
    f = double_run.field
    j = net.junction_ids()[0]
    c = net.node(j).position + np.array([0.003, -0.002])
    comp = spider(net, j, c, 0.1, mean_spacing(net) / 2)
    assert comp is not None
    P0 = weighted_perimeter(net, f).perimeter
    # before any restoration the straight spider may be shorter, but only by curvature-order amounts
    assert abs(weighted_perimeter(comp, f).perimeter - P0) < 1e-2


def test_local_optimality_on_converged(any_run):
    log = local_optimality_probe(any_run.net, any_run.field, n=8, seed=0)
    assert log.passed
    assert len(log.entries) > 0
    # straddling ball-fills are strictly worse, not just tied
    fills = [e for e in log.entries if e.sample.startswith("ball-fill")]
    assert fills and min(e.measured for e in fills) > 0


def test_local_optimality_empty_ball_trivial():
    net = disk_net(n=64, window=(-10.0, -10.0, 10.0, 10.0))
    log = local_optimality_probe(net, constant(1.0), n=0, seed=1)
    empty = [e for e in log.entries if e.sample.startswith("empty ball")]
    assert empty and all(e.measured == 0.0 and e.passed for e in empty)


def test_checks_are_reproducible(double_run):
    a = ball_length_check(double_run.net, seed=5).to_dict()
    b = ball_length_check(double_run.net, seed=5).to_dict()
    assert a == b
