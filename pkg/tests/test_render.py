import xml.etree.ElementTree as ET
from pathlib import Path

from clusterlab.cluster_net import ClusterNet
from clusterlab.render import PALETTE, Style, region_color, render_svg
from clusterlab.scenarios import double_bubble_net, sector_net

from conftest import disk_net

GOLDEN = Path(__file__).parent / "golden" / "double_bubble.svg"
NS = "{http://www.w3.org/2000/svg}"


def _parse(svg):
    return ET.fromstring(svg.encode())


def test_empty_net_has_only_frame():
    svg = render_svg(ClusterNet(0, (), (), (), (-1.0, -1.0, 1.0, 1.0)))
    root = _parse(svg)
    kids = list(root)
    assert [k.tag for k in kids] == [NS + "rect"]
    assert kids[0].get("class") == "frame"


def test_double_bubble_golden():
    assert render_svg(double_bubble_net(1.0, 1.0, 0.1)) == GOLDEN.read_text()


def test_three_regions_three_colors():
    net = sector_net((1.0, 1.0, 1.0), 0.05)
    root = _parse(render_svg(net))
    fills = [p.get("fill") for p in root.iter(NS + "path") if p.get("class") == "region"]
    assert len(fills) == 3 and len(set(fills)) == 3
    assert set(fills) <= set(PALETTE)
    assert region_color(0) is None
    junctions = [c for c in root.iter(NS + "circle") if c.get("class") == "junction"]
    # center plus one where each interface meets the rim
    assert len(junctions) == len(net.junction_ids()) == 4


def test_palette_cycles():
    assert len(PALETTE) == 8
    assert region_color(9) == region_color(1)


def test_byte_identical_repeats():
    net = sector_net((1.0, 2.0, 0.5), 0.05, perturb=0.01, seed=2)
    assert render_svg(net) == render_svg(net)


def test_viewbox_spans_window():
    net = disk_net(window=(-2.0, -1.0, 2.0, 1.0))
    root = _parse(render_svg(net, Style(width_px=400)))
    assert root.get("viewBox") == "0 0 400 200"
    poly = next(root.iter(NS + "polyline"))
    xs = [float(p.split(",")[0]) for p in poly.get("points").split()]
    # the unit disk spans x in [-1, 1]: pixels 100 to 300
    assert min(xs) == 100.0 and max(xs) == 300.0


def test_no_negative_zero():
    svg = render_svg(disk_net(window=(-1.0, -1.0, 1.0, 1.0)))
    assert "-0.0000" not in svg
