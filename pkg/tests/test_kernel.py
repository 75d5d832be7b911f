"""Relate-kernel conformance against an independent reference
implementation (shapely/GEOS) plus structural edge cases."""

import random

import pytest
import shapely

from geolink.errors import DegenerateGeometry
from geolink.geometry import Geometry
from geolink.kernel import backend_name, load_interpreted
from geolink.relations import IntersectionMatrix, relate, verify_pair

from conftest import lattice_geometry, square


def to_shapely(g: Geometry):
    if g.kind == "linestring":
        return shapely.LineString(g.path)
    return shapely.Polygon(g.rings[0], list(g.rings[1:]))


def assert_matches_reference(a: Geometry, b: Geometry):
    mine = relate(a, b).pattern()
    ref = shapely.relate(to_shapely(a), to_shapely(b))
    assert mine == ref, f"{mine} != {ref} for {to_shapely(a).wkt} | {to_shapely(b).wkt}"


def test_fixture_matrices(p1, p2, l3, l4):
    geoms = [p1, p2, l3, l4]
    for a in geoms:
        for b in geoms:
            assert_matches_reference(a, b)


def test_contains_matrix(p1, p2):
    assert relate(p1, p2).pattern() == "212FF1FF2"


def test_touch_matrix(l3, p1):
    m = relate(l3, p1)
    assert m.pattern() == "FF1F00212"
    assert m.transposed().cells == relate(p1, l3).cells


def test_cross_matrix(l3, l4):
    assert relate(l3, l4).pattern() == "0F1FF0102"


CURATED = [
    # shared full edge between side-by-side squares
    (square(0, 0, 0, 2), square(1, 2, 0, 2)),
    # shared partial edge
    (square(0, 0, 0, 4), Geometry.polygon(1, [[(4, 1), (6, 1), (6, 3), (4, 3), (4, 1)]])),
    # identical polygons
    (square(0, 1, 1, 3), square(1, 1, 1, 3)),
    # nested sharing part of the boundary
    (square(0, 0, 0, 4), square(1, 0, 0, 2)),
    # corner-only touch
    (square(0, 0, 0, 2), square(1, 2, 2, 2)),
    # polygon with hole vs geometry inside the hole
    (
        Geometry.polygon(0, [
            [(0, 0), (10, 0), (10, 10), (0, 10), (0, 0)],
            [(3, 3), (7, 3), (7, 7), (3, 7), (3, 3)],
        ]),
        square(1, 4, 4, 2),
    ),
    # polygon exactly filling the hole
    (
        Geometry.polygon(0, [
            [(0, 0), (10, 0), (10, 10), (0, 10), (0, 0)],
            [(3, 3), (7, 3), (7, 7), (3, 7), (3, 3)],
        ]),
        square(1, 3, 3, 4),
    ),
    # line along a polygon edge
    (Geometry.linestring(0, [(0, 0), (4, 0)]), square(1, 0, 0, 4)),
    # line crossing through a polygon
    (Geometry.linestring(0, [(-1, 2), (5, 2)]), square(1, 0, 0, 4)),
    # line fully inside
    (Geometry.linestring(0, [(1, 1), (3, 3)]), square(1, 0, 0, 4)),
    # closed line tracing the shell
    (Geometry.linestring(0, [(0, 0), (4, 0), (4, 4), (0, 4), (0, 0)]), square(1, 0, 0, 4)),
    # collinear overlapping lines
    (Geometry.linestring(0, [(0, 0), (4, 0)]), Geometry.linestring(1, [(2, 0), (6, 0)])),
    # line within line
    (Geometry.linestring(0, [(1, 0), (2, 0)]), Geometry.linestring(1, [(0, 0), (4, 0)])),
    # identical lines
    (Geometry.linestring(0, [(0, 0), (2, 2)]), Geometry.linestring(1, [(0, 0), (2, 2)])),
    # lines touching end-to-end
    (Geometry.linestring(0, [(0, 0), (2, 0)]), Geometry.linestring(1, [(2, 0), (4, 0)])),
    # line endpoint touching a line interior (T junction)
    (Geometry.linestring(0, [(0, 0), (4, 0)]), Geometry.linestring(1, [(2, 0), (2, 3)])),
    # single-point interior crossing at a shared vertex
    (Geometry.linestring(0, [(0, 0), (2, 2), (4, 0)]), Geometry.linestring(1, [(0, 4), (2, 2), (4, 4)])),
    # zigzag line crossing a polygon boundary repeatedly
    (
        Geometry.linestring(0, [(-1, 1), (1, 1), (1, 5), (3, 5), (3, 1), (6, 1)]),
        square(1, 0, 0, 4),
    ),
]


@pytest.mark.parametrize("a,b", CURATED, ids=range(len(CURATED)))
def test_curated_edge_cases(a, b):
    assert_matches_reference(a, b)
    assert_matches_reference(b, a)


def test_randomized_lattice_conformance():
    rng = random.Random(1234)
    checked = 0
    for _ in range(1200):
        a = lattice_geometry(rng, 0)
        b = lattice_geometry(rng, 1)
        sa, sb = to_shapely(a), to_shapely(b)
        if a.kind == "polygon" and not sa.is_valid:
            continue
        if b.kind == "polygon" and not sb.is_valid:
            continue
        assert relate(a, b).pattern() == shapely.relate(sa, sb)
        checked += 1
    assert checked > 900


def test_randomized_float_conformance(rng):
    for _ in range(400):
        def rand_geom(gid):
            x0 = rng.uniform(0, 20)
            y0 = rng.uniform(0, 20)
            if rng.random() < 0.5:
                return Geometry.polygon(gid, [[(x0, y0), (x0 + rng.uniform(0.5, 6), y0),
                                               (x0 + rng.uniform(0.5, 6), y0 + rng.uniform(0.5, 6)),
                                               (x0, y0 + rng.uniform(0.5, 6)), (x0, y0)]])
            return Geometry.linestring(gid, [(x0, y0), (x0 + rng.uniform(-6, 6), y0 + rng.uniform(-6, 6))])

        a, b = rand_geom(0), rand_geom(1)
        sa, sb = to_shapely(a), to_shapely(b)
        if (a.kind == "polygon" and not sa.is_valid) or (b.kind == "polygon" and not sb.is_valid):
            continue
        assert relate(a, b).pattern() == shapely.relate(sa, sb)


def test_transpose_symmetry_random(rng):
    for _ in range(200):
        a = lattice_geometry(rng, 0)
        b = lattice_geometry(rng, 1)
        assert relate(a, b).transposed().cells == relate(b, a).cells


def test_self_crossing_ring_raises():
    bowtie = Geometry.polygon(0, [[(0, 0), (4, 4), (4, 0), (0, 4), (0, 0)]])
    other = square(1, 1, 1, 1)
    with pytest.raises(DegenerateGeometry):
        verify_pair(bowtie, other)


def test_self_touching_ring_is_attempted():
    # pinched ring touching itself at one vertex: tolerated, not raised
    pinched = Geometry.polygon(0, [
        [(0, 0), (2, 0), (2, 2), (4, 2), (4, 4), (2, 4), (2, 2), (0, 2), (0, 0)]
    ])
    rels = verify_pair(pinched, square(1, 0, 0, 1))
    assert rels  # intersects at least


def test_matrix_pattern_roundtrip():
    m = IntersectionMatrix.from_pattern("212FF1FF2")
    assert m.pattern() == "212FF1FF2"
    assert m.cell(0, 0) == 2
    assert m.cell(1, 2) == 1
    assert m.matches("T*****FF*")
    assert not m.matches("T*F**F***")


def test_backend_parity_on_fixture(p1, p2, l3, l4):
    """Compiled and interpreted kernels agree cell for cell."""
    interp = load_interpreted()

    def flat(g):
        return [[c for pt in curve for c in pt] for curve in g.curves()]

    geoms = [p1, p2, l3, l4]
    for a in geoms:
        for b in geoms:
            expected = relate(a, b).cells
            got = interp.relate(a.dimension, flat(a), b.dimension, flat(b))
            assert tuple(got) == expected


def test_backend_name_reports():
    assert backend_name() in ("compiled", "python")
