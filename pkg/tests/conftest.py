"""Shared fixtures: the four-geometry example configuration and random
dataset generators (lattice-valued coordinates exercise shared edges,
vertex touches and collinear overlaps heavily)."""

import random

import pytest

from geolink.dataio import GeometryProfile
from geolink.geometry import Geometry


def square(gid, x0, y0, side):
    return Geometry.polygon(
        gid, [[(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side), (x0, y0)]]
    )


@pytest.fixture
def p1():
    return square(0, 0, 0, 10)


@pytest.fixture
def p2():
    return square(1, 2, 2, 2)


@pytest.fixture
def l3():
    return Geometry.linestring(2, [(10, 5), (15, 5)])


@pytest.fixture
def l4():
    return Geometry.linestring(3, [(12, 0), (12, 8)])


@pytest.fixture
def fig_polygons(p1, p2):
    """Source polygons with dataset-local ids 0 and 1."""
    return [square(0, 0, 0, 10), square(1, 2, 2, 2)]


@pytest.fixture
def fig_lines():
    """Target lines with dataset-local ids 0 and 1."""
    return [
        Geometry.linestring(0, [(10, 5), (15, 5)]),
        Geometry.linestring(1, [(12, 0), (12, 8)]),
    ]


@pytest.fixture
def mixed_fixture():
    """The arrangement whose full run yields exactly ten triples:
    source holds the small polygon and the horizontal line, target the
    big polygon and the vertical line."""
    source = [
        GeometryProfile(square(0, 2, 2, 2), "P2"),
        GeometryProfile(Geometry.linestring(1, [(10, 5), (15, 5)]), "L3"),
    ]
    target = [
        GeometryProfile(square(0, 0, 0, 10), "P1"),
        GeometryProfile(Geometry.linestring(1, [(12, 0), (12, 8)]), "L4"),
    ]
    return source, target


EXPECTED_TEN_TRIPLES = {
    ("P1", "contains", "P2"),
    ("P1", "covers", "P2"),
    ("P1", "intersects", "P2"),
    ("P2", "within", "P1"),
    ("P2", "coveredBy", "P1"),
    ("P2", "intersects", "P1"),
    ("L3", "touches", "P1"),
    ("L3", "intersects", "P1"),
    ("L3", "crosses", "L4"),
    ("L3", "intersects", "L4"),
}


def lattice_polygon(rng, gid, extent=12, max_side=6, hole_chance=0.25):
    x0 = rng.randrange(0, extent)
    y0 = rng.randrange(0, extent)
    w = rng.randrange(1, max_side)
    h = rng.randrange(1, max_side)
    if rng.random() < 0.5:
        ring = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h), (x0, y0)]
    else:
        w2 = rng.randrange(1, w + 1)
        h2 = rng.randrange(1, h + 1)
        if w2 == w or h2 == h:
            ring = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h), (x0, y0)]
        else:
            ring = [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h2), (x0 + w2, y0 + h2),
                    (x0 + w2, y0 + h), (x0, y0 + h), (x0, y0)]
    rings = [ring]
    if rng.random() < hole_chance and w >= 3 and h >= 3:
        rings.append([(x0 + 1, y0 + 1), (x0 + 2, y0 + 1), (x0 + 2, y0 + 2),
                      (x0 + 1, y0 + 2), (x0 + 1, y0 + 1)])
    return Geometry.polygon(gid, rings)


def lattice_line(rng, gid, extent=14, closed_chance=0.1):
    n = rng.randrange(2, 5)
    pts = [(float(rng.randrange(0, extent)), float(rng.randrange(0, extent)))]
    while len(pts) < n:
        x, y = pts[-1]
        nxt = (x + rng.randrange(-4, 5), y + rng.randrange(-4, 5))
        if nxt != pts[-1]:
            pts.append(nxt)
    if len(pts) < 2:
        pts.append((pts[0][0] + 1.0, pts[0][1]))
    if rng.random() < closed_chance and len(pts) >= 3 and pts[0] != pts[-1]:
        pts.append(pts[0])
    return Geometry.linestring(gid, pts)


def lattice_geometry(rng, gid, extent=None):
    if rng.random() < 0.5:
        return lattice_polygon(rng, gid, extent or 12)
    return lattice_line(rng, gid, extent or 14)


def random_dataset(rng, n, extent=60.0, max_size=8.0, tag=None, lines=0.4):
    """Float-coordinate mixed dataset as GeometryProfiles."""
    out = []
    for i in range(n):
        x0 = rng.uniform(0, extent)
        y0 = rng.uniform(0, extent)
        size = rng.uniform(0.5, max_size)
        if rng.random() < lines:
            pts = [(x0, y0)]
            for _ in range(rng.randrange(1, 4)):
                px, py = pts[-1]
                nxt = (px + rng.uniform(-size, size), py + rng.uniform(-size, size))
                if nxt != pts[-1]:
                    pts.append(nxt)
            if len(pts) < 2:
                pts.append((x0 + size, y0))
            g = Geometry.linestring(i, pts)
        else:
            w = rng.uniform(0.3, 1.0) * size
            h = rng.uniform(0.3, 1.0) * size
            g = Geometry.polygon(i, [[(x0, y0), (x0 + w, y0), (x0 + w, y0 + h),
                                      (x0, y0 + h), (x0, y0)]])
        uri = f"{tag}{i}" if tag else None
        out.append(GeometryProfile(g, uri))
    return out


@pytest.fixture
def rng():
    return random.Random(20240831)
