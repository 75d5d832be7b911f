import random

import pytest

from geolink.errors import EmptyDataset
from geolink.geometry import Geometry, mbr_intersects
from geolink.grid import (
    BOTH_DATASETS,
    SOURCE_ONLY,
    TileSpan,
    build_index,
    dynamic_granularity,
    radon_join,
    reference_point_owner,
    tiles_for,
)

from conftest import lattice_geometry, square


def test_dynamic_granularity_source_only(fig_polygons):
    assert dynamic_granularity(fig_polygons) == (6.0, 6.0)


def test_dynamic_granularity_single():
    g = square(0, 0, 0, 4)
    assert dynamic_granularity([g]) == (4.0, 4.0)


def test_dynamic_granularity_both_datasets(fig_polygons, fig_lines):
    assert dynamic_granularity(fig_polygons, fig_lines) == (4.25, 5.0)


def test_dynamic_granularity_empty():
    with pytest.raises(EmptyDataset):
        dynamic_granularity([])


def test_degenerate_granularity_fallbacks():
    horizontal = Geometry.linestring(0, [(0, 5), (4, 5)])  # height 0
    w, h = dynamic_granularity([horizontal])
    assert w == 4.0 and h == 4.0  # zero mean height falls back to the width mean
    vertical = Geometry.linestring(1, [(2, 0), (2, 3)])  # width 0
    w, h = dynamic_granularity([vertical])
    assert w == 3.0 and h == 3.0


def test_tiles_for_spans(fig_polygons, l3):
    grid = build_index(fig_polygons, SOURCE_ONLY)
    assert tiles_for(fig_polygons[0].mbr, grid) == TileSpan(0, 1, 0, 1)
    assert tiles_for(fig_polygons[1].mbr, grid) == TileSpan(0, 0, 0, 0)
    assert tiles_for(l3.mbr, grid) == TileSpan(1, 2, 0, 0)


def test_negative_coordinates_floor():
    g = square(0, -7, -7, 2)
    grid = build_index([g], SOURCE_ONLY, tile_width=6.0, tile_height=6.0)
    span = tiles_for(g.mbr, grid)
    assert span == TileSpan(-2, -1, -2, -1)


def test_build_index_cells(fig_polygons):
    grid = build_index(fig_polygons, SOURCE_ONLY)
    assert grid.source_cells == {
        (0, 0): [0, 1],
        (1, 0): [0],
        (0, 1): [0],
        (1, 1): [0],
    }


def test_static_coarse_grid(fig_polygons):
    grid = build_index(fig_polygons, SOURCE_ONLY, tile_width=100.0, tile_height=100.0)
    assert grid.source_cells == {(0, 0): [0, 1]}


def test_candidates(fig_polygons, l3):
    grid = build_index(fig_polygons, SOURCE_ONLY)
    assert grid.candidates_for(l3) == [0]
    far = square(5, 50, 50, 10)
    assert grid.candidates_for(far) == []
    clone = square(6, 0, 0, 10)
    assert grid.candidates_for(clone) == [0, 1]


def test_reference_point_owner(fig_polygons):
    grid = build_index(fig_polygons, SOURCE_ONLY)
    p1, p2 = fig_polygons
    assert reference_point_owner(p1.mbr, p2.mbr, grid) == (0, 0)
    assert reference_point_owner(p1.mbr, p1.mbr, grid) == (0, 1)


def test_reference_point_symmetric(rng):
    grid = build_index([square(0, 0, 0, 5)], SOURCE_ONLY, tile_width=3.0, tile_height=2.0)
    for _ in range(200):
        a = lattice_geometry(rng, 0).mbr
        b = lattice_geometry(rng, 1).mbr
        if mbr_intersects(a, b):
            assert reference_point_owner(a, b, grid) == reference_point_owner(b, a, grid)


def test_radon_join_fixture(fig_polygons, fig_lines):
    pairs = sorted(radon_join(fig_polygons, fig_lines))
    oracle = sorted(
        (s.id, t.id)
        for s in fig_polygons for t in fig_lines
        if mbr_intersects(s.mbr, t.mbr)
    )
    assert pairs == oracle == [(0, 0)]


def test_radon_join_disjoint_datasets():
    src = [square(0, 0, 0, 1)]
    tgt = [square(0, 50, 50, 1)]
    assert list(radon_join(src, tgt)) == []


def test_radon_join_empty_raises(fig_polygons):
    with pytest.raises(EmptyDataset):
        list(radon_join(fig_polygons, []))


def _random_sets(rng, n_max=120):
    ns = rng.randrange(3, n_max)
    nt = rng.randrange(3, n_max)
    src = [lattice_geometry(rng, i) for i in range(ns)]
    tgt = [lattice_geometry(rng, i) for i in range(nt)]
    return src, tgt


def test_radon_join_completeness_and_dedup(rng):
    for _ in range(15):
        src, tgt = _random_sets(rng)
        pairs = list(radon_join(src, tgt))
        assert len(pairs) == len(set(pairs))
        oracle = {(s.id, t.id) for s in src for t in tgt if mbr_intersects(s.mbr, t.mbr)}
        assert set(pairs) == oracle


def test_radon_join_completeness_at_scale(rng):
    # one instance at the property's 500x500 cap
    src = [lattice_geometry(rng, i, extent=160) for i in range(500)]
    tgt = [lattice_geometry(rng, i, extent=160) for i in range(500)]
    pairs = list(radon_join(src, tgt))
    assert len(pairs) == len(set(pairs))
    oracle = {(s.id, t.id) for s in src for t in tgt if mbr_intersects(s.mbr, t.mbr)}
    assert set(pairs) == oracle


def test_static_granularity_same_pairs(rng):
    for _ in range(6):
        src, tgt = _random_sets(rng, 60)
        dynamic = set(radon_join(src, tgt))
        for wh in (0.7, 3.0, 25.0):
            assert set(radon_join(src, tgt, wh, wh)) == dynamic


def test_candidates_match_oracle(rng):
    for _ in range(10):
        src, tgt = _random_sets(rng, 80)
        grid = build_index(src, SOURCE_ONLY)
        for t in tgt:
            expected = sorted(s.id for s in src if mbr_intersects(s.mbr, t.mbr))
            assert grid.candidates_for(t) == expected


def test_both_datasets_mode_colocates(fig_polygons, fig_lines):
    grid = build_index(fig_polygons, BOTH_DATASETS, fig_lines)
    for t in fig_lines:
        span = grid.span_of(t.mbr)
        for tile in span.tiles():
            assert t.id in grid.target_cells.get(tile, [])


def test_tilespan_overlap_count():
    a = TileSpan(0, 3, 0, 3)
    b = TileSpan(2, 5, 1, 2)
    assert a.overlap_count(b) == 2 * 2
    assert a.overlap_count(TileSpan(9, 10, 9, 10)) == 0
    assert a.count == 16
