import pytest

from geolink.batch import AlgorithmConfig, interlink
from geolink.errors import ConfigError, EmptyDataset
from geolink.parallel import (
    global_join,
    parallel_interlink,
    partition_datasets,
    split_budget,
)
from geolink.progressive import WeightingScheme

from conftest import random_dataset, square


def test_partition_fixture(fig_polygons):
    parts, fw, fh = partition_datasets(fig_polygons, [], macro=1)
    assert (fw, fh) == (6.0, 6.0)
    assert len(parts) == 4
    assert sum(1 for p in parts.values() if 0 in p.source_ids) == 4  # P1 everywhere
    assert sum(1 for p in parts.values() if 1 in p.source_ids) == 1  # P2 in one


def test_giant_geometry_in_every_partition(rng):
    src = [square(i, 5 * i, 5 * i, 3) for i in range(8)]
    big = square(99, 0, 0, 40)
    parts, _, _ = partition_datasets(src + [big], [], macro=2)
    assert all(99 in p.source_ids for p in parts.values())


def test_partition_empty_source():
    with pytest.raises(EmptyDataset):
        partition_datasets([], [], macro=2)


def test_pair_coresidency(rng):
    src = random_dataset(rng, 80, tag="s")
    tgt = random_dataset(rng, 80, tag="t")
    sgeoms = [p.geometry for p in src]
    tgeoms = [p.geometry for p in tgt]
    parts, _, _ = partition_datasets(sgeoms, tgeoms, macro=4)
    for s in sgeoms:
        for t in tgeoms:
            if s.mbr.intersects(t.mbr):
                assert any(
                    s.id in p.source_ids and t.id in p.target_ids
                    for p in parts.values()
                )


def test_global_join_drops_one_sided(fig_polygons, fig_lines):
    parts, _, _ = partition_datasets(fig_polygons, fig_lines, macro=1)
    lanes = global_join(parts, workers=2)
    kept = [pid for lane in lanes for pid in lane]
    for pid in kept:
        assert parts[pid].source_ids and parts[pid].target_ids


def test_global_join_round_robin():
    parts, _, _ = partition_datasets(
        [square(i, 20 * i, 0, 2) for i in range(4)],
        [square(i, 20 * i, 0, 2) for i in range(4)],
        macro=1,
    )
    lanes = global_join(parts, workers=2)
    assert len(lanes) == 2
    assert abs(len(lanes[0]) - len(lanes[1])) <= 1


def test_split_budget_proportional():
    assert split_budget(10, [30, 70]) == [3, 7]
    assert split_budget(10, [1, 1, 1]) == [4, 3, 3]
    assert sum(split_budget(97, [13, 7, 41, 3])) == 97
    assert split_budget(5, [0, 0]) == [0, 0]


def test_worker_counts_deterministic(rng):
    for _ in range(3):
        src = random_dataset(rng, rng.randrange(30, 120), tag="s")
        tgt = random_dataset(rng, rng.randrange(30, 120), tag="t")
        serial = interlink(src, tgt, "giant", AlgorithmConfig(auto_swap=False))
        for workers in (1, 2, 4, 8):
            par = parallel_interlink(src, tgt, workers=workers)
            assert par.linkset.triples == serial.linkset.triples
            assert par.linkset.verified_pairs == serial.linkset.verified_pairs


def test_macro_grid_size_invariant(rng):
    src = random_dataset(rng, 60, tag="s")
    tgt = random_dataset(rng, 60, tag="t")
    serial = interlink(src, tgt, "giant", AlgorithmConfig(auto_swap=False))
    for macro in (1, 4, 16):
        par = parallel_interlink(src, tgt, workers=3, macro=macro)
        assert par.linkset.triples == serial.linkset.triples


def test_progressive_budget_conserved(rng):
    src = random_dataset(rng, 80, tag="s")
    tgt = random_dataset(rng, 80, tag="t")
    res = parallel_interlink(src, tgt, workers=2, mode="progressive", budget=30)
    assert sum(res.budgets) <= 30
    assert len(res.trace) <= 30


def test_progressive_full_budget_matches_batch(rng):
    src = random_dataset(rng, 60, tag="s")
    tgt = random_dataset(rng, 60, tag="t")
    serial = interlink(src, tgt, "giant", AlgorithmConfig(auto_swap=False))
    for algorithm in ("pg", "dpg", "lpg", "gog", "ipg", "pradon"):
        res = parallel_interlink(src, tgt, workers=4, mode="progressive",
                                 budget=10**6, scheme=WeightingScheme("js"),
                                 algorithm=algorithm)
        assert res.linkset.triples == serial.linkset.triples, algorithm
        assert res.linkset.verified_pairs == serial.linkset.verified_pairs, algorithm


def test_batch_parallel_matches_serial_at_scale(rng):
    # the 500x500 determinism check
    src = random_dataset(rng, 500, extent=180.0, tag="s")
    tgt = random_dataset(rng, 500, extent=180.0, tag="t")
    serial = interlink(src, tgt, "giant", AlgorithmConfig(auto_swap=False))
    par = parallel_interlink(src, tgt, workers=4)
    assert par.linkset.triples == serial.linkset.triples
    assert par.linkset.verified_pairs == serial.linkset.verified_pairs


def test_config_validation(rng):
    src = random_dataset(rng, 5, tag="s")
    with pytest.raises(ConfigError):
        parallel_interlink(src, src, workers=0)
    with pytest.raises(ConfigError):
        parallel_interlink(src, src, mode="progressive")  # missing budget
    with pytest.raises(ConfigError):
        parallel_interlink(src, src, mode="sideways")


def test_skew_reported(rng):
    src = random_dataset(rng, 60, tag="s")
    tgt = random_dataset(rng, 60, tag="t")
    res = parallel_interlink(src, tgt, workers=2)
    assert res.skew[0] >= res.skew[1] >= 0
    assert res.unit_count >= 1
