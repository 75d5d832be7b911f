import json

import pytest

from geolink.batch import AlgorithmConfig, interlink
from geolink.errors import CapExceeded, ConfigError
from geolink.workbench import (
    ALGORITHM_DOCS,
    benchmark_kernels,
    brute_force_oracle,
    format_report_table,
    grid_search,
    inspect_algorithm,
    run_benchmark,
    synth_generate,
    synth_profiles,
)

from conftest import EXPECTED_TEN_TRIPLES, random_dataset


def synth_pair(profile, n, seed, **kw):
    src = synth_profiles(profile, n, seed=seed * 2 + 1, tag="s", centers_seed=seed, **kw)
    tgt = synth_profiles(profile, n, seed=seed * 2 + 2, tag="t", centers_seed=seed, **kw)
    return src, tgt


def test_oracle_fixture(mixed_fixture):
    source, target = mixed_fixture
    assert brute_force_oracle(source, target).triples == EXPECTED_TEN_TRIPLES


def test_oracle_empty_source(mixed_fixture):
    _, target = mixed_fixture
    assert len(brute_force_oracle([], target)) == 0


def test_oracle_transpose(mixed_fixture):
    source, target = mixed_fixture
    fwd = brute_force_oracle(source, target)
    rev = brute_force_oracle(target, source)
    inverse = {"contains": "within", "within": "contains",
               "covers": "coveredBy", "coveredBy": "covers"}
    assert {(t, inverse.get(r, r), s) for s, r, t in fwd.triples} == rev.triples


def test_oracle_cap(rng):
    src = random_dataset(rng, 40, tag="s")
    with pytest.raises(CapExceeded):
        brute_force_oracle(src, src, cap=100)


def test_docs_cover_every_algorithm():
    from geolink.batch import ALGORITHMS as BATCH
    from geolink.progressive import ALGORITHMS as PROG

    for name in list(BATCH) + list(PROG):
        doc = inspect_algorithm(name)
        assert doc.summary
    with pytest.raises(ConfigError):
        inspect_algorithm("linear-scan")


def test_doc_configuration_snapshot():
    doc = inspect_algorithm("crtree")
    config = doc.configuration({"quant_bits": 16})
    assert config["quant_bits"] == 16
    assert config["node_capacity"] == 16


def test_benchmark_rows_and_equality_flag(rng):
    src = random_dataset(rng, 50, tag="s")
    tgt = random_dataset(rng, 50, tag="t")
    report = run_benchmark(src, tgt, ["giant", "radon", "stripe-sweep"], repetitions=2)
    assert len(report.rows) == 3
    assert all(row.linkset_equal for row in report.rows)
    assert all(row.error is None for row in report.rows)


def test_benchmark_continues_after_failure(rng):
    src = random_dataset(rng, 20, tag="s")
    tgt = random_dataset(rng, 20, tag="t")
    report = run_benchmark(src, tgt, ["static-radon", "giant"])  # missing tile dims fails
    assert report.rows[0].error is not None
    assert report.rows[1].error is None


def test_benchmark_progressive_budget_rows(rng):
    src = random_dataset(rng, 40, tag="s")
    tgt = random_dataset(rng, 40, tag="t")
    report = run_benchmark(src, tgt, ["pg"], budgets=[5, 10, 15])
    assert len(report.rows) == 3
    assert all(row.pgr is not None for row in report.rows)


def test_report_roundtrip_and_table(rng):
    src = random_dataset(rng, 30, tag="s")
    tgt = random_dataset(rng, 30, tag="t")
    report = run_benchmark(src, tgt, ["giant"])
    doc = report.to_dict()
    assert doc["schema_version"] == 1
    table = format_report_table(doc)
    assert "giant" in table
    json.dumps(doc)  # serializable


def test_grid_search_min_runtime(rng):
    src = random_dataset(rng, 40, tag="s")
    tgt = random_dataset(rng, 40, tag="t")
    result = grid_search("rtree", src, tgt)
    assert result["best"]["params"]["node_capacity"] in {4, 8, 16, 64, 256}
    assert len(result["trials"]) == 5


def test_grid_search_max_pgr(rng):
    src = random_dataset(rng, 40, tag="s")
    tgt = random_dataset(rng, 40, tag="t")
    result = grid_search("pg", src, tgt, objective="max_pgr", budget=20)
    assert result["best"]["params"]["scheme"] in {"cf", "js", "x2", "mbro", "isp"}
    best_score = result["best"]["score"]
    assert all(t.get("score", 0) <= best_score for t in result["trials"])


def test_kernel_comparison_agrees(rng):
    src = random_dataset(rng, 40, tag="s")
    tgt = random_dataset(rng, 40, tag="t")
    out = benchmark_kernels(src, tgt)
    assert out["agree"]
    assert out["pairs"] > 0
    assert out["compiled_ms"] >= 0.0


def test_synth_seed_stability(tmp_path):
    a = synth_profiles("uniform", 50, seed=9)
    b = synth_profiles("uniform", 50, seed=9)
    assert all(x.geometry.curves() == y.geometry.curves() for x, y in zip(a, b))
    d1 = tmp_path / "one"
    d2 = tmp_path / "two"
    s1, t1 = synth_generate("clustered", 40, 40, 3, d1)
    s2, t2 = synth_generate("clustered", 40, 40, 3, d2)
    assert s1.read_bytes() == s2.read_bytes()
    assert t1.read_bytes() == t2.read_bytes()


def test_synth_unknown_profile():
    with pytest.raises(ConfigError):
        synth_profiles("banana", 10, seed=0)


def test_clustered_density_exceeds_uniform():
    total_c = total_u = 0
    for seed in (5, 9):
        cs, ct = synth_pair("clustered", 150, seed)
        us, ut = synth_pair("uniform", 150, seed)
        total_c += brute_force_oracle(cs, ct).related_pairs
        total_u += brute_force_oracle(us, ut).related_pairs
    assert total_c >= 5 * max(1, total_u)


def test_synth_files_loadable(tmp_path):
    from geolink.dataio import DatasetDescriptor, read_dataset

    spath, tpath = synth_generate("skewed", 30, 25, 11, tmp_path)
    src, skips = read_dataset(DatasetDescriptor(str(spath)))
    tgt, _ = read_dataset(DatasetDescriptor(str(tpath)))
    assert len(src) == 30 and len(tgt) == 25
    assert skips.total == 0
    result = interlink(src, tgt, "giant", AlgorithmConfig(auto_swap=False))
    assert result.linkset.triples == brute_force_oracle(src, tgt).triples
