import json

import pytest

from geolink.cli import main

from conftest import EXPECTED_TEN_TRIPLES


@pytest.fixture
def fixture_files(tmp_path):
    spath = tmp_path / "source.tsv"
    tpath = tmp_path / "target.tsv"
    spath.write_text(
        "P2\tPOLYGON((2 2,4 2,4 4,2 4,2 2))\nL3\tLINESTRING(10 5,15 5)\n", encoding="utf-8"
    )
    tpath.write_text(
        "P1\tPOLYGON((0 0,10 0,10 10,0 10,0 0))\nL4\tLINESTRING(12 0,12 8)\n", encoding="utf-8"
    )
    return spath, tpath


def test_interlink_writes_links_and_report(fixture_files, tmp_path, capsys):
    spath, tpath = fixture_files
    links = tmp_path / "links.tsv"
    report = tmp_path / "report.json"
    code = main([
        "interlink", "--source", str(spath), "--target", str(tpath),
        "--algorithm", "giant", "--no-swap",
        "--output", str(links), "--report", str(report),
    ])
    assert code == 0
    lines = links.read_text().strip().split("\n")
    assert len(lines) == 10
    triples = {tuple(line.split("\t")) for line in lines}
    assert triples == EXPECTED_TEN_TRIPLES
    doc = json.loads(report.read_text())
    assert doc["algorithm"] == "giant"
    assert doc["verified"] == 3
    assert doc["per_relation_counts"]["intersects"] == 4


def test_every_batch_algorithm_runs(fixture_files, tmp_path):
    spath, tpath = fixture_files
    for algorithm in ("radon", "plane-sweep", "pbsm", "stripe-sweep", "rtree", "quadtree", "crtree"):
        out = tmp_path / f"{algorithm}.tsv"
        code = main([
            "interlink", "--source", str(spath), "--target", str(tpath),
            "--algorithm", algorithm, "--no-swap", "--output", str(out),
        ])
        assert code == 0
        assert len(out.read_text().strip().split("\n")) == 10


def test_static_variant_flags(fixture_files, tmp_path):
    spath, tpath = fixture_files
    out = tmp_path / "static.tsv"
    code = main([
        "interlink", "--source", str(spath), "--target", str(tpath),
        "--algorithm", "static-giant", "--tile-width", "6", "--tile-height", "6",
        "--no-swap", "--output", str(out),
    ])
    assert code == 0
    assert len(out.read_text().strip().split("\n")) == 10


def test_static_without_dims_is_config_error(fixture_files):
    spath, tpath = fixture_files
    code = main([
        "interlink", "--source", str(spath), "--target", str(tpath),
        "--algorithm", "static-giant",
    ])
    assert code == 2


def test_missing_file_is_run_error(tmp_path):
    code = main([
        "interlink", "--source", str(tmp_path / "none.tsv"), "--target", str(tmp_path / "none2.tsv"),
    ])
    assert code == 1


def test_progressive_trace(fixture_files, tmp_path):
    spath, tpath = fixture_files
    trace = tmp_path / "trace.tsv"
    code = main([
        "progressive", "--source", str(spath), "--target", str(tpath),
        "--budget", "3", "--algorithm", "pg", "--scheme", "js",
        "--secondary-scheme", "mbro", "--no-swap", "--trace", str(trace),
    ])
    assert code == 0
    rows = [line.split("\t") for line in trace.read_text().strip().split("\n")]
    assert len(rows) == 3
    assert [r[0] for r in rows] == ["1", "2", "3"]
    assert all(r[3] in ("0", "1") for r in rows)


def test_parallel_command(fixture_files, tmp_path):
    spath, tpath = fixture_files
    out = tmp_path / "par.tsv"
    code = main([
        "parallel", "--source", str(spath), "--target", str(tpath),
        "--workers", "2", "--output", str(out),
    ])
    assert code == 0
    assert len(out.read_text().strip().split("\n")) == 10


def test_bench_with_kernel_comparison(fixture_files, tmp_path, capsys):
    spath, tpath = fixture_files
    report = tmp_path / "bench.json"
    code = main([
        "bench", "--source", str(spath), "--target", str(tpath),
        "--algorithms", "giant", "radon", "pg", "--budgets", "2",
        "--compare-kernels", "--report", str(report),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "giant" in out and "kernel:" in out
    doc = json.loads(report.read_text())
    assert doc["kernel_comparison"]["agree"] is True


def test_synth_and_report_roundtrip(tmp_path, capsys):
    code = main([
        "synth", "--profile", "uniform", "--source-count", "20",
        "--target-count", "20", "--seed", "3", "--out-dir", str(tmp_path / "synth"),
    ])
    assert code == 0
    spath = tmp_path / "synth" / "source.tsv"
    assert spath.exists()
    report = tmp_path / "r.json"
    code = main([
        "bench", "--source", str(spath), "--target", str(tmp_path / "synth" / "target.tsv"),
        "--algorithms", "giant", "--report", str(report),
    ])
    assert code == 0
    code = main(["report", "--input", str(report), "--format", "table"])
    assert code == 0
    assert "giant" in capsys.readouterr().out


def test_grid_search_command(fixture_files, capsys):
    spath, tpath = fixture_files
    code = main([
        "grid-search", "--source", str(spath), "--target", str(tpath),
        "--algorithm", "quadtree",
    ])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert "params" in doc


def test_inspect_lists_all(capsys):
    assert main(["inspect"]) == 0
    out = capsys.readouterr().out
    for name in ("radon", "giant", "crtree", "pg", "pradon"):
        assert name in out
    assert main(["inspect", "stripe-sweep"]) == 0
    assert "stripe" in capsys.readouterr().out
