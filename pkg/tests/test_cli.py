import json

import numpy as np
import pytest

from gsample.cli import RunReport, default_seeds, main, read_seeds, write_output
from gsample.framework import Kind, SampleOutput
from gsample.graph import save_edge_list
from gsample.synthetic import power_law_graph, toy_graph


@pytest.fixture
def p3_file(edge_file):
    return edge_file(["0 1", "1 2"], "p3.el")


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.el"
    save_edge_list(toy_graph(), path)
    return path


def sample(*args):
    return main(["sample", *map(str, args)])


def report_of(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_p3_middle_seed_gives_two_edges(p3_file, tmp_path, capsys):
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("1\n")
    out = tmp_path / "out.txt"
    rc = sample("--graph", p3_file, "--algorithm", "neighbor-unbiased", "--instances", 1, "--depth", 1,
                "--neighbor-size", 2, "--seed", 42, "--seeds-file", seeds, "--output", out)
    assert rc == 0
    rep = report_of(capsys)
    assert rep["sampled_edges_total"] == 2
    assert sorted(out.read_text().splitlines()) == ["0 1 0 1", "0 1 2 1"]


def test_report_fields(toy_file, tmp_path, capsys):
    path = tmp_path / "r.json"
    rc = sample("--graph", toy_file, "--algorithm", "biased-rw", "--instances", 5, "--walk-length", 20,
                "--report", path, "--table")
    assert rc == 0
    captured = capsys.readouterr()
    rep = json.loads(captured.out)
    assert json.loads(path.read_text()) == rep
    assert rep["sampled_edges_total"] == sum(rep["per_instance_edges"]) == 100
    assert rep["seps"] == pytest.approx(rep["sampled_edges_total"] / rep["wall_time"])
    assert rep["transfer_count"] is None
    assert "SEPS" in captured.err


def test_line_counts_match_report(toy_file, tmp_path, capsys):
    outdir = tmp_path / "per"
    rc = sample("--graph", toy_file, "--algorithm", "mh-rw", "--instances", 6, "--walk-length", 30,
                "--output", outdir, "--output-format", "edge-list-per-instance", "--seed", 3)
    assert rc == 0
    rep = report_of(capsys)
    files = sorted(outdir.iterdir(), key=lambda p: int(p.stem))
    assert [p.stem for p in files] == [str(i) for i in range(6)]
    counts = [len(p.read_text().splitlines()) for p in files]
    assert counts == rep["per_instance_edges"]
    assert sum(counts) == rep["sampled_edges_total"]  # stays are not written


def test_identical_runs_are_byte_identical(toy_file, tmp_path, capsys):
    outs, reps = [], []
    for i in range(2):
        out = tmp_path / f"o{i}.txt"
        assert sample("--graph", toy_file, "--algorithm", "forest-fire", "--instances", 20, "--depth", 3,
                      "--ooc", "--partitions", 3, "--memory-budget", 2, "--seed", 9, "--output", out) == 0
        outs.append(out.read_bytes())
        reps.append(report_of(capsys))
    assert outs[0] == outs[1]
    for key in ("retries_total", "transfer_count", "per_instance_edges"):
        assert reps[0][key] == reps[1][key]


def test_ooc_matches_in_memory_via_cli(toy_file, tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    common = ["--graph", toy_file, "--algorithm", "neighbor-biased", "--instances", 30, "--seed", 5]
    assert sample(*common, "--output", a) == 0
    assert sample(*common, "--output", b, "--ooc", "--partitions", 4, "--workers", 3) == 0
    assert a.read_bytes() == b.read_bytes()
    assert report_of(capsys)["transfer_count"] >= 1


def test_params_and_multi_walkers(toy_file, capsys):
    assert sample("--graph", toy_file, "--algorithm", "node2vec", "--param", "p=0.5", "--param", "q=2",
                  "--walk-length", 10, "--instances", 3) == 0
    assert report_of(capsys)["sampled_edges_total"] == 30
    assert sample("--graph", toy_file, "--algorithm", "multi-rw", "--frontier-size", 3,
                  "--walk-length", 12, "--instances", 2) == 0
    assert report_of(capsys)["per_instance_edges"] == [12, 12]


def test_usage_errors(p3_file, tmp_path, capsys):
    assert sample("--graph", p3_file, "--algorithm", "nope") == 2
    assert sample("--graph", tmp_path / "missing.el", "--algorithm", "snowball") == 2
    assert sample("--graph", p3_file, "--algorithm", "node2vec", "--param", "r=1") == 2
    assert sample("--graph", p3_file, "--algorithm", "node2vec", "--param", "p") == 2
    assert sample("--graph", p3_file, "--algorithm", "snowball", "--bogus") == 2
    assert main([]) == 2


def test_runtime_errors(p3_file, edge_file, tmp_path, capsys):
    assert sample("--graph", p3_file, "--algorithm", "node2vec", "--param", "p=-1") == 1
    assert sample("--graph", p3_file, "--algorithm", "layer", "--ooc", "--partitions", 2) == 1
    bad = edge_file(["0 1", "oops"], "bad.el")
    assert sample("--graph", bad, "--algorithm", "snowball") == 1
    assert "line 2" in capsys.readouterr().err
    seeds = tmp_path / "s.txt"
    seeds.write_text("0\n")
    assert sample("--graph", p3_file, "--algorithm", "snowball", "--instances", 2, "--seeds-file", seeds) == 1


def test_convert_round_trip(toy_file, tmp_path, capsys):
    cache = tmp_path / "toy.bin"
    assert main(["convert", str(toy_file), str(cache), "--directed"]) == 0
    assert json.loads(capsys.readouterr().out) == {"vertices": 12, "edges": 28}
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert sample("--graph", toy_file, "--directed", "--algorithm", "snowball", "--output", a) == 0
    assert sample("--graph", cache, "--algorithm", "snowball", "--output", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_write_output_formats(tmp_path):
    out = SampleOutput(0, np.array([1, 2]), np.array([2, 2]), np.array([1, 2], np.int32),
                       np.array([Kind.EDGE, Kind.STAY], np.int8))
    write_output([out], tmp_path / "d", "edge-list-per-instance")
    assert (tmp_path / "d" / "0.txt").read_text() == "1 2 1\n"
    write_output([out], tmp_path / "t.txt", "single-file-tagged")
    assert (tmp_path / "t.txt").read_text() == "0 1 2 1\n"
    with pytest.raises(ValueError):
        write_output([out], tmp_path / "x", "csv")
    with pytest.raises(OSError):
        write_output([out], tmp_path / "no" / "such" / "file.txt", "single-file-tagged")


def test_default_seeds_skip_isolated_vertices():
    from gsample.graph import CsrGraph

    g = CsrGraph.from_edges([3], [4], vertex_count=6, directed=False)
    seeds = default_seeds(g, 1, 200)
    assert set(seeds) <= {3, 4}
    assert default_seeds(g, 1, 200) == seeds
    multi = default_seeds(power_law_graph(100, 400, seed=1), 2, 3, per_instance=4)
    assert all(len(s) == 4 for s in multi)


def test_read_seeds_multi_vertex(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("# walkers\n1 2 3\n4\n")
    seeds = read_seeds(path, 2)
    assert seeds[0].tolist() == [1, 2, 3] and seeds[1] == 4


def test_run_report_guards_zero_time():
    rep = RunReport.build("x", [], 0.0, 0, None)
    assert rep.wall_time > 0 and rep.seps == 0.0
