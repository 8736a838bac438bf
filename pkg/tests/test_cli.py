from __future__ import annotations

import json
import subprocess
import sys

import pytest

from wcsd.cli import main


@pytest.fixture
def built(tmp_path, gstar_file):
    idx = tmp_path / "g.wcx"
    assert main(["build", "--graph", str(gstar_file), "--order", "identity", "--mode",
                 "wc-path", "--out", str(idx)]) == 0
    return gstar_file, idx


def test_query_single_and_path(built, capsys):
    g, idx = built
    capsys.readouterr()
    assert main(["query", "--index", str(idx), "--s", "2", "--t", "5", "--w", "2"]) == 0
    assert main(["query", "--index", str(idx), "--s", "0", "--t", "5", "--w", "9"]) == 0
    assert main(["query", "--index", str(idx), "--s", "2", "--t", "5", "--w", "2",
                 "--path"]) == 0
    assert capsys.readouterr().out.split("\n")[:3] == ["2", "INF", "2 3 5"]


def test_query_batch(built, tmp_path, capsys):
    g, idx = built
    batch = tmp_path / "q.txt"
    batch.write_text("# s t w\n0 4 3\n3 3 inf\n0 5 6\n")
    capsys.readouterr()
    assert main(["query", "--index", str(idx), "--batch", str(batch), "--graph", str(g)]) == 0
    assert capsys.readouterr().out.split() == ["4", "0", "INF"]


def test_query_against_wrong_graph(built, tmp_path, capsys):
    _, idx = built
    other = tmp_path / "o.txt"
    other.write_text("0 1 1\n")
    assert main(["query", "--index", str(idx), "--s", "0", "--t", "1", "--w", "1",
                 "--graph", str(other)]) == 2
    assert "different graph" in capsys.readouterr().err


def test_usage_errors(built, tmp_path):
    _, idx = built
    assert main(["query", "--index", str(idx)]) == 2
    assert main(["build"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["query", "--index", str(tmp_path / "missing.wcx"), "--s", "0", "--t", "0",
                 "--w", "1"]) == 2


def test_validate_exit_codes(tmp_path, gstar_file, capsys):
    wc = tmp_path / "wc.wcx"
    nv = tmp_path / "nv.wcx"
    main(["build", "--graph", str(gstar_file), "--out", str(wc)])
    main(["build", "--graph", str(gstar_file), "--mode", "naive", "--out", str(nv)])
    rep = tmp_path / "rep.json"
    assert main(["validate", "--graph", str(gstar_file), "--index", str(wc), "--json",
                 str(rep)]) == 0
    assert [r["violations"] for r in json.loads(rep.read_text())] == [0, 0, 0]
    assert main(["validate", "--graph", str(gstar_file), "--index", str(nv), "--mode",
                 "minimal"]) == 1
    assert "redundant" in capsys.readouterr().out


def test_gen_order_build_with_order_file(tmp_path, capsys):
    g = tmp_path / "r.txt"
    o = tmp_path / "r.ord"
    assert main(["gen", "--n", "40", "--m", "80", "--k", "3", "--seed", "5", "--connected",
                 "--out", str(g)]) == 0
    assert main(["order", "--graph", str(g), "--strategy", "hybrid", "--out", str(o)]) == 0
    assert len(o.read_text().split()) == 40
    idx = tmp_path / "r.wcx"
    assert main(["build", "--graph", str(g), "--order", str(o), "--prune", "naive",
                 "--out", str(idx)]) == 0
    assert main(["validate", "--graph", str(g), "--index", str(idx)]) == 0


def test_directed_build(tmp_path, capsys):
    g = tmp_path / "d.txt"
    g.write_text("0 1 1\n1 0 2\n")
    idx = tmp_path / "d.wcx"
    assert main(["build", "--graph", str(g), "--directed", "--out", str(idx)]) == 2
    assert main(["build", "--graph", str(g), "--directed", "--mode", "wc-directed",
                 "--out", str(idx)]) == 0
    capsys.readouterr()
    main(["query", "--index", str(idx), "--s", "0", "--t", "1", "--w", "2"])
    main(["query", "--index", str(idx), "--s", "1", "--t", "0", "--w", "2"])
    assert capsys.readouterr().out.split() == ["INF", "1"]


def test_memory_cap_exit(tmp_path, gstar_file, capsys):
    assert main(["build", "--graph", str(gstar_file), "--mode", "naive", "--mem-cap", "64",
                 "--out", str(tmp_path / "x.wcx")]) == 2
    assert "cap" in capsys.readouterr().err


def test_convert(tmp_path, gstar_file, built):
    _, idx = built
    gr = tmp_path / "g.gr"
    back = tmp_path / "g2.txt"
    assert main(["convert", "--in", str(gstar_file), "--to", "dimacs", "--out", str(gr)]) == 0
    assert gr.read_text().startswith("p sp 6 16")
    assert main(["convert", "--in", str(gr), "--from", "dimacs", "--to", "edges",
                 "--out", str(back)]) == 0
    labels = tmp_path / "l.txt"
    assert main(["convert", "--in", str(idx), "--from", "index", "--to", "labels",
                 "--out", str(labels)]) == 0
    assert labels.read_text().splitlines()[1] == "1: (0,1,3) (1,0,inf)"


def test_bench_command(tmp_path, gstar_file, capsys):
    out = tmp_path / "b"
    assert main(["bench", "--graph", str(gstar_file), "--count", "200", "--out",
                 str(out)]) == 0
    text = capsys.readouterr().out
    assert "wcindex+" in text and (tmp_path / "b.csv").exists()
    assert main(["bench", "--gen", "30", "50", "2", "--algorithms", "cbfs,wcindex",
                 "--count", "50", "--no-per-query"]) == 0
    assert main(["bench", "--gen", "30", "50", "2", "--algorithms", "astar"]) == 2


def test_module_entry_point(gstar_file):
    res = subprocess.run([sys.executable, "-m", "wcsd", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "validate" in res.stdout
