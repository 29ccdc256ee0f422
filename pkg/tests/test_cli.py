import json

import pytest

from hopse.aggregate import load_bundle
from hopse.cli import main
from hopse.complex import read_complex, write_complex
from hopse.io import read_encoding
from hopse.lifting import InputGraph, clique_lift, write_edge_list
from hopse.model import load_checkpoint

BOWTIE = InputGraph.from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "bowtie.txt"
    write_edge_list(BOWTIE, path)
    return path


def test_lift(graph_file, tmp_path, capsys):
    assert main(["lift", str(graph_file), "--mode", "clique"]) == 0
    cells = [ln for ln in capsys.readouterr().out.splitlines() if ln and not ln.startswith("#")]
    assert len(cells) == 5 + 6 + 2
    out = tmp_path / "c.txt"
    assert main(["lift", str(graph_file), "--mode", "cycle", "-o", str(out)]) == 0
    assert read_complex(out).n_cells(2) == 2


def test_expand(graph_file, tmp_path, capsys):
    out = tmp_path / "hasse"
    assert main(["expand", str(graph_file), "--nbhd", "Inc-1", "--out-dir", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(f"{s}.{ext}" for s in ("A_0_1", "I_0_to_1", "I_1_to_2") for ext in ("edges", "map"))
    assert "A_0,1\tnodes=5" in capsys.readouterr().out


def test_expand_complex_input(tmp_path):
    path = tmp_path / "c.txt"
    write_complex(clique_lift(BOWTIE), path)
    assert main(["expand", str(path), "--complex", "--nbhd", "A_1,2;I_2->1", "--out-dir", str(tmp_path / "h")]) == 0


def test_encode_single(graph_file, tmp_path):
    out = tmp_path / "b.hb"
    enc_dir = tmp_path / "enc"
    args = ["encode", str(graph_file), "--taxonomy", "Mix-2", "--pse", "rwse:K=4,lap:i=2", "--out", str(out)]
    assert main(args + ["--emit-encodings", str(enc_dir), "--format", "binary"]) == 0
    bundle = load_bundle(out)
    assert bundle.features[(1, "RWSE")].shape == (6, 8)
    files = list(enc_dir.iterdir())
    assert files and all(read_encoding(f).encoding.values.ndim == 2 for f in files)


def test_encode_many(graph_file, tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("nonsense\n")
    out = tmp_path / "many"
    assert main(["encode", str(graph_file), str(bad), "--out-dir", str(out)]) == 0
    assert "1/2 graphs encoded" in capsys.readouterr().out
    assert main(["encode", str(bad), "--out-dir", str(out)]) == 1


def test_encode_complex_input(tmp_path):
    path = tmp_path / "c.txt"
    write_complex(clique_lift(BOWTIE), path)
    assert main(["encode", str(path), "--complex", "--out-dir", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "c.hb").exists()


def test_encode_bad_config(graph_file, capsys):
    assert main(["encode", str(graph_file), "--taxonomy", "Adj-9", "--out", "x.hb"]) == 2
    assert main(["encode", str(graph_file), "--pse", "wavelet", "--out", "x.hb"]) == 2
    assert "error" in capsys.readouterr().err


def test_count_routes(capsys):
    assert main(["count-routes", "--max-rank", "2", "--enumerate"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[:4] == ["R\t2", "neighborhoods\t12", "minimal_routes\t6", "extended_routes\t54"]
    assert len(lines) == 4 + 6
    assert main(["count-routes", "--max-rank", "30", "--width", "64"]) == 1


def test_train_demo(tmp_path, capsys):
    ckpt = tmp_path / "m.ckpt"
    args = ["train-demo", "--task", "synth-2cell", "--epochs", "5", "--samples", "16", "--seed", "7"]
    assert main(args + ["--checkpoint", str(ckpt)]) == 0
    out = capsys.readouterr().out
    assert "train_accuracy" in out and "loss_first" in out
    assert load_checkpoint(ckpt).n_parameters > 0
    assert main(["train-demo", "--task", "other"]) == 2


def test_verify(capsys):
    assert main(["verify"]) == 2
    assert main(["verify", "--grad-check"]) == 0
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_bench(tmp_path, capsys):
    report = tmp_path / "bench.json"
    assert main(["bench", "--sizes", "12,24", "--reps", "5", "--json", str(report)]) == 0
    assert "slope" in capsys.readouterr().out
    assert len(json.loads(report.read_text())["medians"]) == 2


def test_missing_file(capsys):
    assert main(["lift", "/nonexistent/graph.txt"]) == 1
