import shutil
import subprocess
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from gbct.cli import main
from gbct.dataset import generate, load_labels_csv, save_csv


def _kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines() if "=" in line)


@pytest.fixture
def moons_csv(tmp_path):
    p = tmp_path / "moons.csv"
    assert main(["gen", "--shape", "moons", "--n", "1000", "--jitter", "0.05", "--seed", "0",
                 "--output", str(p)]) == 0
    return p


def test_gen_writes_labeled_csv(moons_csv, capsys):
    rows = moons_csv.read_text().splitlines()
    assert len(rows) == 1000
    assert all(len(r.split(",")) == 3 for r in rows)
    assert {r.split(",")[2] for r in rows} == {"0", "1"}


def test_gen_then_eval_against_itself(moons_csv, capsys):
    capsys.readouterr()
    assert main(["eval", "--pred", str(moons_csv), "--truth", str(moons_csv)]) == 0
    assert capsys.readouterr().out.splitlines() == ["ACC 1.000000", "NMI 1.000000"]


def test_fit_k2_on_moons(moons_csv, tmp_path, capsys):
    out = tmp_path / "labels.csv"
    capsys.readouterr()
    assert main(["fit", "--input", str(moons_csv), "--label-col", "-1", "--k", "2",
                 "--output", str(out)]) == 0
    labels = load_labels_csv(out)
    assert len(labels) == 1000
    assert set(labels.tolist()) == {0, 1}
    kv = _kv(capsys.readouterr().out)
    assert kv["k"] == "2"
    assert int(kv["m"]) > 2
    for key in ("split_ms", "merge_ms", "total_ms"):
        assert float(kv[key]) >= 0
    capsys.readouterr()
    assert main(["eval", "--pred", str(out), "--truth", str(moons_csv)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "ACC 1.000000"


def test_fit_is_byte_identical_across_runs(moons_csv, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["fit", "--input", str(moons_csv), "--label-col", "-1", "--k", "2",
                     "--seed", "7", "--output", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fit_adaptive_three_blobs(tmp_path, capsys):
    data = tmp_path / "blobs.csv"
    ds = generate("blobs", 600, {"centers": [[0, 0], [20, 0], [10, 17]], "std": 1.0}, seed=1)
    save_csv(data, ds)
    out = tmp_path / "labels.csv"
    capsys.readouterr()
    assert main(["fit", "--input", str(data), "--label-col", "-1", "--adaptive",
                 "--output", str(out)]) == 0
    kv = _kv(capsys.readouterr().out)
    assert kv["k"] == "3"
    assert kv["knee"] == "yes"


def test_fit_trace_out(moons_csv, tmp_path):
    trace = tmp_path / "trace.csv"
    assert main(["fit", "--input", str(moons_csv), "--label-col", "-1", "--k", "2",
                 "--output", str(tmp_path / "l.csv"), "--trace-out", str(trace)]) == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "round_index,merges_applied,min_merge_distance"
    assert [int(l.split(",")[0]) for l in lines[1:]] == list(range(1, len(lines)))


def test_fit_flags_accepted(moons_csv, tmp_path):
    assert main(["fit", "--input", str(moons_csv), "--label-col", "2", "--k", "2",
                 "--threshold", "0.75", "--split-policy", "consistent", "--noise-factor", "0.1",
                 "--standardize", "--density-average", "geometric",
                 "--output", str(tmp_path / "l.csv")]) == 0


def test_fit_missing_input_exit_1(tmp_path, capsys):
    rc = main(["fit", "--input", str(tmp_path / "nope.csv"), "--k", "2", "--output", str(tmp_path / "o.csv")])
    assert rc == 1
    err = capsys.readouterr()
    assert "nope.csv" in err.err and err.out == ""


def test_fit_parse_error_exit_1(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,x\n")
    assert main(["fit", "--input", str(p), "--k", "1", "--output", str(tmp_path / "o.csv")]) == 1


def test_fit_k_unreachable_exit_2(moons_csv, tmp_path, capsys):
    rc = main(["fit", "--input", str(moons_csv), "--label-col", "-1", "--k", "900",
               "--output", str(tmp_path / "o.csv")])
    assert rc == 2
    assert capsys.readouterr().err


def test_fit_degenerate_input_exit_2(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("1,1\n")
    assert main(["fit", "--input", str(p), "--k", "1", "--output", str(tmp_path / "o.csv")]) == 2


def test_eval_length_mismatch_exit_1(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("0\n1\n")
    b.write_text("0\n1\n1\n")
    assert main(["eval", "--pred", str(a), "--truth", str(b)]) == 1


def test_eval_label_col(tmp_path, capsys):
    pred, truth = tmp_path / "p.csv", tmp_path / "t.csv"
    pred.write_text("1\n1\n0\n0\n")
    truth.write_text("0,0.5,9\n0,0.5,9\n1,0.5,9\n1,0.5,9\n")
    assert main(["eval", "--pred", str(pred), "--truth", str(truth), "--label-col", "0"]) == 0
    assert capsys.readouterr().out.splitlines() == ["ACC 1.000000", "NMI 1.000000"]


def test_plot_three_points(tmp_path):
    data, svg = tmp_path / "three.csv", tmp_path / "three.svg"
    data.write_text("0,0,0\n1,1,1\n2,0,1\n")
    assert main(["plot", "--input", str(data), "--label-col", "2", "--output", str(svg)]) == 0
    root = ET.parse(svg).getroot()
    circles = [e for e in root.iter() if e.tag.endswith("circle")]
    assert len([c for c in circles if c.get("class") == "point"]) == 3
    fills = {c.get("fill") for c in circles}
    assert len(fills) == 2


def test_plot_with_ball_overlay(moons_csv, tmp_path, capsys):
    svg = tmp_path / "m.svg"
    capsys.readouterr()
    assert main(["plot", "--input", str(moons_csv), "--label-col", "-1", "--balls",
                 "--output", str(svg)]) == 0
    kv = _kv(capsys.readouterr().out)
    root = ET.parse(svg).getroot()
    classes = [e.get("class") for e in root.iter() if e.tag.endswith("circle")]
    assert classes.count("point") == 1000
    assert classes.count("ball") == int(kv["balls"]) > 0


def test_plot_high_dimension_needs_dims(tmp_path):
    data = tmp_path / "d3.csv"
    save_csv(data, generate("blobs", 60, {"dim": 3}, seed=0))
    svg = tmp_path / "o.svg"
    assert main(["plot", "--input", str(data), "--label-col", "-1", "--output", str(svg)]) == 2
    assert main(["plot", "--input", str(data), "--label-col", "-1", "--dims", "0,2",
                 "--output", str(svg)]) == 0
    assert main(["plot", "--input", str(data), "--label-col", "-1", "--dims", "0,5",
                 "--output", str(svg)]) == 2


def test_plot_with_label_file(tmp_path):
    data, labels, svg = tmp_path / "d.csv", tmp_path / "l.csv", tmp_path / "o.svg"
    data.write_text("0,0\n1,1\n")
    labels.write_text("0\n1\n")
    assert main(["plot", "--input", str(data), "--labels", str(labels), "--output", str(svg)]) == 0
    labels.write_text("0\n")
    assert main(["plot", "--input", str(data), "--labels", str(labels), "--output", str(svg)]) == 1


def test_bench_csv(capsys):
    assert main(["bench", "--sizes", "300,600", "--repeats", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,m,split_ms,merge_ms,total_ms"
    rows = [l.split(",") for l in lines[1:]]
    assert [r[0] for r in rows] == ["300", "600"]
    assert all(float(v) >= 0 for r in rows for v in r[2:])


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--input", "x.csv"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["fit", "--input", "x", "--output", "y", "--k", "2", "--adaptive"])


@pytest.mark.skipif(shutil.which("gbct") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = tmp_path / "d.csv"
    proc = subprocess.run(["gbct", "gen", "--shape", "circles", "--n", "100", "--output", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert np.loadtxt(out, delimiter=",").shape == (100, 3)
