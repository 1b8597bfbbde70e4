import json

import numpy as np
import pytest

from lincfa.cli import main
from lincfa.io import load_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def status_line(stdout):
    return stdout.strip().splitlines()[-1]


def write_csv(path, header, rows):
    path.write_text(",".join(header) + "\n" + "\n".join(",".join(repr(float(v)) for v in r) for r in rows) + "\n")


def test_synth_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "synth", "--scenario", "ddim", "--D", "12", "--n", "60", "--sigma", "10", "--seed", "3", "--output", str(a))[0] == 0
    assert run(capsys, "synth", "--scenario", "ddim", "--D", "12", "--n", "60", "--sigma", "10", "--seed", "3", "--output", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    truth = json.loads((tmp_path / "a.truth.json").read_text())
    assert len(truth["weights"]) == 12 and truth["sigma2"] == 100.0


def test_reduce_duplicate_columns(tmp_path, capsys):
    rng = np.random.default_rng(0)
    x = rng.normal(size=60)
    y = x + 0.1 * rng.normal(size=60)
    src = tmp_path / "dup.csv"
    write_csv(src, ["a", "b", "y"], np.column_stack([x, x, y]))
    before = src.read_bytes()
    out = tmp_path / "red.csv"
    code, stdout, _ = run(capsys, "reduce", "--input", str(src), "--target", "y", "--output", str(out))
    assert code == 0
    assert status_line(stdout) == "STATUS=ok CHECKS=0/0"
    assert src.read_bytes() == before
    d, yy = load_csv(out, "y")
    assert d.D == 1 and d.column_names == ("a+b",)
    assert np.array_equal(yy, y)
    log = (tmp_path / "red.decisions.log").read_text()
    assert "a,b" in log and "aggregate" in log


def test_reduce_then_transform_matches(tmp_path, capsys):
    src = tmp_path / "s.csv"
    run(capsys, "synth", "--scenario", "ddim", "--D", "10", "--n", "200", "--sigma", "10", "--output", str(src))
    red = tmp_path / "r.csv"
    assert run(capsys, "reduce", "--input", str(src), "--target", "y", "--output", str(red))[0] == 0
    again = tmp_path / "t.csv"
    code, _, _ = run(capsys, "transform", "--input", str(src), "--partition", str(tmp_path / "r.partition.json"), "--target", "y", "--output", str(again))
    assert code == 0
    assert red.read_bytes() == again.read_bytes()


def test_theoretical_mode_needs_truth(tmp_path, capsys):
    src = tmp_path / "s.csv"
    run(capsys, "synth", "--output", str(src))
    code, stdout, err = run(capsys, "reduce", "--input", str(src), "--target", "y", "--output", str(tmp_path / "o.csv"), "--mode", "theoretical")
    assert code == 19
    assert "ConfigError" in err
    assert status_line(stdout) == "STATUS=fail CHECKS=0/0"


def test_theoretical_mode_runs(tmp_path, capsys):
    src = tmp_path / "s.csv"
    run(capsys, "synth", "--sigma", "10", "--w", "0.2,0.8", "--output", str(src))
    out = tmp_path / "o.csv"
    code, _, _ = run(capsys, "reduce", "--input", str(src), "--target", "y", "--output", str(out), "--mode", "theoretical", "--sigma2", "100", "--weights", "0.2,0.8")
    assert code == 0
    assert load_csv(out, "y")[0].D == 1


@pytest.mark.parametrize(
    "content, code",
    [
        ("a,b,y\n1,2,3\n1,x,3\n2,1,0\n", 21),
        ("a,b,y\n1,2,3\n1,nan,3\n2,1,0\n", 22),
        ("a,b,z\n1,2,3\n1,1,3\n2,1,0\n", 23),
        ("a,b,y\n1,2,3\n1,2,4\n1,5,0\n1,3,1\n", 11),
    ],
)
def test_exit_codes(tmp_path, capsys, content, code):
    src = tmp_path / "bad.csv"
    src.write_text(content)
    got, stdout, _ = run(capsys, "reduce", "--input", str(src), "--target", "y", "--output", str(tmp_path / "o.csv"))
    assert got == code
    assert status_line(stdout).startswith("STATUS=fail")
    assert not (tmp_path / "o.csv").exists()


def test_missing_file(tmp_path, capsys):
    code, _, _ = run(capsys, "reduce", "--input", str(tmp_path / "nope.csv"), "--target", "y", "--output", str(tmp_path / "o.csv"))
    assert code == 3


def test_transform_schema_mismatch(tmp_path, capsys):
    src = tmp_path / "s.csv"
    run(capsys, "synth", "--output", str(src))
    run(capsys, "reduce", "--input", str(src), "--target", "y", "--output", str(tmp_path / "r.csv"))
    other = tmp_path / "o.csv"
    write_csv(other, ["x1", "q", "y"], np.ones((3, 3)) + np.arange(3)[:, None])
    code, _, err = run(capsys, "transform", "--input", str(other), "--partition", str(tmp_path / "r.partition.json"), "--target", "y", "--output", str(tmp_path / "t.csv"))
    assert code == 20
    assert "missing" in err


def test_compare(tmp_path, capsys):
    src = tmp_path / "s.csv"
    run(capsys, "synth", "--scenario", "ddim", "--D", "20", "--n", "300", "--sigma", "10", "--output", str(src))
    out = tmp_path / "cmp.csv"
    code, stdout, _ = run(capsys, "compare", "--input", str(src), "--target", "y", "--output", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,d,r2,mse"
    assert [l.split(",")[0] for l in lines[1:]] == ["identity", "lincfa", "pca"]


def test_validate_2d_small(tmp_path, capsys):
    code, stdout, _ = run(capsys, "validate", "--scenario", "2d", "--arms", "narrow", "--reps", "100", "--n", "500", "--output-dir", str(tmp_path))
    assert status_line(stdout).startswith("STATUS=")
    assert (tmp_path / "experiment_2d_narrow.csv").exists()
    assert (tmp_path / "checks_2d.csv").exists()
    assert code in (0, 30)
    lines = [l for l in stdout.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert lines
    assert code == (0 if all(l.startswith("PASS") for l in lines) else 30)
