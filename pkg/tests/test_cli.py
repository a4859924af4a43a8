import json

from hannerlab.cli import main


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_build_square(capsys):
    code, out, _ = run_cli(capsys, "build", "--expr", "(I1 +inf I2)")
    assert code == 0
    bundle = json.loads(out)
    assert bundle["n"] == 2
    assert bundle["counts"]["vertices"] == 4
    assert bundle["counts"]["flags"] == 8
    assert bundle["graph"] == {"n": 2, "edges": []}


def test_build_from_graph_file(capsys, tmp_path):
    path = tmp_path / "graph.json"
    path.write_text(json.dumps({"n": 4, "edges": [[1, 2], [3, 4]]}))
    code, out, _ = run_cli(capsys, "build", "--graph", str(path))
    assert code == 0
    bundle = json.loads(out)
    assert bundle["expr"] == "((I1 +1 I2) +inf (I3 +1 I4))"
    assert bundle["counts"]["vertices"] == 16


def test_build_p4_graph_fails(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 4, "edges": [[1, 2], [2, 3], [3, 4]]}))
    code, out, err = run_cli(capsys, "build", "--graph", str(path))
    assert code == 2
    assert "4-path" in err


def test_graph_command(capsys):
    code, out, _ = run_cli(capsys, "graph", "--expr", "((I1 +1 I2) +inf (I3 +1 I4))")
    assert code == 0
    assert json.loads(out) == {"n": 4, "edges": [[1, 2], [3, 4]]}


def test_faces_command(capsys):
    code, out, _ = run_cli(capsys, "faces", "--expr", "(I1 +inf I2)")
    assert code == 0
    data = json.loads(out)
    assert len(data["faces"]) == 8
    dims = sorted(f["dim"] for f in data["faces"])
    assert dims == [0, 0, 0, 0, 1, 1, 1, 1]


def test_flags_command(capsys):
    code, out, _ = run_cli(capsys, "flags", "--expr", "(I1 +1 I2)", "--limit", "3")
    assert code == 0
    data = json.loads(out)
    assert data["count"] == 8
    assert len(data["sample"]) == 3


def test_verify_all_cube(capsys):
    code, out, _ = run_cli(capsys, "verify", "--expr", "(I1 +inf (I2 +inf I3))", "--suite", "all")
    assert code == 0
    assert out.count("pass") == 4


def test_verify_dimension_guard(capsys):
    expr = "(I1 +inf (I2 +inf (I3 +inf (I4 +inf (I5 +inf (I6 +inf I7))))))"
    code, _, err = run_cli(capsys, "verify", "--expr", expr)
    assert code == 2
    assert "refusing dimension" in err


def test_parse_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "build", "--expr", "(I1 +1 I1)")
    assert code == 2
    assert "duplicate" in err


def test_experiment_writes_reports(capsys, tmp_path):
    out_dir = tmp_path / "exp"
    code, out, _ = run_cli(
        capsys, "experiment", "--expr", "(I1 +inf I2)",
        "--delta", "1/100", "--trials", "2", "--seed", "11",
        "--out", str(out_dir),
    )
    assert code == 0
    summary = json.loads(out)
    assert summary["min_gap_nonneg"] is True
    assert summary["pairings_ok"] is True
    csv_text = (out_dir / "experiment.csv").read_text()
    assert csv_text.count("\n") == 3  # header + two trials
    report = json.loads((out_dir / "experiment.json").read_text())
    assert report["trials"] == 2


def test_experiment_byte_identical_outputs(capsys, tmp_path):
    args = [
        "experiment", "--expr", "(I1 +inf I2)", "--delta", "1/100",
        "--trials", "2", "--seed", "13", "--format", "both",
    ]
    d1, d2 = tmp_path / "a", tmp_path / "b"
    run_cli(capsys, *args, "--out", str(d1))
    run_cli(capsys, *args, "--out", str(d2))
    assert (d1 / "experiment.csv").read_bytes() == (d2 / "experiment.csv").read_bytes()
    assert (d1 / "experiment.json").read_bytes() == (d2 / "experiment.json").read_bytes()


def test_experiment_dimension_guard(capsys):
    expr = "((I1 +inf I2) +inf (I3 +inf (I4 +inf I5)))"
    code, _, err = run_cli(capsys, "experiment", "--expr", expr, "--delta", "1/100")
    assert code == 2
    assert "refusing" in err


def test_verify_all_canonical_trees_small(capsys):
    from hannerlab.hanner import canonical_trees, format_expr

    for n in range(1, 4):
        for expr in canonical_trees(n):
            code, out, _ = run_cli(capsys, "verify", "--expr", format_expr(expr))
            assert code == 0, format_expr(expr)
