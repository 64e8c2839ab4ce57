import json

import numpy as np
import pytest

from comars import cli, designs

REFERENCE = designs.bundled_data_path("comars_7f_34runs.csv")


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def test_generate_writes_valid_design(tmp_path):
    out = tmp_path / "c8_7.csv"
    assert run_cli("generate", "--order", 7, "--factors", 7, "--out", out) == 0
    design = designs.load_conference_csv(out)
    assert (design.n, design.m) == (8, 7)
    manifest = json.loads((tmp_path / "c8_7.csv.manifest.json").read_text())
    assert manifest["command"] == "generate"
    assert manifest["flags"]["order"] == 7
    assert manifest["version"]


def test_generate_rejects_too_many_factors(tmp_path):
    assert run_cli("generate", "--order", 7, "--factors", 9, "--out", tmp_path / "x.csv") == 2


def test_generate_from_invalid_file(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,1,1,1,1,1\n" * 6)
    assert run_cli("generate", "--file", bad, "--out", tmp_path / "x.csv") == 2


def test_missing_input_file_is_io_error(tmp_path):
    assert run_cli("generate", "--file", tmp_path / "absent.csv", "--out", tmp_path / "x.csv") == 3


def test_csv_with_out_of_domain_token(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,1\n")
    assert (
        run_cli("evaluate", "--design", bad, "--report", tmp_path / "r.json") == 2
    )


def test_optimize_outputs_and_determinism(tmp_path):
    parent = tmp_path / "c6_5.csv"
    assert run_cli("generate", "--order", 5, "--factors", 5, "--out", parent) == 0
    args = [
        "optimize", "--conference", parent, "--n0", 1, "--objective", "ssq",
        "--restarts", 5, "--seed", 11,
    ]
    out_a, rep_a = tmp_path / "a.csv", tmp_path / "a.json"
    out_b, rep_b = tmp_path / "b.csv", tmp_path / "b.json"
    assert run_cli(*args, "--out", out_a, "--report", rep_a) == 0
    assert run_cli(*args, "--out", out_b, "--report", rep_b) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert rep_a.read_bytes() == rep_b.read_bytes()
    report = json.loads(rep_a.read_text())
    assert report["runs"] == 25
    design = designs.load_design_csv(out_a)
    assert design.shape == (25, 5)
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["seed"] == 11
    assert manifest["artifacts"] == {"design": str(out_a), "report": str(rep_a)}


def test_optimize_rejects_invalid_parent(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,1,1,1,1,1\n" * 6)
    code = run_cli(
        "optimize", "--conference", bad, "--out", tmp_path / "o.csv",
        "--report", tmp_path / "r.json",
    )
    assert code == 2


def test_optimize_cc_bound_exit_code(tmp_path):
    parent = tmp_path / "c6_5.csv"
    run_cli("generate", "--order", 5, "--factors", 5, "--out", parent)
    out = tmp_path / "bounded.csv"
    code = run_cli(
        "optimize", "--conference", parent, "--restarts", 2, "--seed", 0,
        "--max-cc-passes", 1, "--out", out, "--report", tmp_path / "bounded.json",
    )
    assert code == 4
    assert out.exists()  # flagged result is still written


def test_evaluate_reference(tmp_path):
    report_path = tmp_path / "ref.json"
    code = run_cli(
        "evaluate", "--design", REFERENCE, "--n", 8, "--n0", 2,
        "--report", report_path, "--check-theory",
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["ssq_all_so"] == pytest.approx(16.083333)
    assert report["quartiles"] == {"q2": 0.0, "q3": 0.333333, "max": 0.367315}
    assert report["n"] == 8


def test_evaluate_theory_violation_exit(tmp_path):
    body = designs.foldover(designs.paley_conference(7).drop_columns(7))
    dsd_path = tmp_path / "dsd.csv"
    designs.save_csv(
        np.vstack([body.entries, np.zeros((1, 7), dtype=np.int64)]), dsd_path
    )
    code = run_cli(
        "evaluate", "--design", dsd_path, "--n", 8, "--report", tmp_path / "d.json",
        "--check-theory",
    )
    assert code == 5


def test_evaluate_two_level_matrix_rejected(tmp_path):
    rng = np.random.default_rng(0)
    matrix = rng.choice([-1, 1], size=(12, 5))
    path = tmp_path / "twolevel.csv"
    designs.save_csv(matrix, path)
    assert run_cli("evaluate", "--design", path, "--report", tmp_path / "r.json") == 2


def test_compare_self(tmp_path, capsys):
    code = run_cli(
        "compare", "--design-a", REFERENCE, "--design-b", REFERENCE,
        "--n0-a", 2, "--n0-b", 2,
    )
    assert code == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["d_ratio"] == pytest.approx(1.0)
    assert printed["relative_d_efficiency"] == pytest.approx(1.0)


def test_compare_factor_mismatch(tmp_path):
    other = tmp_path / "c6.csv"
    run_cli("generate", "--order", 5, "--out", other)
    code = run_cli(
        "compare", "--design-a", REFERENCE, "--design-b", other, "--n0-a", 2, "--n0-b", 0
    )
    assert code == 2


def test_compare_report_file(tmp_path):
    report = tmp_path / "cmp.json"
    code = run_cli(
        "compare", "--design-a", REFERENCE, "--design-b", REFERENCE,
        "--n0-a", 2, "--n0-b", 2, "--report", report,
    )
    assert code == 0
    assert json.loads(report.read_text())["d_ratio"] == pytest.approx(1.0)
    assert (tmp_path / "cmp.json.manifest.json").exists()


def _patch_http_to_test_client(monkeypatch):
    import httpx
    from fastapi.testclient import TestClient

    from comars.service import app

    test_client = TestClient(app, raise_server_exceptions=False)

    def fake_post(url, json=None, timeout=None):
        return test_client.post(url.replace("http://service", ""), json=json)

    monkeypatch.setattr(httpx, "post", fake_post)


def test_remote_mode_routes_over_http(tmp_path, monkeypatch):
    """--server exercises the HTTP client path against the in-process app."""
    _patch_http_to_test_client(monkeypatch)
    out = tmp_path / "remote.csv"
    code = run_cli(
        "generate", "--order", 7, "--factors", 7, "--out", out,
        "--server", "http://service",
    )
    assert code == 0
    designs.load_conference_csv(out)


def test_remote_mode_maps_errors(tmp_path, monkeypatch):
    _patch_http_to_test_client(monkeypatch)
    code = run_cli(
        "generate", "--order", 9, "--out", tmp_path / "x.csv", "--server", "http://service"
    )
    assert code == 2
