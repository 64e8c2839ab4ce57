import numpy as np
import pytest
from fastapi.testclient import TestClient

from comars import designs
from comars.service import app

client = TestClient(app)


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_generate_from_order():
    response = client.post("/generate", json={"order": 7, "factors": 7})
    assert response.status_code == 200
    body = response.json()
    assert (body["runs"], body["factors"]) == (8, 7)
    designs.validate_conference(np.array(body["entries"]))


def test_generate_from_entries():
    entries = designs.paley_conference(5).entries.tolist()
    response = client.post("/generate", json={"entries": entries})
    assert response.status_code == 200
    assert response.json()["entries"] == entries


def test_generate_requires_one_source():
    response = client.post("/generate", json={"order": 7, "entries": [[0]]})
    assert response.status_code == 422
    assert response.json()["error"] == "ValidationError"


def test_generate_rejects_composite_order():
    response = client.post("/generate", json={"order": 9})
    assert response.status_code == 422
    assert response.json()["error"] == "NotPrime"


def test_generate_rejects_too_many_factors():
    response = client.post("/generate", json={"order": 7, "factors": 9})
    assert response.status_code == 422


def test_optimize_small():
    conference = designs.paley_conference(5).drop_columns(5).entries.tolist()
    response = client.post(
        "/optimize",
        json={"conference": conference, "n0": 1, "objective": "ssq", "restarts": 4, "seed": 0},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["design"]["runs"] == 25
    assert sorted(body["state"]["perm"]) == list(range(5))
    assert set(body["state"]["signs"]) <= {-1, 1}
    assert body["report"]["ssq_2fi"] == pytest.approx(body["objective"]["ssq"])
    assert body["pairing"] == [0, 0]
    entries = np.array(body["design"]["entries"])
    assert np.all(np.sum(entries == 0, axis=0) == 5)


def test_optimize_rejects_bad_parent():
    response = client.post(
        "/optimize", json={"conference": [[1, 1], [1, 1]], "restarts": 1}
    )
    assert response.status_code == 422


def test_evaluate_reference_design():
    entries = designs.load_design_csv(
        designs.bundled_data_path("comars_7f_34runs.csv")
    ).tolist()
    response = client.post("/evaluate", json={"entries": entries, "n": 8, "n0": 2})
    assert response.status_code == 200
    report = response.json()["report"]
    assert report["ssq_all_so"] == pytest.approx(16.083333)
    assert report["quartiles"]["max"] == pytest.approx(0.367315)
    assert response.json()["violations"] == []


def test_evaluate_infers_n():
    entries = designs.load_design_csv(
        designs.bundled_data_path("comars_7f_34runs.csv")
    ).tolist()
    response = client.post("/evaluate", json={"entries": entries, "check_theory": True})
    assert response.status_code == 200
    body = response.json()
    assert body["n_inferred"] is True
    assert body["report"]["n"] == 8
    assert body["violations"] == []


def test_evaluate_rejects_inconsistent_n0():
    entries = designs.load_design_csv(
        designs.bundled_data_path("comars_7f_34runs.csv")
    ).tolist()
    response = client.post("/evaluate", json={"entries": entries, "n0": 5})
    assert response.status_code == 422


def test_evaluate_rejects_all_two_level_design():
    entries = [[1, -1, 1, 1, -1], [-1, 1, 1, -1, 1], [1, 1, -1, -1, 1], [-1, -1, -1, 1, -1]]
    response = client.post("/evaluate", json={"entries": entries})
    assert response.status_code == 422
    assert response.json()["error"] == "ZeroVariance"


def test_evaluate_theory_violations_reported():
    body7 = designs.foldover(designs.paley_conference(7).drop_columns(7))
    dsd = np.vstack([body7.entries, np.zeros((1, 7), dtype=np.int64)]).tolist()
    response = client.post("/evaluate", json={"entries": dsd, "n": 8, "check_theory": True})
    assert response.status_code == 200
    assert response.json()["violations"]


def test_compare_self_is_unity():
    entries = designs.load_design_csv(
        designs.bundled_data_path("comars_7f_34runs.csv")
    ).tolist()
    response = client.post(
        "/compare",
        json={"design_a": entries, "design_b": entries, "n0_a": 2, "n0_b": 2},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["d_ratio"] == pytest.approx(1.0)
    assert body["relative_d_efficiency"] == pytest.approx(1.0)
    assert body["a"] == body["b"]


def test_compare_factor_mismatch():
    a = designs.paley_conference(5).entries.tolist()
    b = designs.paley_conference(7).entries.tolist()
    response = client.post(
        "/compare", json={"design_a": a, "design_b": b, "n0_a": 0, "n0_b": 0}
    )
    assert response.status_code == 422
    assert response.json()["error"] == "FactorMismatch"
