import pytest
from fastapi.testclient import TestClient

from gearsynth.service.app import create_app

PAPER_EXAMPLE = ["<start>", "MRGF2-500", "mesh_2n", "MSGA2-40", "tra-", "SH-200",
                 "SBSG2-3020R", "mesh_1p", "SBSG2-2030L", "<end>"]
SHAFT = ["<start>", "tra+", "SH-100", "<end>"]


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    data = client.get("/health").json()
    assert data["status"] == "ok"
    assert data["catalogue_version"] == "gear-catalogue/1"
    assert len(data["vocab_hash"]) == 64


def test_catalogue_endpoints(client):
    data = client.get("/catalogue").json()
    assert len(data["parts"]) == 44
    vocab = client.get("/catalogue/vocab").json()
    assert len(vocab["tokens"]) == 53


def test_validate_endpoint(client):
    data = client.post("/sequences/validate", json={
        "sequences": [SHAFT, PAPER_EXAMPLE, ["<start>", "MRGF2-500", "<end>"]],
    }).json()
    assert [r["ok"] for r in data["results"]] == [True, True, False]
    assert not data["all_ok"]
    assert data["results"][2]["violation"]["position"] == 2


def test_simulate_endpoint(client):
    data = client.post("/sequences/simulate", json={"sequences": [SHAFT]}).json()
    item = data["results"][0]
    assert item["ok"] and item["feasible"]
    assert item["result"]["s"] == 1.0
    assert item["result"]["p"] == [0.1, 0.0, 0.0]
    assert item["requirements"] == [0.0, 0.0, 1.0, 0.1, 0.0, 0.0, 0.0, 1.0]

    bad = client.post("/sequences/simulate", json={
        "sequences": [["<start>", "MRGF2-500", "<end>"]]}).json()
    assert not bad["results"][0]["ok"]


def test_random_and_complete_endpoints(client):
    data = client.post("/sequences/random", json={"n": 5, "seed": 3}).json()
    again = client.post("/sequences/random", json={"n": 5, "seed": 3}).json()
    assert data["sequences"] == again["sequences"]
    check = client.post("/sequences/validate",
                        json={"sequences": data["sequences"]}).json()
    assert check["all_ok"]

    comp = client.post("/sequences/complete", json={
        "prefix": ["<start>", "MRGF2-500"], "seed": 1}).json()
    assert comp["sequence"][1] == "MRGF2-500"


def test_enumerate_endpoint(client):
    data = client.post("/sequences/enumerate", json={"max_components": 3}).json()
    assert data["count"] == 10
    assert data["sequences"] is None
    listed = client.post("/sequences/enumerate", json={
        "max_components": 2, "include_sequences": True}).json()
    assert len(listed["sequences"]) == listed["count"]


def test_encode_endpoint(client):
    data = client.post("/requirements/encode", json={"sequence": SHAFT}).json()
    assert data["requirements"] == [0.0, 0.0, 1.0, 0.1, 0.0, 0.0, 0.0, 1.0]


def test_dataset_endpoints(client, tmp_path):
    manifest = client.post("/dataset/generate", json={
        "n": 120, "seed": 5, "out_dir": str(tmp_path / "ds")}).json()
    assert manifest["accepted"] == 120
    counts = client.post("/dataset/split", json={
        "records_path": str(tmp_path / "ds" / "records.txt"),
        "out_dir": str(tmp_path / "splits"),
        "val_frac": 0.05, "test_frac": 0.05, "seed": 0}).json()
    assert counts["train"] == 108 and counts["val"] == 6 and counts["test"] == 6

    missing = client.post("/dataset/split", json={
        "records_path": str(tmp_path / "nope.txt"),
        "out_dir": str(tmp_path / "x")})
    assert missing.status_code == 404


def test_evaluate_endpoint(client):
    sim = client.post("/sequences/simulate", json={"sequences": [SHAFT]}).json()
    req = sim["results"][0]["requirements"]
    data = client.post("/evaluate", json={
        "pairs": [{"requirements": req, "sequence": SHAFT}]}).json()
    assert data["report"]["valid_pct"] == 100.0
    assert data["report"]["pos_m"] == 0.0
    assert "Valid" in data["table"]


def test_search_endpoint(client):
    payload = {"method": "mcts", "requirements": [0, 0, 1.0, 0.1, 0, 0, 0, 1],
               "budget": 60, "seed": 1}
    data = client.post("/search", json=payload).json()
    assert data["candidates_evaluated"] == 60
    assert data["best_valid"]
    assert data["sim"] is not None
    again = client.post("/search", json=payload).json()
    assert again["best_sequence"] == data["best_sequence"]

    hybrid = client.post("/search", json={
        "method": "eda+c", "requirements": [0, 0, 1.0, 0.1, 0, 0, 0, 1],
        "budget": 100, "population": 50, "seed": 1, "completer": "random"}).json()
    assert hybrid["candidates_evaluated"] == 100

    missing = client.post("/search", json={
        "method": "eda+c", "requirements": [0, 0, 1.0, 0.1, 0, 0, 0, 1],
        "budget": 100, "seed": 1})
    assert missing.status_code == 422


def test_benchmark_endpoint(client):
    data = client.post("/benchmark", json={
        "methods": ["random", "mcts"], "n_problems": 2, "seed": 0,
        "budgets": {"random": 100, "mcts": 100},
        "problem_max_components": 4}).json()
    assert data["n_problems"] == 2
    assert set(data["methods"]) == {"random", "mcts"}
    assert data["methods"]["mcts"]["candidates_evaluated"] == 200
    assert "Model" in data["table"]
