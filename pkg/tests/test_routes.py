import pytest

from app import create_app


@pytest.fixture(scope="module")
def client():
    app = create_app()
    app.config["TESTING"] = True
    with app.test_client() as client:
        yield client


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.get_json()["data"]["status"] == "ok"


def test_spectrum(client):
    response = client.get("/spectrum?q=2")
    assert response.status_code == 200
    data = response.get_json()["data"]
    assert (data["n"], data["k"]) == (49, 9)


def test_spectrum_errors(client):
    assert client.get("/spectrum").status_code == 400
    response = client.get("/spectrum?q=6")
    assert response.status_code == 400
    assert "unsupported field order 6" in response.get_json()["error"]


def test_verify(client):
    response = client.post("/verify", json={"theorem": "cs2", "q": "2", "gen": "full_points",
                                            "gen_lines": "full_linepairs"})
    assert response.status_code == 200
    data = response.get_json()["data"]
    assert data["exit_code"] == 0
    assert data["rows"][0]["lhs"] == 144


def test_verify_errors(client):
    assert client.post("/verify").status_code == 400
    response = client.post("/verify", json={"theorem": "riemann"})
    assert response.status_code == 400
    assert "unknown theorem" in response.get_json()["error"]


def test_apps(client):
    response = client.post("/apps", json={"app": "dot_pairs", "q": 3, "gen": "full_points",
                                          "variant": "as_written"})
    assert response.status_code == 200
    assert response.get_json()["data"]["rows"][0]["lhs"] == 648


def test_oracle(client):
    response = client.post("/oracle", json={"q": "2", "oracle_instances": 2})
    assert response.status_code == 200
    data = response.get_json()["data"]
    assert data["ok"]
    assert data["counterexample"] is None


def test_oracle_with_fault(client):
    response = client.post("/oracle", json={"q": "2", "oracle_instances": 1, "inject_fault": "0,1"})
    data = response.get_json()["data"]
    assert not data["ok"]
    assert data["exit_code"] == 1
    assert data["counterexample"]["name"] == "regular"


def test_stored_runs(client):
    response = client.post("/verify", json={"theorem": "sdz", "q": "3", "seeds": "0..1", "store": True})
    run_id = response.get_json()["data"]["run_id"]
    runs = client.get("/runs").get_json()["data"]
    assert run_id in {run["run_id"] for run in runs}
    stored = client.get(f"/runs/{run_id}")
    assert stored.status_code == 200
    assert len(stored.get_json()["data"]["rows"]) == 2
    assert client.get("/runs/ffffffffffff").status_code == 404
