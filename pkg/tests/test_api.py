import pytest
from fastapi.testclient import TestClient

from services.src.api import app
from services.src.initial_setup.env_config import Config
from services.src.large_system import optimal_secrecy_sum_rate


@pytest.fixture
def client():
    return TestClient(app)


def test_root_and_health(client):
    assert client.get("/").json()["message"] == "RCI Secrecy API"
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_health_reports_bad_config(client, monkeypatch):
    monkeypatch.setattr(Config, "JOINT_TOL", -1.0)
    assert client.get("/health").status_code == 503


def test_large_system_table(client):
    response = client.get("/large-system", params=[("K", 4), ("snr_db", 0), ("snr_db", 10)])
    assert response.status_code == 200
    points = response.json()["points"]
    assert len(points) == 2
    assert points[0]["rate_bits"] == pytest.approx(optimal_secrecy_sum_rate(1.0, 4))


def test_large_system_rejects_bad_k(client):
    assert client.get("/large-system", params={"K": 0, "snr_db": 0}).status_code == 422


def test_asymptotes(client):
    body = client.get("/asymptotes").json()
    assert body["power_loss_db"] == pytest.approx(3.7469, abs=1e-4)


def test_sweep(client):
    request = {"K": 2, "M": 2, "snr_grid_db": [0.0, 10.0], "trials": 4, "master_seed": 3, "schemes": ["rci-ls", "mf"]}
    response = client.post("/sweep", json=request)
    assert response.status_code == 200
    points = response.json()["per_point"]
    assert [p["scheme"] for p in points] == ["rci-ls", "rci-ls", "mf", "mf"]


def test_sweep_trial_cap(client, monkeypatch):
    monkeypatch.setattr(Config, "API_MAX_TRIALS", 10)
    request = {"K": 2, "M": 2, "snr_grid_db": [0.0], "trials": 11}
    assert client.post("/sweep", json=request).status_code == 400


def test_sweep_validation(client):
    request = {"K": 4, "M": 2, "snr_grid_db": [0.0], "trials": 2, "schemes": ["ci"]}
    assert client.post("/sweep", json=request).status_code == 422


def test_ccdf(client):
    response = client.post("/ccdf", json={"K": 2, "snr_db": 10.0, "trials": 5, "thresholds": [0.0, 0.1]})
    assert response.status_code == 200
    body = response.json()
    assert body["thresholds"] == [0.0, 0.1]
    assert body["trials"] == 5
