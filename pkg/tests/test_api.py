"""
HTTP surface: health, bounds calculator, noise presets and the run registry
"""
import pytest
from fastapi.testclient import TestClient

from app.db.database import init_db, session_scope
from app.main import app
from app.services import results_service


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_bounds_endpoint(client):
    response = client.get(
        "/api/v1/bounds", params={"p": 0.9, "delta": 0.2, "n_classes": 10, "target_error": 0.01}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["yomo_shots"] == 15
    assert body["vanilla_shots"] == 1521
    assert body["smaller_delta_vacuous"] is True
    assert body["lipschitz_source"] == "identity"


def test_bounds_domain_error(client):
    response = client.get(
        "/api/v1/bounds", params={"p": 0.4, "delta": 0.2, "n_classes": 10, "target_error": 0.01}
    )
    assert response.status_code == 422
    assert response.json()["error_code"] == "DOMAIN_ERROR"
    assert response.json()["success"] is False


def test_noise_presets(client):
    response = client.get("/api/v1/noise/presets")
    assert response.status_code == 200
    body = response.json()
    assert body["total_count"] == 4
    assert body["data"][0] == {"name": "IBM_Pittsburgh", "p1": 2.02e-4, "p2": 1.69e-3}


def test_unknown_run(client):
    response = client.get("/api/v1/runs/does-not-exist")
    assert response.status_code == 404
    assert response.json()["detail"]["error_code"] == "NOT_FOUND"


def test_recorded_run_is_listed(client):
    init_db()
    with session_scope() as db:
        results_service.record_training_run(db, {
            "run_id": "api-run", "head": "vanilla", "n_q": 4, "n_blocks": 1,
            "n_classes": 4, "seed": 2, "epochs": 3, "final_loss": 0.5,
        })
    listing = client.get("/api/v1/runs").json()
    assert "api-run" in [run["run_id"] for run in listing["data"]]

    run = client.get("/api/v1/runs/api-run").json()
    assert run["head"] == "vanilla"
    assert run["epochs"] == 3

    evaluations = client.get("/api/v1/runs/api-run/evaluations").json()
    assert evaluations["total_count"] == 0


def test_root_lists_limits_and_presets(client):
    body = client.get("/").json()
    assert body["max_statevector_qubits"] == 20
    assert "IonQ Forte" in body["noise_presets"]


def test_health_reports_registry(client):
    assert client.get("/health").json()["registry"] == "connected"
