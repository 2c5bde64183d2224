import numpy as np
import pytest
from fastapi.testclient import TestClient

from formfind import amortizer, datagen, server
from formfind.tasks import ShellTask, TowerTask


@pytest.fixture(scope="module")
def client():
    shell_task = ShellTask(grid_side=4)
    tower_task = TowerTask(num_rings=4, points_per_ring=6)
    models = {
        "shells": (amortizer.build_model("ours", shell_task, hidden=16, seed=0), shell_task),
        "towers": (amortizer.build_model("ours", tower_task, hidden=16, seed=0), tower_task),
    }
    return TestClient(server.create_app(models))


def shell_body(seed=0, grid=4):
    pts = datagen.sample_symmetric_controls(seed, 10.0).points.reshape(16, 3)
    return {"control_points": pts.tolist(), "grid": grid}


def tower_body(a1=1.0, a2=1.0, beta=0.0):
    ring = {"alpha1": a1, "alpha2": a2, "beta": beta}
    return {"rings": {"bottom": ring, "middle": dict(ring), "top": dict(ring)}}


class TestInfoEndpoints:
    def test_tasks_lists_loaded_models(self, client):
        doc = client.get("/tasks").json()
        assert doc["shells"]["nodes"] == 16
        assert doc["towers"]["kind"] == "ours"

    def test_model_info(self, client):
        doc = client.get("/model-info").json()
        assert doc["shells"]["task"] == "shells"
        assert isinstance(doc["shells"]["layer_sizes"], list)


class TestShellPrediction:
    def test_valid_request(self, client):
        resp = client.post("/predict/shell", json=shell_body())
        assert resp.status_code == 200
        doc = resp.json()
        assert len(doc["positions"]) == 16
        assert len(doc["q"]) == 24
        # the solver decoder keeps the physics exact
        assert doc["residual_fro"] <= 1e-9
        assert doc["elapsed_ms"] > 0

    def test_schema_violation_is_400(self, client):
        resp = client.post("/predict/shell", json={"grid": 4})
        assert resp.status_code == 400

    def test_wrong_point_count_is_400(self, client):
        body = shell_body()
        body["control_points"] = body["control_points"][:10]
        resp = client.post("/predict/shell", json=body)
        assert resp.status_code == 400

    def test_grid_mismatch_is_422(self, client):
        resp = client.post("/predict/shell", json=shell_body(grid=10))
        assert resp.status_code == 422

    def test_deterministic_responses(self, client):
        a = client.post("/predict/shell", json=shell_body()).json()
        b = client.post("/predict/shell", json=shell_body()).json()
        assert a["positions"] == b["positions"]


class TestTowerPrediction:
    def test_valid_request(self, client):
        resp = client.post("/predict/tower", json=tower_body())
        assert resp.status_code == 200
        doc = resp.json()
        assert len(doc["positions"]) == 4 * 6
        assert doc["residual_fro"] <= 1e-9

    def test_out_of_range_ring_is_422(self, client):
        resp = client.post("/predict/tower", json=tower_body(a1=5.0))
        assert resp.status_code == 422

    def test_schema_violation_is_400(self, client):
        resp = client.post("/predict/tower", json={"rings": {"bottom": {}}})
        assert resp.status_code == 400

    def test_missing_model_is_404(self):
        task = ShellTask(grid_side=4)
        app = server.create_app(
            {"shells": (amortizer.build_model("ours", task, hidden=8), task)}
        )
        resp = TestClient(app).post("/predict/tower", json=tower_body())
        assert resp.status_code == 404
