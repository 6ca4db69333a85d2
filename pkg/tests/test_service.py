"""Service tests over the in-process ASGI app: batch endpoints, session
lifecycle, and error mapping."""
import pytest
from fastapi.testclient import TestClient

from gaussnav.service.app import create_app
from gaussnav.simulator import CrowdSim, RewardConfig, WorldConfig, flatten_observation


@pytest.fixture()
def client():
    with TestClient(create_app()) as c:
        yield c


SMALL_WORLD = {"n_humans": 2, "t_max": 10.0}


class TestHealth:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["layout_version"] == 1

    def test_openapi_schema_renders(self, client):
        schema = client.get("/openapi.json").json()
        paths = set(schema["paths"])
        assert {"/eval", "/surface", "/learn", "/replay", "/sessions"} <= paths


class TestEvalEndpoint:
    def test_eval_smoke(self, client, tmp_path):
        payload = {
            "config": {"world": {"n_humans": 0, "t_max": 30.0}, "episodes": 3, "label": "srv"},
            "overrides": {"out_dir": str(tmp_path)},
        }
        body = client.post("/eval", json=payload).json()
        assert body["report"]["success_rate"] == 1.0
        assert body["table"].startswith("srv,")
        assert "results" in body["files"]

    def test_unknown_key_rejected_with_path(self, client):
        payload = {"config": {"world": {"n_humans": 0, "sensor_rnage": 5.0}}}
        response = client.post("/eval", json=payload)
        assert response.status_code == 422
        assert "sensor_rnage" in response.text

    def test_semantic_error_maps_to_400(self, client):
        payload = {"config": {"world": {"n_humans": 0, "dt": -1.0}}}
        response = client.post("/eval", json=payload)
        assert response.status_code == 400
        assert "dt" in response.json()["detail"]

    def test_overrides_win(self, client):
        payload = {
            "config": {"world": {"n_humans": 0, "t_max": 30.0}, "episodes": 50},
            "overrides": {"episodes": 2},
        }
        body = client.post("/eval", json=payload).json()
        assert body["report"]["episodes"] == 2


class TestSurfaceEndpoint:
    def test_surface_file(self, client, tmp_path):
        payload = {
            "config": {"surface": {"extent": 1.0, "step": 0.5}},
            "overrides": {"out_dir": str(tmp_path)},
        }
        body = client.post("/surface", json=payload).json()
        assert body["n_points"] == 25
        with open(body["path"]) as fh:
            assert fh.readline().startswith("# config:")


class TestLearnEndpoint:
    def test_learn_smoke(self, client, tmp_path):
        payload = {
            "config": {
                "world": {"n_humans": 0, "t_max": 20.0},
                "learner": {"population": 3, "iterations": 2, "episodes_per_candidate": 1},
                "campaign": {"holdout_episodes": 2},
            },
            "overrides": {"out_dir": str(tmp_path)},
        }
        body = client.post("/learn", json=payload).json()
        assert body["iterations_run"] == 2
        assert len(body["curve"]) == 2
        assert "policy_best" in body["files"]


class TestReplayEndpoint:
    def test_replay_roundtrip(self, client, tmp_path):
        eval_body = client.post(
            "/eval",
            json={
                "config": {"world": SMALL_WORLD, "episodes": 2},
                "overrides": {"out_dir": str(tmp_path)},
            },
        ).json()
        replay = client.post(
            "/replay", json={"records_path": eval_body["files"]["records"]}
        ).json()
        assert replay["episodes"] == 2
        assert replay["success_rate"] == eval_body["report"]["success_rate"]

    def test_missing_records_400(self, client):
        response = client.post("/replay", json={"records_path": "/nowhere.jsonl"})
        assert response.status_code == 400


class TestSessions:
    def create(self, client, **config):
        body = {"world": {**SMALL_WORLD, **config}}
        response = client.post("/sessions", json=body)
        assert response.status_code == 200
        return response.json()

    def test_create_reports_layout(self, client):
        created = self.create(client)
        assert created["layout"]["version"] == 1
        assert created["layout"]["length"] == 9 + 6 * 2

    def test_reset_matches_native_engine(self, client):
        created = self.create(client)
        sid = created["session_id"]
        served = client.post(f"/sessions/{sid}/reset", json={"seed": 42}).json()
        native = CrowdSim(WorldConfig(**SMALL_WORLD), RewardConfig())
        obs = native.reset(42)
        assert served["observation"] == flatten_observation(obs, 2)

    def test_step_and_outcome_mapping(self, client):
        created = self.create(client, n_humans=0, t_max=1.0, dt=0.5)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/reset", json={"seed": 1})
        for expected_trunc in (False, True):
            body = client.post(f"/sessions/{sid}/step", json={"action": [0.0, 0.0]}).json()
            assert body["truncated"] is expected_trunc
            assert body["terminated"] is False
        # further steps are a usage error
        response = client.post(f"/sessions/{sid}/step", json={"action": [0.0, 0.0]})
        assert response.status_code == 409

    def test_step_before_reset_409(self, client):
        sid = self.create(client)["session_id"]
        assert client.post(f"/sessions/{sid}/step", json={"action": [0, 0]}).status_code == 409

    def test_unknown_session_404(self, client):
        assert client.post("/sessions/nope/reset", json={}).status_code == 404
        assert client.delete("/sessions/nope").status_code == 404

    def test_delete(self, client):
        sid = self.create(client)["session_id"]
        assert client.delete(f"/sessions/{sid}").status_code == 200
        assert client.post(f"/sessions/{sid}/reset", json={}).status_code == 404

    def test_repeated_resets_do_not_grow_sessions(self, client):
        app_sessions = client.app.state.sessions
        sid = self.create(client)["session_id"]
        before = app_sessions.count()
        for seed in range(50):
            client.post(f"/sessions/{sid}/reset", json={"seed": seed})
        assert app_sessions.count() == before

    def test_infinite_d_min_serialized_as_null(self, client):
        created = self.create(client, n_humans=0, t_max=5.0)
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/reset", json={"seed": 0})
        body = client.post(f"/sessions/{sid}/step", json={"action": [0.1, 0.0]}).json()
        assert body["info"]["d_min"] is None
