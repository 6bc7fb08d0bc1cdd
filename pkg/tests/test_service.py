from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from oraclebound.service.app import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as test_client:
        yield test_client


TWO_STATES = [
    {"model_id": "a", "resource": 1.0, "accuracy": 0.8},
    {"model_id": "b", "resource": 10.0, "accuracy": 0.9},
]


class TestHealth:
    def test_health(self, client):
        response = client.get("/v1/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["version"]


class TestBoundsEndpoint:
    def test_conservative_always_present(self, client):
        response = client.post("/v1/bounds", json={"states": TWO_STATES})
        assert response.status_code == 200
        body = response.json()
        assert body["command"] == "bounds"
        assert body["results"]["conservative"]["r_oracle"] == pytest.approx(1.9)
        assert body["results"]["constant_alpha"] is None

    def test_constant_alpha_requested(self, client):
        response = client.post(
            "/v1/bounds", json={"states": TWO_STATES, "alpha": 0.5}
        )
        outcome = response.json()["results"]["constant_alpha"]["outcome"]
        assert outcome["a_oracle"] == pytest.approx(0.95)

    def test_profile_requested(self, client):
        response = client.post(
            "/v1/bounds",
            json={"states": TWO_STATES, "alpha_profile": {"2": 1.0}},
        )
        outcome = response.json()["results"]["profile"]["outcome"]
        assert outcome["r_oracle"] == pytest.approx(1.9)

    def test_domain_error_maps_to_400(self, client):
        bad = [
            {"model_id": "a", "resource": 1.0, "accuracy": 0.9},
            {"model_id": "b", "resource": 10.0, "accuracy": 0.8},
        ]
        response = client.post("/v1/bounds", json={"states": bad})
        assert response.status_code == 400
        assert "non-decreasing" in response.json()["detail"]

    def test_prune_warns(self, client):
        states = TWO_STATES + [
            {"model_id": "c", "resource": 5.0, "accuracy": 0.7}
        ]
        response = client.post(
            "/v1/bounds", json={"states": states, "prune_dominated": True}
        )
        body = response.json()
        assert body["state_space"]["num_states"] == 2
        assert any("pruned" in w for w in body["warnings"])

    def test_malformed_body_maps_to_422(self, client):
        response = client.post("/v1/bounds", json={"states": "nope"})
        assert response.status_code == 422


class TestEmpiricalEndpoint:
    def _request(self, **overrides):
        payload = {
            "states": [
                {"model_id": "m1", "resource": 1.0, "accuracy": None},
                {"model_id": "m2", "resource": 10.0, "accuracy": None},
            ],
            "correctness": [
                {"instance_id": "x1", "model_id": "m1", "correct": False},
                {"instance_id": "x1", "model_id": "m2", "correct": False},
                {"instance_id": "x2", "model_id": "m1", "correct": False},
                {"instance_id": "x2", "model_id": "m2", "correct": True},
                {"instance_id": "x3", "model_id": "m1", "correct": True},
                {"instance_id": "x3", "model_id": "m2", "correct": True},
                {"instance_id": "x4", "model_id": "m1", "correct": True},
                {"instance_id": "x4", "model_id": "m2", "correct": True},
            ],
        }
        payload.update(overrides)
        return payload

    def test_full_flow(self, client):
        response = client.post("/v1/empirical", json=self._request())
        assert response.status_code == 200
        results = response.json()["results"]
        assert results["measured_accuracies"] == [0.5, 0.75]
        assert results["error_cascade"] == [0.5, 0.25]
        assert results["alpha"]["by_rank"] == [{"rank": 2, "alpha": 1.0}]
        assert results["oracle"]["r_oracle"] == pytest.approx(3.25)
        assert response.json()["labels"] is None

    def test_labels_on_request(self, client):
        response = client.post(
            "/v1/empirical", json=self._request(include_labels=True)
        )
        labels = response.json()["labels"]
        assert [l["selected_rank"] for l in labels] == [1, 2, 1, 1]

    def test_predictions_route(self, client):
        payload = {
            "states": [{"model_id": "m1", "resource": 1.0, "accuracy": None}],
            "predictions": [
                {"instance_id": "x", "model_id": "m1", "label": "cat"}
            ],
            "truth": {"x": "cat"},
        }
        response = client.post("/v1/empirical", json=payload)
        assert response.json()["results"]["measured_accuracies"] == [1.0]

    def test_requires_exactly_one_source(self, client):
        payload = self._request()
        payload["predictions"] = [
            {"instance_id": "x1", "model_id": "m1", "label": "z"}
        ]
        payload["truth"] = {"x1": "z"}
        response = client.post("/v1/empirical", json=payload)
        assert response.status_code == 400

    def test_unknown_model_rejected(self, client):
        payload = self._request()
        payload["correctness"][0]["model_id"] = "ghost"
        response = client.post("/v1/empirical", json=payload)
        assert response.status_code == 400
        assert "ghost" in response.json()["detail"]


class TestDesignEndpoints:
    def test_subset(self, client):
        states = [
            {"model_id": "a", "resource": 1.0, "accuracy": 0.8},
            {"model_id": "b", "resource": 2.0, "accuracy": 0.82},
            {"model_id": "c", "resource": 5.0, "accuracy": 0.85},
            {"model_id": "d", "resource": 10.0, "accuracy": 0.9},
        ]
        response = client.post(
            "/v1/design/subset", json={"states": states, "k": 2}
        )
        body = response.json()
        assert body["results"]["method"] == "optimal"
        plans = body["results"]["plans"]
        assert [p["k"] for p in plans] == [1, 2]
        assert plans[1]["chosen_ranks"] == [1, 4]
        assert plans[1]["r_oracle"] == pytest.approx(1.90)

    def test_r1(self, client):
        response = client.post(
            "/v1/design/r1", json={"states": TWO_STATES, "classes": 10}
        )
        results = response.json()["results"]
        assert results["admissible"] is True
        assert results["threshold"] == pytest.approx(7.0 / 0.9)
        assert results["direct_admissible"] is True

    def test_continuous(self, client):
        response = client.post(
            "/v1/design/continuous",
            json={
                "envelope": [
                    {"resource": 1.0, "accuracy": 0.8},
                    {"resource": 10.0, "accuracy": 0.9},
                ]
            },
        )
        outcome = response.json()["results"]["outcome"]
        assert outcome["r_oracle"] == pytest.approx(1.45)


class TestSynthEndpoint:
    def test_generates_matrix(self, client):
        payload = {
            "accuracies": [0.8, 0.9],
            "n_instances": 50,
            "mode": "nested",
            "seed": 11,
        }
        response = client.post("/v1/synth", json=payload)
        body = response.json()
        assert len(body["instance_ids"]) == 50
        assert body["model_ids"] == ["m1", "m2"]
        assert len(body["cells"]) == 50
        assert body["metadata"]["spec"]["seed"] == 11
        assert "Philox" in body["metadata"]["rng"]

    def test_identical_requests_identical_payloads(self, client):
        payload = {"accuracies": [0.5, 0.7], "n_instances": 64, "seed": 3}
        first = client.post("/v1/synth", json=payload).json()
        second = client.post("/v1/synth", json=payload).json()
        assert first == second


class TestPlotSeriesEndpoint:
    def test_bound_line_endpoints(self, client):
        response = client.post("/v1/plot-series", json={"states": TWO_STATES})
        results = response.json()["results"]
        line = results["bound_line"]
        assert line[0]["alpha"] == 0.0
        assert line[0]["r_oracle"] == pytest.approx(2.8)
        assert line[0]["a_oracle"] == 1.0
        assert line[-1]["alpha"] == 1.0
        assert line[-1]["r_oracle"] == pytest.approx(1.9)
        assert line[-1]["a_oracle"] == pytest.approx(0.9)
        assert results["alpha_by_rank"] is None
        assert [p["k"] for p in results["subset_curve"]] == [1, 2]


class TestEdgeCases:
    def test_r1_degenerate_threshold_reported_null(self, client):
        states = [
            {"model_id": "a", "resource": 1.0, "accuracy": 0.0},
            {"model_id": "b", "resource": 10.0, "accuracy": 1.0},
        ]
        response = client.post(
            "/v1/design/r1", json={"states": states, "classes": 10}
        )
        assert response.status_code == 200
        body = response.json()
        assert body["results"]["threshold"] is None
        assert body["results"]["admissible"] is False
        assert body["results"]["direct_admissible"] is False
        assert any("unbounded" in w for w in body["warnings"])

    def test_empirical_prunes_dominated_columns(self, client):
        payload = {
            "states": [
                {"model_id": "m1", "resource": 1.0},
                {"model_id": "mid", "resource": 5.0},
                {"model_id": "m2", "resource": 10.0},
            ],
            "correctness": [
                {"instance_id": "x1", "model_id": "m1", "correct": False},
                {"instance_id": "x1", "model_id": "mid", "correct": False},
                {"instance_id": "x1", "model_id": "m2", "correct": False},
                {"instance_id": "x2", "model_id": "m1", "correct": False},
                {"instance_id": "x2", "model_id": "mid", "correct": False},
                {"instance_id": "x2", "model_id": "m2", "correct": True},
                {"instance_id": "x3", "model_id": "m1", "correct": True},
                {"instance_id": "x3", "model_id": "mid", "correct": False},
                {"instance_id": "x3", "model_id": "m2", "correct": True},
                {"instance_id": "x4", "model_id": "m1", "correct": True},
                {"instance_id": "x4", "model_id": "mid", "correct": False},
                {"instance_id": "x4", "model_id": "m2", "correct": True},
            ],
            "prune_dominated": True,
        }
        response = client.post("/v1/empirical", json=payload)
        assert response.status_code == 200
        body = response.json()
        ids = [s["model_id"] for s in body["state_space"]["states"]]
        assert ids == ["m1", "m2"]
        assert any("mid" in w for w in body["warnings"])
        assert body["results"]["oracle"]["r_oracle"] == pytest.approx(3.25)

    def test_plot_series_single_state(self, client):
        states = [{"model_id": "only", "resource": 2.0, "accuracy": 0.7}]
        response = client.post("/v1/plot-series", json={"states": states})
        assert response.status_code == 200
        line = response.json()["results"]["bound_line"]
        assert [p["r_oracle"] for p in line] == [2.0, 2.0]
        assert [p["a_oracle"] for p in line] == [0.7, 0.7]

    def test_bounds_profile_must_cover_all_ranks(self, client):
        states = TWO_STATES + [
            {"model_id": "c", "resource": 20.0, "accuracy": 0.95}
        ]
        response = client.post(
            "/v1/bounds", json={"states": states, "alpha_profile": {"2": 0.5}}
        )
        assert response.status_code == 400
        assert "ranks" in response.json()["detail"]

    def test_empirical_keep_supplied_accuracies(self, client):
        payload = {
            "states": [
                {"model_id": "m1", "resource": 1.0, "accuracy": 0.6},
                {"model_id": "m2", "resource": 10.0, "accuracy": 0.75},
            ],
            "correctness": [
                {"instance_id": "x1", "model_id": "m1", "correct": False},
                {"instance_id": "x1", "model_id": "m2", "correct": False},
                {"instance_id": "x2", "model_id": "m1", "correct": False},
                {"instance_id": "x2", "model_id": "m2", "correct": True},
                {"instance_id": "x3", "model_id": "m1", "correct": True},
                {"instance_id": "x3", "model_id": "m2", "correct": True},
                {"instance_id": "x4", "model_id": "m1", "correct": True},
                {"instance_id": "x4", "model_id": "m2", "correct": True},
            ],
            "keep_supplied_accuracies": True,
        }
        response = client.post("/v1/empirical", json=payload)
        body = response.json()
        # The report always shows measured values; the space echo shows the
        # supplied ones actually used for the bounds.
        assert body["results"]["measured_accuracies"] == [0.5, 0.75]
        assert [s["accuracy"] for s in body["state_space"]["states"]] == [0.6, 0.75]
        assert any("differs from measured" in w for w in body["warnings"])
