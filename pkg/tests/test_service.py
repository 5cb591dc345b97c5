"""Review service HTTP tests: runs, decisions, retraining, journal replay."""

from __future__ import annotations

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from metaharmon.crosswalk import Strategy
from metaharmon.ingest import schema_to_json
from metaharmon.model import StandardSchema
from metaharmon.service import ReviewService, create_app, load_decision_log

SOURCE = {
    "dataset_id": "survey-a",
    "columns": [{"name": "straw"}, {"name": "derelict gear"}],
}


def _client(schema, **kwargs):
    return TestClient(create_app(schema, clock=lambda: 1_700_000_000, **kwargs))


def _submit(client, source=SOURCE):
    response = client.post("/runs", json={"source": source})
    assert response.status_code == 200
    return response.json()


class TestConstruction:
    def test_requires_refined_schema(self, litter_schema):
        raw = StandardSchema(name="raw", entries=litter_schema.entries, normalized=False)
        with pytest.raises(ValueError, match="refined"):
            ReviewService(raw)

    def test_embedding_strategy_needs_model(self, litter_schema):
        with pytest.raises(ValueError, match="model"):
            ReviewService(litter_schema, strategy=Strategy(mode="hybrid"))


class TestSubmit:
    def test_run_and_item_ids(self, litter_schema):
        client = _client(litter_schema)
        run = _submit(client)
        assert run["run_id"] == "r0001"
        assert [i["item_id"] for i in run["items"]] == ["i000001", "i000002"]
        assert all(i["status"] == "pending" for i in run["items"])
        assert _submit(client)["run_id"] == "r0002"

    def test_items_carry_results(self, litter_schema):
        run = _submit(_client(litter_schema))
        straw = run["items"][0]["result"]
        assert straw["source_column"] == "straw"
        assert straw["matched_entry_id"] == "e0002"
        assert straw["predicted_path"] == ["plastics", "soft plastics"]
        assert straw["confidence"] == "qualified"

    def test_per_run_strategy_override(self, litter_schema):
        client = _client(litter_schema)
        body = {"source": SOURCE, "strategy": {"mode": "levenshtein", "threshold": 0}}
        run = client.post("/runs", json=body).json()
        assert all(i["result"]["confidence"] == "qualified" for i in run["items"])

    def test_missing_source_is_400(self, litter_schema):
        response = _client(litter_schema).post("/runs", json={})
        assert response.status_code == 400
        body = response.json()
        assert body["code"] == "invalid_payload"
        assert body["field"] == "source"

    def test_bad_strategy_is_400(self, litter_schema):
        body = {"source": SOURCE, "strategy": {"mode": "psychic"}}
        response = _client(litter_schema).post("/runs", json=body)
        assert response.status_code == 400
        assert response.json()["field"] == "strategy"

    def test_embedding_strategy_without_model_is_400(self, litter_schema):
        body = {"source": SOURCE, "strategy": {"mode": "embedding"}}
        response = _client(litter_schema).post("/runs", json=body)
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_strategy"

    def test_non_json_body_is_400(self, litter_schema):
        response = _client(litter_schema).post("/runs", content=b"not json")
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_json"

    def test_non_object_body_is_400(self, litter_schema):
        response = _client(litter_schema).post("/runs", json=[1, 2])
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_payload"


class TestPending:
    def test_weakest_first(self, litter_schema):
        client = _client(litter_schema)
        run = _submit(client)
        pending = client.get(f"/runs/{run['run_id']}/pending").json()
        scores = [i["result"]["score"] for i in pending]
        assert scores == sorted(scores)
        assert pending[0]["result"]["source_column"] == "derelict gear"

    def test_item_id_breaks_score_ties(self, litter_schema):
        client = _client(litter_schema)
        source = {"dataset_id": "d", "columns": [{"name": "straw"}, {"name": "straw"}]}
        run = _submit(client, source)
        pending = client.get(f"/runs/{run['run_id']}/pending").json()
        assert [i["item_id"] for i in pending] == ["i000001", "i000002"]

    def test_unknown_run_is_404(self, litter_schema):
        response = _client(litter_schema).get("/runs/r9999/pending")
        assert response.status_code == 404
        assert response.json()["code"] == "not_found"


class TestDecide:
    def test_accept_records_the_suggestion(self, litter_schema):
        client = _client(litter_schema)
        run = _submit(client)
        item = run["items"][0]
        decided = client.post(f"/items/{item['item_id']}/decision", json={"action": "accept"})
        assert decided.status_code == 200
        body = decided.json()
        assert body["status"] == "accepted"
        assert body["decided"]["decided_entry_id"] == "e0002"
        assert body["decided"]["engine_suggestion"] == "e0002"
        assert body["decided"]["timestamp"] == 1_700_000_000
        pending = client.get(f"/runs/{run['run_id']}/pending").json()
        assert item["item_id"] not in [i["item_id"] for i in pending]

    def test_override_records_the_correction(self, litter_schema):
        client = _client(litter_schema)
        run = _submit(client)
        item_id = run["items"][1]["item_id"]
        body = {"action": "override", "entry_id": "e0014"}
        decided = client.post(f"/items/{item_id}/decision", json=body).json()
        assert decided["status"] == "overridden"
        assert decided["decided"]["decided_entry_id"] == "e0014"
        assert decided["decided"]["decided_path"] == ["plastics", "fishing gear"]
        assert decided["decided"]["engine_suggestion"] == "e0003"

    def test_double_decision_is_409(self, litter_schema):
        client = _client(litter_schema)
        item_id = _submit(client)["items"][0]["item_id"]
        client.post(f"/items/{item_id}/decision", json={"action": "accept"})
        response = client.post(f"/items/{item_id}/decision", json={"action": "accept"})
        assert response.status_code == 409
        assert response.json()["code"] == "already_decided"

    def test_unknown_item_is_404(self, litter_schema):
        response = _client(litter_schema).post("/items/i9/decision", json={"action": "accept"})
        assert response.status_code == 404

    def test_bad_action_is_400(self, litter_schema):
        client = _client(litter_schema)
        item_id = _submit(client)["items"][0]["item_id"]
        response = client.post(f"/items/{item_id}/decision", json={"action": "reject"})
        assert response.status_code == 400
        assert response.json()["field"] == "action"

    def test_override_requires_entry_id(self, litter_schema):
        client = _client(litter_schema)
        item_id = _submit(client)["items"][0]["item_id"]
        response = client.post(f"/items/{item_id}/decision", json={"action": "override"})
        assert response.status_code == 400
        assert response.json()["field"] == "entry_id"

    def test_override_unknown_entry_is_400(self, litter_schema):
        client = _client(litter_schema)
        item_id = _submit(client)["items"][0]["item_id"]
        body = {"action": "override", "entry_id": "e9999"}
        response = client.post(f"/items/{item_id}/decision", json=body)
        assert response.status_code == 400
        assert response.json()["code"] == "unknown_entry"

    def test_cannot_accept_unmatched(self, litter_schema):
        client = _client(litter_schema)
        body = {
            "source": {"dataset_id": "d", "columns": [{"name": "zzqq"}]},
            "strategy": {"mode": "levenshtein", "strict": True},
        }
        run = client.post("/runs", json=body).json()
        item_id = run["items"][0]["item_id"]
        response = client.post(f"/items/{item_id}/decision", json={"action": "accept"})
        assert response.status_code == 400
        assert response.json()["code"] == "invalid_decision"


class TestRetrain:
    def test_empty_log_is_412(self, litter_schema):
        response = _client(litter_schema).post("/retrain")
        assert response.status_code == 412
        assert response.json()["code"] == "empty_log"

    def test_version_counts_up(self, litter_schema):
        client = _client(litter_schema)
        item_id = _submit(client)["items"][0]["item_id"]
        client.post(f"/items/{item_id}/decision", json={"action": "accept"})
        assert client.post("/retrain").json() == {"version": 1, "n_records": 1}
        assert client.post("/retrain").json() == {"version": 2, "n_records": 1}

    def test_feedback_changes_later_runs(self, litter_schema):
        client = _client(litter_schema)
        run = _submit(client)
        item_id = run["items"][1]["item_id"]
        client.post(f"/items/{item_id}/decision", json={"action": "override", "entry_id": "e0014"})
        client.post("/retrain")
        rerun = _submit(client)
        corrected = rerun["items"][1]["result"]
        assert corrected["source_column"] == "derelict gear"
        assert corrected["matched_entry_id"] == "e0014"
        assert corrected["method"] == "classifier"
        assert corrected["predicted_path"] == ["plastics", "fishing gear"]

    def test_conflicting_decisions_are_409(self, litter_schema):
        client = _client(litter_schema)
        for entry_id in ("e0014", "e0021"):
            run = _submit(client)
            item_id = run["items"][1]["item_id"]
            body = {"action": "override", "entry_id": entry_id}
            assert client.post(f"/items/{item_id}/decision", json=body).status_code == 200
        response = client.post("/retrain")
        assert response.status_code == 409
        assert response.json()["code"] == "conflicting_ground_truth"


class TestAutoAccept:
    def test_qualified_items_skip_review(self, litter_schema):
        client = _client(litter_schema, auto_accept=True)
        run = _submit(client)
        statuses = {i["result"]["source_column"]: i["status"] for i in run["items"]}
        assert statuses == {"straw": "accepted", "derelict gear": "pending"}
        pending = client.get(f"/runs/{run['run_id']}/pending").json()
        assert [i["result"]["source_column"] for i in pending] == ["derelict gear"]


class TestSchemaEndpoint:
    def test_matches_canonical_serialization(self, litter_schema):
        payload = _client(litter_schema).get("/schema").json()
        assert payload == json.loads(schema_to_json(litter_schema))

    def test_allows_cross_origin_requests(self, litter_schema):
        response = _client(litter_schema).get("/schema", headers={"Origin": "http://elsewhere"})
        assert response.headers["access-control-allow-origin"] == "*"


class TestJournals:
    def _decided_service(self, litter_schema, tmp_path):
        client = _client(litter_schema, log_dir=tmp_path)
        run = _submit(client)
        client.post(f"/items/{run['items'][0]['item_id']}/decision", json={"action": "accept"})
        body = {"action": "override", "entry_id": "e0014"}
        client.post(f"/items/{run['items'][1]['item_id']}/decision", json=body)
        client.post("/retrain")
        return client

    def test_journal_files_written(self, litter_schema, tmp_path):
        self._decided_service(litter_schema, tmp_path)
        decisions = (tmp_path / "decisions.ndjson").read_text(encoding="utf-8").splitlines()
        events = (tmp_path / "events.ndjson").read_text(encoding="utf-8").splitlines()
        assert len(decisions) == 2
        assert json.loads(decisions[0])["item_id"] == "i000001"
        kinds = [json.loads(line)["event"] for line in events]
        assert kinds == ["run", "retrain"]

    def test_replay_restores_state(self, litter_schema, tmp_path):
        self._decided_service(litter_schema, tmp_path)
        replayed = ReviewService(litter_schema, log_dir=tmp_path)
        assert replayed.version == 1
        assert len(replayed.records) == 2
        assert replayed.items["i000001"].status == "accepted"
        assert replayed.items["i000002"].status == "overridden"
        assert replayed.classifier is not None

    def test_replay_reconstructs_identical_centroids(self, litter_schema, tmp_path):
        client = self._decided_service(litter_schema, tmp_path)
        live = client.app.state.service.classifier
        replayed = ReviewService(litter_schema, log_dir=tmp_path).classifier
        assert replayed.entry_ids == live.entry_ids
        assert np.array_equal(replayed.centroids, live.centroids)

    def test_replay_continues_id_sequences(self, litter_schema, tmp_path):
        self._decided_service(litter_schema, tmp_path)
        client = _client(litter_schema, log_dir=tmp_path)
        run = _submit(client)
        assert run["run_id"] == "r0002"
        assert run["items"][0]["item_id"] == "i000003"

    def test_decisions_after_last_retrain_stay_out_of_the_classifier(self, litter_schema, tmp_path):
        client = self._decided_service(litter_schema, tmp_path)
        run = _submit(client)
        body = {"action": "override", "entry_id": "e0021"}
        client.post(f"/items/{run['items'][0]['item_id']}/decision", json=body)
        replayed = ReviewService(litter_schema, log_dir=tmp_path)
        assert len(replayed.records) == 3
        assert replayed.version == 1
        assert len(replayed.classifier.entry_ids) == 2

    def test_decision_log_round_trip(self, litter_schema, tmp_path):
        client = self._decided_service(litter_schema, tmp_path)
        records = load_decision_log(tmp_path / "decisions.ndjson")
        assert records == client.app.state.service.records
