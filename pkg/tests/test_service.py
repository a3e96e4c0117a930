"""HTTP endpoints: payload shapes, validation, error mapping, concurrency."""

import json
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from helpers import ScriptedLM
from lfqa.errors import TransportError
from lfqa.service import canonical_json, create_app


QUESTION = "where was george lopez born"


@pytest.fixture()
def client(engine):
    return TestClient(create_app(engine))


class FailingMRC:
    def predict_span(self, question, passage):
        raise TransportError("reader service unreachable")


# -- health ---------------------------------------------------------------


def test_health_reports_builtin_providers(client, engine):
    resp = client.get("/v1/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["passages"] == len(engine.passages)
    for name in ("lm", "embeddings", "mrc"):
        assert body["providers"][name] == {
            "kind": "builtin", "url": None, "reachable": True,
        }
    assert body["providers"]["mrc2"] is None


# -- /v1/query -----------------------------------------------------------


def test_query_matches_engine_json(client, engine):
    resp = client.post("/v1/query", json={"question": QUESTION, "seed": 0})
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("application/json")
    want = canonical_json(engine.answer_question(QUESTION, seed=0).to_dict())
    assert resp.text == want


def test_query_defaults_seed_zero(client):
    explicit = client.post("/v1/query", json={"question": QUESTION, "seed": 0})
    defaulted = client.post("/v1/query", json={"question": QUESTION})
    assert defaulted.text == explicit.text


def test_query_mode_override(client):
    resp = client.post("/v1/query", json={"question": QUESTION, "mode": "cgap"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["mode"] == "cgap"
    assert set(body["cgap"]) == {"contexts", "raw_answers", "tally", "final"}


def test_query_n_caps_passages(client):
    resp = client.post("/v1/query", json={"question": QUESTION, "n": 1})
    assert resp.status_code == 200
    assert len(resp.json()["passages"]) == 1


def test_query_rejects_blank_question(client):
    for payload in ({}, {"question": ""}, {"question": "   "}, {"question": 5}):
        resp = client.post("/v1/query", json=payload)
        assert resp.status_code == 400
        assert "question" in resp.json()["error"]


def test_query_rejects_unknown_mode(client):
    resp = client.post("/v1/query", json={"question": QUESTION, "mode": "chat"})
    assert resp.status_code == 400
    assert "mode" in resp.json()["error"]


def test_query_rejects_non_integer_seed(client):
    for seed in ("7", 1.5, True):
        resp = client.post("/v1/query", json={"question": QUESTION, "seed": seed})
        assert resp.status_code == 400
        assert "seed" in resp.json()["error"]


def test_query_rejects_bad_n(client):
    for n in (0, -2, "3", True):
        resp = client.post("/v1/query", json={"question": QUESTION, "n": n})
        assert resp.status_code == 400
        assert "'n'" in resp.json()["error"]


def test_query_rejects_non_object_body(client):
    resp = client.post(
        "/v1/query", content=b"[1,2]", headers={"Content-Type": "application/json"}
    )
    assert resp.status_code == 400
    resp = client.post(
        "/v1/query", content=b"not json", headers={"Content-Type": "application/json"}
    )
    assert resp.status_code == 400


def test_query_provider_failure_maps_to_502(engine):
    engine.mrc = FailingMRC()
    client = TestClient(create_app(engine))
    resp = client.post("/v1/query", json={"question": QUESTION})
    assert resp.status_code == 502
    assert "provider failure" in resp.json()["error"]
    assert "unreachable" in resp.json()["error"]


def test_query_no_results_passthrough(client):
    resp = client.post("/v1/query", json={"question": "zzyqx vvwwk"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["no_results"] is True
    assert body["passages"] == []


# -- /v1/retrieve -------------------------------------------------------------


def test_retrieve_hits_shape(client, engine):
    resp = client.post("/v1/retrieve", json={"question": QUESTION, "n": 5})
    assert resp.status_code == 200
    body = resp.json()
    assert body["question"] == QUESTION
    want = engine.retrieve(QUESTION, 5)
    assert body["hits"] == [
        {"ref": h.ref, "score": h.score, "method": h.method} for h in want
    ]


def test_retrieve_defaults_to_config_n(client):
    resp = client.post("/v1/retrieve", json={"question": QUESTION})
    assert resp.status_code == 200


def test_retrieve_validates_input(client):
    assert client.post("/v1/retrieve", json={"question": ""}).status_code == 400
    assert client.post(
        "/v1/retrieve", json={"question": QUESTION, "n": 0}
    ).status_code == 400


# -- /v1/cgap ---------------------------------------------------------------------


def test_cgap_endpoint_shape(engine):
    engine.lm = ScriptedLM(["c1", "c2", "a one", "a one"])
    client = TestClient(create_app(engine))
    resp = client.post("/v1/cgap", json={"question": QUESTION, "seed": 4, "k": 2})
    assert resp.status_code == 200
    body = resp.json()
    assert body["question"] == QUESTION
    assert body["seed"] == 4
    assert body["contexts"] == ["c1", "c2"]
    assert body["raw_answers"] == ["a one", "a one"]
    assert body["tally"] == [["one", 2]]
    assert body["final"] == "a one"


def test_cgap_endpoint_validates_input(client):
    assert client.post("/v1/cgap", json={"question": ""}).status_code == 400
    assert client.post(
        "/v1/cgap", json={"question": QUESTION, "seed": "x"}
    ).status_code == 400
    assert client.post(
        "/v1/cgap", json={"question": QUESTION, "k": 0}
    ).status_code == 400


def test_cgap_endpoint_deterministic(client):
    a = client.post("/v1/cgap", json={"question": QUESTION, "seed": 1, "k": 2})
    b = client.post("/v1/cgap", json={"question": QUESTION, "seed": 1, "k": 2})
    assert a.text == b.text


# -- cross-endpoint and concurrency ------------------------------------------------


def test_query_byte_identical_across_calls(client):
    bodies = {
        client.post("/v1/query", json={"question": QUESTION, "seed": 2}).text
        for _ in range(3)
    }
    assert len(bodies) == 1


def test_concurrent_queries_identical(client):
    def one(_):
        return client.post("/v1/query", json={"question": QUESTION, "seed": 0}).text

    with ThreadPoolExecutor(max_workers=16) as pool:
        bodies = set(pool.map(one, range(16)))
    assert len(bodies) == 1
    json.loads(next(iter(bodies)))


def test_unknown_route_is_404(client):
    assert client.get("/v2/query").status_code == 404
