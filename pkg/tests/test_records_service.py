import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from aspectsum import __version__, save_model
from aspectsum.config import AppConfig
from aspectsum.errors import ConfigError, CorpusError, SummarizerError
from aspectsum.records import (AppState, canonical_json, load_state,
                               resolve_query, summary_record)
from aspectsum.service import create_app
from aspectsum.summarizer import LexRankConfig
from aspectsum.synthesis import SynthConfig
from conftest import FIXTURES


@pytest.fixture(scope="module")
def app_config(hotel_model_path):
    return AppConfig(
        corpus_path=FIXTURES / "hotel_reviews.jsonl",
        aspects_path=FIXTURES / "hotel_aspects.jsonl",
        embeddings_path=FIXTURES / "hotel_embeddings_16d.txt",
        model_path=hotel_model_path,
    )


@pytest.fixture(scope="module")
def state(app_config):
    return load_state(app_config)


@pytest.fixture(scope="module")
def client(state):
    return TestClient(create_app(state))


class TestCanonicalJson:
    def test_sorted_compact(self):
        assert canonical_json({"b": 1, "a": [2, 3]}) == '{"a":[2,3],"b":1}'

    def test_unicode_not_escaped(self):
        assert canonical_json({"t": "café"}) == '{"t":"café"}'

    def test_deterministic_across_insertion_orders(self):
        a = {"x": 1, "y": {"q": 2, "p": 3}}
        b = {"y": {"p": 3, "q": 2}, "x": 1}
        assert canonical_json(a) == canonical_json(b)


class TestLoadState:
    def test_loads(self, state):
        assert state.corpus.n_aspects == 6
        assert len(state.model_version) == 8
        assert state.synth_config == SynthConfig()
        assert state.lexrank_config == LexRankConfig()

    def test_missing_path(self):
        with pytest.raises(ConfigError):
            load_state(AppConfig())

    def test_aspect_count_mismatch(self, app_config, hotel_table, tmp_path):
        from aspectsum.mil import init_model
        bad = init_model(dim=16, n_aspects=3, heads=2, seed=0)
        bad_path = tmp_path / "bad.model"
        save_model(bad, bad_path)
        config = AppConfig(corpus_path=app_config.corpus_path,
                           aspects_path=app_config.aspects_path,
                           embeddings_path=app_config.embeddings_path,
                           model_path=bad_path)
        with pytest.raises(CorpusError, match="aspect"):
            load_state(config)

    def test_dim_mismatch(self, app_config, tmp_path):
        from aspectsum.mil import init_model
        bad = init_model(dim=8, n_aspects=6, heads=2, seed=0)
        bad_path = tmp_path / "bad.model"
        save_model(bad, bad_path)
        config = AppConfig(corpus_path=app_config.corpus_path,
                           aspects_path=app_config.aspects_path,
                           embeddings_path=app_config.embeddings_path,
                           model_path=bad_path)
        with pytest.raises(CorpusError, match="dimension"):
            load_state(config)


class TestResolveQuery:
    def test_empty_means_general(self, state):
        query = resolve_query(state, [])
        assert query.codes == frozenset(range(6))

    def test_names_to_codes(self, state):
        query = resolve_query(state, ["cleanliness", "rooms"])
        assert query.codes == {1, 4}

    def test_unknown_name_lists_available(self, state):
        with pytest.raises(SummarizerError, match="breakfast.*building"):
            resolve_query(state, ["breakfast"])

    def test_duplicates_collapse(self, state):
        assert resolve_query(state, ["food", "food"]).codes == {2}


class TestSummaryRecord:
    def test_record_shape(self, state):
        record = summary_record(state, "h1", ["location"])
        assert record["entity_id"] == "h1"
        assert record["codes"] == [3]
        assert record["aspects"] == ["location"]
        assert record["model_version"] == state.model_version
        assert record["token_count"] <= 75
        for sent in record["sentences"]:
            assert set(sent) == {"text", "review_id", "sentence_index", "salience"}

    def test_general_record_lists_all_aspects(self, state):
        record = summary_record(state, "h2", [])
        assert record["codes"] == list(range(6))

    def test_unknown_entity(self, state):
        with pytest.raises(CorpusError, match="h1"):
            summary_record(state, "nope", [])

    def test_sentences_verbatim(self, state):
        record = summary_record(state, "h3", [])
        source = {s.raw for r in state.corpus.get_entity("h3")
                  for s in r.sentences}
        for sent in record["sentences"]:
            assert sent["text"] in source


class TestService:
    def test_health(self, client, state):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body == {"status": "ok", "version": __version__,
                        "model_version": state.model_version}

    def test_entities(self, client):
        body = client.get("/entities").json()
        ids = [e["entity_id"] for e in body["entities"]]
        assert ids == ["h1", "h2", "h3", "h4", "h5"]
        assert all(e["n_reviews"] == 4 for e in body["entities"])

    def test_aspects(self, client):
        body = client.get("/aspects").json()
        assert [a["name"] for a in body["aspects"]] == \
            ["building", "cleanliness", "food", "location", "rooms", "service"]
        assert [a["aspect_id"] for a in body["aspects"]] == list(range(6))
        clean = body["aspects"][1]
        assert clean["seeds"] == sorted(["clean", "spotless", "garbage",
                                         "dirty", "stain"])

    def test_summarize_ok(self, client, state):
        response = client.post("/summarize",
                               json={"entity_id": "h1", "aspects": ["rooms"]})
        assert response.status_code == 200
        assert response.json() == summary_record(state, "h1", ["rooms"])

    def test_summarize_unknown_entity_404(self, client):
        response = client.post("/summarize", json={"entity_id": "zzz"})
        assert response.status_code == 404
        assert "zzz" in response.json()["detail"]

    def test_summarize_unknown_aspect_400(self, client):
        response = client.post("/summarize",
                               json={"entity_id": "h1", "aspects": ["pool"]})
        assert response.status_code == 400
        assert "pool" in response.json()["detail"]

    def test_summarize_malformed_422(self, client):
        assert client.post("/summarize", json={}).status_code == 422
        assert client.post("/summarize",
                           json={"entity_id": 5}).status_code == 422

    def test_repeat_requests_byte_identical(self, client):
        payload = {"entity_id": "h4", "aspects": ["service"]}
        first = client.post("/summarize", json=payload).content
        second = client.post("/summarize", json=payload).content
        assert first == second

    def test_body_is_canonical_json(self, client, state):
        response = client.post("/summarize",
                               json={"entity_id": "h5", "aspects": []})
        record = summary_record(state, "h5", [])
        assert response.content.decode("utf-8") == canonical_json(record)

    def test_get_bodies_canonical(self, client):
        body = client.get("/aspects").content.decode("utf-8")
        assert body == canonical_json(json.loads(body))
