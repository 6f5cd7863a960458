"""Regenerate the recorded service session the frontend tests replay.

Trains the small fixture model deterministically, stands the service up
in-process, and captures the exact bytes of each response the UI
round-trip exercises. Rerunning this script reproduces the file
byte-for-byte.
"""

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from fastapi.testclient import TestClient

from aspectsum import TrainConfig, load_corpus, load_embeddings, train
from aspectsum.corpus import load_aspect_specs
from aspectsum.evaluation import corpus_silver_labels
from aspectsum.mil import save_model
from aspectsum.config import AppConfig
from aspectsum.records import load_state
from aspectsum.service import create_app
from aspectsum.synthesis import SynthConfig

FIXTURES = ROOT / "tests" / "fixtures"
OUT = ROOT / "frontend" / "tests" / "fixtures" / "recorded-session.json"

ENTITY = "h1"
TOGGLE_SEQUENCES = {
    "location": ["location"],
    "location+rooms": ["location", "rooms"],
    "all": ["building", "cleanliness", "food", "location", "rooms", "service"],
}


def main() -> None:
    specs = load_aspect_specs(FIXTURES / "hotel_aspects.jsonl")
    corpus = load_corpus(FIXTURES / "hotel_reviews.jsonl", specs)
    table = load_embeddings(FIXTURES / "hotel_embeddings_16d.txt")
    config = TrainConfig(learning_rate=5e-3, steps=400, heads=4,
                         warmup_steps=40, seed=0, log_every=10**9)
    model = train(corpus, corpus_silver_labels(corpus), table, config)

    with tempfile.TemporaryDirectory() as tmp:
        model_path = Path(tmp) / "fixture.model"
        save_model(model, model_path)
        app_config = AppConfig(
            corpus_path=FIXTURES / "hotel_reviews.jsonl",
            aspects_path=FIXTURES / "hotel_aspects.jsonl",
            embeddings_path=FIXTURES / "hotel_embeddings_16d.txt",
            model_path=model_path)
        # the fixture entities hold 55-105 tokens, so the default 500-token
        # pool cut never binds and every query would return the same
        # sentences; a 40-token pool makes the toggles actually matter
        app_config.synth = SynthConfig(token_budget=40)
        state = load_state(app_config)
        client = TestClient(create_app(state))

        session = {
            "entities": json.loads(client.get("/entities").content),
            "aspects": json.loads(client.get("/aspects").content),
            "summaries": {},
        }
        for name, aspects in TOGGLE_SEQUENCES.items():
            payload = {"entity_id": ENTITY, "aspects": aspects}
            response = client.post("/summarize", json=payload)
            response.raise_for_status()
            session["summaries"][name] = {
                "request": payload,
                "response": json.loads(response.content),
            }

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(session, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
