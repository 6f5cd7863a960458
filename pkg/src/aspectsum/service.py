"""Read-only HTTP face of the summarizer.

Endpoints: GET /health, GET /entities, GET /aspects, POST /summarize.
All state is loaded once at startup and never mutated; identical
requests produce byte-identical bodies because every response is
serialized with the same canonical JSON writer the CLI uses.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel

from . import __version__
from .config import AppConfig
from .errors import CorpusError, SummarizerError
from .records import AppState, canonical_json, load_state, summary_record


class SummarizeRequest(BaseModel):
    entity_id: str
    aspects: list[str] = []


def _json(payload) -> Response:
    return Response(content=canonical_json(payload), media_type="application/json")


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="aspectsum", version=__version__)
    # the browser UI is served from a different origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.get("/health")
    def health():
        return _json({"status": "ok", "version": __version__,
                      "model_version": state.model_version})

    @app.get("/entities")
    def entities():
        return _json({"entities": [
            {"entity_id": entity_id, "n_reviews": len(reviews)}
            for entity_id, reviews in state.corpus.entities.items()
        ]})

    @app.get("/aspects")
    def aspects():
        return _json({"aspects": [
            {"aspect_id": spec.aspect_id, "name": spec.name,
             "seeds": sorted(spec.seeds)}
            for spec in state.corpus.aspect_specs
        ]})

    @app.post("/summarize")
    def summarize_endpoint(request: SummarizeRequest):
        try:
            record = summary_record(state, request.entity_id, request.aspects)
        except CorpusError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except SummarizerError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return _json(record)

    return app


def serve(config: AppConfig) -> None:
    import uvicorn

    state = load_state(config)
    uvicorn.run(create_app(state), host=config.host, port=config.port)
