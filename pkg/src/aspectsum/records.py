"""Shared request path for the CLI and the HTTP service.

Both front ends resolve aspect names, summarize, and serialize through
the functions here, so a summary requested over HTTP is byte-identical
to the one printed by the command line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .config import AppConfig
from .corpus import Corpus, load_aspect_specs, load_corpus
from .embeddings import EmbeddingTable, load_embeddings
from .errors import CorpusError, SummarizerError
from .mil import MilModel, load_model, model_fingerprint
from .summarizer import LexRankConfig, Query, Summary, summarize
from .synthesis import SynthConfig


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, compact separators, raw unicode."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class AppState:
    """Everything a summarize request needs, loaded once and never mutated."""

    corpus: Corpus
    table: EmbeddingTable
    model: MilModel
    synth_config: SynthConfig
    lexrank_config: LexRankConfig
    model_version: str


def load_state(config: AppConfig) -> AppState:
    config.require("corpus_path", "aspects_path", "embeddings_path", "model_path")
    aspect_specs = load_aspect_specs(config.aspects_path)
    corpus = load_corpus(config.corpus_path, aspect_specs)
    table = load_embeddings(config.embeddings_path)
    model = load_model(config.model_path)
    if model.n_aspects != corpus.n_aspects:
        raise CorpusError(
            f"model predicts {model.n_aspects} aspects but the aspect file "
            f"defines {corpus.n_aspects}")
    if model.dim != table.dim:
        raise CorpusError(
            f"model dimension {model.dim} does not match embeddings ({table.dim})")
    return AppState(corpus=corpus, table=table, model=model,
                    synth_config=config.synth, lexrank_config=config.lexrank,
                    model_version=model_fingerprint(config.model_path))


def resolve_query(state: AppState, aspect_names: list[str]) -> Query:
    """Aspect names to a query; an empty list means a general summary."""
    n_aspects = state.corpus.n_aspects
    if not aspect_names:
        return Query.general(n_aspects)
    by_name = {spec.name: spec.aspect_id for spec in state.corpus.aspect_specs}
    codes = set()
    for name in aspect_names:
        if name not in by_name:
            raise SummarizerError(
                f"unknown aspect {name!r}; available: {', '.join(sorted(by_name))}")
        codes.add(by_name[name])
    return Query.from_codes(codes, n_aspects)


def summary_record(state: AppState, entity_id: str, aspect_names: list[str]) -> dict:
    """The wire/CLI record for one summarize request."""
    if entity_id not in state.corpus.entities:
        known = ", ".join(state.corpus.entity_ids[:10])
        raise CorpusError(f"unknown entity {entity_id!r}; available: {known}")
    query = resolve_query(state, aspect_names)
    summary = summarize(state.corpus.get_entity(entity_id), query, state.model,
                        state.table, state.synth_config, state.lexrank_config)
    return summary_to_record(summary, state, entity_id)


def summary_to_record(summary: Summary, state: AppState, entity_id: str) -> dict:
    names = {spec.aspect_id: spec.name for spec in state.corpus.aspect_specs}
    return {
        "entity_id": entity_id,
        "codes": sorted(summary.codes),
        "aspects": [names[c] for c in sorted(summary.codes)],
        "sentences": [
            {"text": s.text, "review_id": s.review_id,
             "sentence_index": s.sentence_index, "salience": s.salience}
            for s in summary.sentences
        ],
        "token_count": summary.token_count,
        "model_version": state.model_version,
    }
