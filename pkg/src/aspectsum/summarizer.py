"""Extractive summarization: controller-ranked sentence pools fed to
LexRank, plus two cheap reference baselines.

Pipeline: select_pool ranks every input sentence against the queried
aspect codes and keeps the best 500 tokens; lexrank scores the pool by
graph centrality; extract_summary greedily assembles a short,
non-redundant summary presented in document order.

All numeric knobs live in LexRankConfig. Damping 0.85, similarity
threshold 0.1, and the 75-token summary budget follow common LexRank
practice; none of them is forced by the model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import AspectSpec, Review, Sentence
from .embeddings import EmbeddingTable, encode, sentence_repr
from .errors import SummarizerError
from .mil import MilModel
from .synthesis import RankedSentence, SynthConfig, rank_sentences


@dataclass(frozen=True)
class Query:
    """Aspect indicator vector; at least one indicator must be set."""

    indicators: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indicators", tuple(int(q) for q in self.indicators))
        if any(q not in (0, 1) for q in self.indicators):
            raise SummarizerError("query indicators must be 0 or 1")
        if not any(self.indicators):
            raise SummarizerError("query must select at least one aspect")

    @classmethod
    def from_codes(cls, codes, n_aspects: int) -> "Query":
        codes = set(int(c) for c in codes)
        bad = [c for c in codes if not 0 <= c < n_aspects]
        if bad:
            raise SummarizerError(f"aspect codes out of range: {sorted(bad)}")
        return cls(tuple(1 if a in codes else 0 for a in range(n_aspects)))

    @classmethod
    def general(cls, n_aspects: int) -> "Query":
        return cls((1,) * n_aspects)

    @property
    def codes(self) -> frozenset[int]:
        return frozenset(a for a, q in enumerate(self.indicators) if q)


@dataclass
class LexRankConfig:
    damping: float = 0.85
    similarity_threshold: float = 0.1
    max_iterations: int = 100
    convergence_tol: float = 1e-6
    summary_token_budget: int = 75
    redundancy_threshold: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise SummarizerError("damping must lie in (0, 1)")
        if self.max_iterations <= 0 or self.summary_token_budget <= 0:
            raise SummarizerError("max_iterations and summary_token_budget must be positive")
        if self.convergence_tol <= 0.0:
            raise SummarizerError("convergence_tol must be positive")


@dataclass(frozen=True)
class SummarySentence:
    text: str
    review_id: str
    sentence_index: int
    salience: float


@dataclass
class Summary:
    sentences: list[SummarySentence]
    token_count: int
    codes: frozenset[int]

    def __post_init__(self):
        keys = [(s.review_id, s.sentence_index) for s in self.sentences]
        if len(set(keys)) != len(keys):
            raise SummarizerError("duplicate sentence in summary")

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


def _tokens_of(sentence) -> tuple[str, ...]:
    return tuple(sentence.tokens) if hasattr(sentence, "tokens") else tuple(sentence)


def _repr_or_zero(tokens: Sequence[str], table: EmbeddingTable) -> np.ndarray:
    if not tokens:
        return np.zeros(table.dim)
    return sentence_repr(encode(tokens, table))


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        # zero vectors (all-OOV sentences) compare as dissimilar
        return 0.0
    return float(u @ v / (nu * nv))


def sentence_similarity(s1, s2, table: EmbeddingTable) -> float:
    return _cosine(_repr_or_zero(_tokens_of(s1), table),
                   _repr_or_zero(_tokens_of(s2), table))


def select_pool(entity_reviews: list[Review], query: Query, model: MilModel,
                table: EmbeddingTable,
                config: SynthConfig | None = None) -> list[RankedSentence]:
    """Candidate sentences for the query, best-matching first, within the
    controller token budget."""
    config = config or SynthConfig()
    return rank_sentences(entity_reviews, query.codes, model, table, config)


def _similarity_matrix(reprs: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(reprs, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = reprs / safe[:, None]
    sim = unit @ unit.T
    sim[norms == 0.0, :] = 0.0
    sim[:, norms == 0.0] = 0.0
    return sim


def lexrank(sentences, table: EmbeddingTable, config: LexRankConfig | None = None) -> np.ndarray:
    """Graph-centrality salience over a binary similarity graph.

    Edges connect pairs (self-pairs included) with cosine similarity at
    or above the threshold; the transition matrix is the row-normalized
    adjacency; p iterates to the damped stationary distribution. Rows
    with no edges at all (all-OOV sentences) have their mass spread
    uniformly so p stays a probability vector.
    """
    config = config or LexRankConfig()
    if not sentences:
        raise SummarizerError("lexrank needs at least one sentence")
    reprs = np.stack([_repr_or_zero(_tokens_of(s), table) for s in sentences])
    sim = _similarity_matrix(reprs)
    adjacency = (sim >= config.similarity_threshold).astype(np.float64)
    degrees = adjacency.sum(axis=1)
    dangling = degrees == 0.0
    transition = np.divide(adjacency, np.where(dangling, 1.0, degrees)[:, None])

    n = len(sentences)
    p = np.full(n, 1.0 / n)
    teleport = (1.0 - config.damping) / n
    for _ in range(config.max_iterations):
        flow = transition.T @ p + float(p[dangling].sum()) / n
        p_next = config.damping * flow + teleport
        if float(np.abs(p_next - p).sum()) < config.convergence_tol:
            p = p_next
            break
        p = p_next
    return p


def extract_summary(pool: list[RankedSentence], scores: np.ndarray,
                    table: EmbeddingTable,
                    config: LexRankConfig | None = None,
                    codes: frozenset[int] = frozenset()) -> Summary:
    """Greedy assembly: descending salience, redundancy-filtered, cut at
    the summary budget, presented in document order."""
    config = config or LexRankConfig()
    if len(pool) != len(scores):
        raise SummarizerError("pool and salience scores are misaligned")
    if not pool:
        return Summary(sentences=[], token_count=0, codes=codes)

    reprs = np.stack([_repr_or_zero(s.tokens, table) for s in pool])
    order = sorted(range(len(pool)), key=lambda i: (-float(scores[i]), i))
    chosen: list[int] = []
    used = 0
    for i in order:
        if any(_cosine(reprs[i], reprs[j]) > config.redundancy_threshold for j in chosen):
            continue
        if used + len(pool[i].tokens) > config.summary_token_budget:
            break
        chosen.append(i)
        used += len(pool[i].tokens)

    chosen.sort(key=lambda i: (pool[i].review_pos, pool[i].sentence_index))
    sentences = [SummarySentence(text=pool[i].surface, review_id=pool[i].review_id,
                                 sentence_index=pool[i].sentence_index,
                                 salience=float(scores[i]))
                 for i in chosen]
    return Summary(sentences=sentences, token_count=used, codes=codes)


def summarize(entity_reviews: list[Review], query: Query, model: MilModel,
              table: EmbeddingTable, synth_config: SynthConfig | None = None,
              lexrank_config: LexRankConfig | None = None) -> Summary:
    lexrank_config = lexrank_config or LexRankConfig()
    pool = select_pool(entity_reviews, query, model, table, synth_config)
    if not pool:
        return Summary(sentences=[], token_count=0, codes=query.codes)
    scores = lexrank(pool, table, lexrank_config)
    return extract_summary(pool, scores, table, lexrank_config, codes=query.codes)


def seed_filter_baseline(sentences: list[Sentence], aspect_spec: AspectSpec,
                         table: EmbeddingTable) -> list[tuple[Sentence, float]]:
    """Sentences scored by their best token-to-seed cosine, best first.

    Equal scores keep input order.
    """
    seed_vecs = [table.lookup(seed) for seed in aspect_spec.seeds]
    scored = []
    for sentence in sentences:
        best = 0.0
        for token in sentence.tokens:
            vec = table.lookup(token)
            for seed_vec in seed_vecs:
                best = max(best, _cosine(vec, seed_vec))
        scored.append((sentence, best))
    scored.sort(key=lambda pair: -pair[1])
    return scored


def centroid_baseline(entity_reviews: list[Review], table: EmbeddingTable) -> Review:
    """The review whose embedding mean sits closest to the entity centroid."""
    if not entity_reviews:
        raise SummarizerError("centroid baseline needs at least one review")
    reprs = np.stack([
        np.mean([_repr_or_zero(s.tokens, table) for s in review.sentences], axis=0)
        for review in entity_reviews])
    centroid = reprs.mean(axis=0)
    best = min(range(len(entity_reviews)),
               key=lambda i: (1.0 - _cosine(reprs[i], centroid),
                              entity_reviews[i].review_id))
    return entity_reviews[best]
