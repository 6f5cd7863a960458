"""Synthetic training data: pseudo-summary sampling, sentence ranking,
keyword induction, and the controller string format.

A review qualifies as a pseudo-summary when the model predicts at least
one positive aspect for it; the entity's remaining reviews become the
input set. Sentences and tokens of the input set are scored against the
summary's aspect codes with the same soft-margin function used in
training (lower is better), producing the ranked sentence block and the
keyword list of the controller.

Controller strings look like

    [CODE] [ASPECT_2] [ASPECT_3] [KEY] k1 k2 [SNT] first one [SNT] second

with single spaces throughout and no trailing whitespace. Dataset files
are TSV with a header row: entity_id, summary_text, controller_string,
input_review_ids (comma-separated). Review text is whitespace-normalized
at load time, so fields never contain tabs or newlines.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import AspectSpec, Corpus, Review
from .embeddings import EmbeddingTable
from .errors import ControllerParseError, SynthesisError
from .mil import MilModel, forward, predict_document_aspects

_ASPECT_MARKER_RE = re.compile(r"\[ASPECT_(\d+)\]$")
_MARKER_LIKE_RE = re.compile(r"\[[A-Z0-9_]+\]$")

DATASET_HEADER = ("entity_id", "summary_text", "controller_string", "input_review_ids")


@dataclass
class SynthConfig:
    keyword_count: int = 10
    token_budget: int = 500
    max_examples_per_entity: int = 4
    seed: int = 0
    # score sentences/tokens against the sign of the summary's document
    # prediction (default) or against the continuous prediction itself
    continuous_targets: bool = False

    def __post_init__(self):
        if self.keyword_count <= 0 or self.token_budget <= 0 or self.max_examples_per_entity <= 0:
            raise SynthesisError("keyword_count, token_budget, max_examples_per_entity must be positive")


@dataclass
class ControllerSet:
    """Aspect codes, keywords, and the ranked sentence block."""

    codes: frozenset[int]
    keywords: tuple[str, ...] = ()
    sentences: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "codes", frozenset(int(c) for c in self.codes))
        object.__setattr__(self, "keywords", tuple(self.keywords))
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if len(set(self.keywords)) != len(self.keywords):
            raise SynthesisError("duplicate keywords in controller set")


@dataclass
class RankedSentence:
    """A pool sentence with provenance and its aspect-match score."""

    review_id: str
    review_pos: int
    sentence_index: int
    surface: str
    tokens: tuple[str, ...]
    score: float


@dataclass
class SyntheticExample:
    entity_id: str
    summary: Review
    inputs: list[Review]
    controllers: ControllerSet

    def __post_init__(self):
        if not self.inputs:
            raise SynthesisError("synthetic example needs a non-empty input set")
        if any(r.review_id == self.summary.review_id for r in self.inputs):
            raise SynthesisError("pseudo-summary must not appear among its inputs")


@dataclass
class DatasetStats:
    per_entity: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.per_entity.values())


def _entity_rng(seed: int, entity_id: str) -> np.random.Generator:
    # stable per-entity stream: independent of entity processing order
    return np.random.default_rng(
        np.random.SeedSequence([seed, zlib.crc32(entity_id.encode("utf-8"))]))


def sample_pseudo_summaries(entity_reviews: list[Review], model: MilModel,
                            table: EmbeddingTable, config: SynthConfig):
    """Pick up to max_examples_per_entity (summary, inputs) pairs.

    Candidates are visited in seeded random order; a review qualifies iff
    its document prediction is positive for at least one aspect.
    """
    if len(entity_reviews) < 2:
        raise SynthesisError("entity needs at least 2 reviews to form an example")
    rng = _entity_rng(config.seed, entity_reviews[0].entity_id)
    order = rng.permutation(len(entity_reviews))
    pairs = []
    for idx in order:
        if len(pairs) >= config.max_examples_per_entity:
            break
        candidate = entity_reviews[idx]
        if predict_document_aspects(candidate, table, model):
            inputs = [r for r in entity_reviews if r.review_id != candidate.review_id]
            pairs.append((candidate, inputs))
    return pairs


def _target_vector(target, n_aspects: int) -> np.ndarray:
    if isinstance(target, np.ndarray):
        if target.shape != (n_aspects,):
            raise SynthesisError(f"target vector must have shape ({n_aspects},)")
        return target.astype(np.float64)
    return np.where(np.isin(np.arange(n_aspects), sorted(target)), 1.0, -1.0)


def _margin_score(pred: np.ndarray, target_vec: np.ndarray) -> float:
    return float(np.logaddexp(0.0, -pred * target_vec).sum())


def aspect_match_score(pred: np.ndarray, target_codes: set[int]) -> float:
    """Soft-margin distance between a prediction row and a code set.

    The target vector is +1 on the codes and -1 elsewhere; lower is a
    better aspect match.
    """
    pred = np.asarray(pred, dtype=np.float64)
    return _margin_score(pred, _target_vector(set(target_codes), pred.shape[0]))


def rank_sentences(inputs: list[Review], target, model: MilModel,
                   table: EmbeddingTable, config: SynthConfig) -> list[RankedSentence]:
    """All input sentences in ascending score order, cut to the token budget.

    `target` is a code set (scored against its ±1 vector) or a raw
    document-prediction vector when continuous targets are configured.
    Ties break by (review position, sentence index). The ranked list is
    cut at the first sentence that would cross the budget; that sentence
    is dropped whole, never clipped.
    """
    target_vec = _target_vector(target, model.n_aspects)
    scored = []
    for pos, review in enumerate(inputs):
        preds = forward(review, table, model)
        for sent, row in zip(review.sentences, preds.z_s):
            scored.append(RankedSentence(
                review_id=review.review_id, review_pos=pos,
                sentence_index=sent.index, surface=sent.raw,
                tokens=sent.tokens, score=_margin_score(row, target_vec)))
    scored.sort(key=lambda s: (s.score, s.review_pos, s.sentence_index))

    kept, used = [], 0
    for sent in scored:
        if used + len(sent.tokens) > config.token_budget:
            break
        kept.append(sent)
        used += len(sent.tokens)
    return kept


def extract_keywords(inputs: list[Review], target, model: MilModel,
                     table: EmbeddingTable, config: SynthConfig) -> list[str]:
    """Best-scoring keyword_count token types, ties broken lexicographically.

    Every token occurrence is scored; each type keeps its best (lowest)
    occurrence score.
    """
    target_vec = _target_vector(target, model.n_aspects)
    best: dict[str, float] = {}
    for review in inputs:
        preds = forward(review, table, model)
        tokens = [tok for sent in review.sentences for tok in sent.tokens]
        for tok, row in zip(tokens, preds.z_t):
            score = _margin_score(row, target_vec)
            if tok not in best or score < best[tok]:
                best[tok] = score
    ranked = sorted(best.items(), key=lambda kv: (kv[1], kv[0]))
    return [tok for tok, _ in ranked[:config.keyword_count]]


def serialize_controllers(controllers: ControllerSet,
                          aspect_specs: list[AspectSpec]) -> str:
    """Render the controller string; codes in ascending aspect_id order."""
    if not controllers.codes:
        raise SynthesisError("cannot serialize a controller set without codes")
    n_aspects = len(aspect_specs)
    bad = [c for c in controllers.codes if not 0 <= c < n_aspects]
    if bad:
        raise SynthesisError(f"aspect codes out of range: {sorted(bad)}")
    parts = ["[CODE]"]
    parts.extend(f"[ASPECT_{c}]" for c in sorted(controllers.codes))
    parts.append("[KEY]")
    parts.extend(controllers.keywords)
    for sentence in controllers.sentences:
        parts.append("[SNT]")
        parts.append(sentence)
    return " ".join(parts)


def parse_controllers(text: str, n_aspects: int) -> ControllerSet:
    """Exact inverse of serialize_controllers.

    Raises ControllerParseError (with the byte offset of the offending
    token) on a missing [CODE] header, an unknown marker, an aspect id
    outside [0, n_aspects), or an empty sentence block.
    """
    words = text.split(" ")
    offsets = []
    offset = 0
    for word in words:
        offsets.append(offset)
        offset += len(word.encode("utf-8")) + 1

    if not words or words[0] != "[CODE]":
        raise ControllerParseError("expected [CODE] header", 0)

    codes: set[int] = set()
    keywords: list[str] = []
    sentences: list[list[str]] = []
    section = "codes"
    for word, offset in zip(words[1:], offsets[1:]):
        aspect = _ASPECT_MARKER_RE.match(word)
        if aspect:
            if section != "codes":
                raise ControllerParseError("aspect code after [KEY]", offset)
            aspect_id = int(aspect.group(1))
            if aspect_id >= n_aspects:
                raise ControllerParseError(
                    f"aspect id {aspect_id} out of range (have {n_aspects} aspects)", offset)
            codes.add(aspect_id)
            continue
        if word == "[KEY]":
            if section != "codes":
                raise ControllerParseError("duplicate [KEY] marker", offset)
            section = "keywords"
            continue
        if word == "[SNT]":
            if section == "codes":
                raise ControllerParseError("[SNT] before [KEY]", offset)
            if sentences and not sentences[-1]:
                raise ControllerParseError("empty sentence block", offset)
            section = "sentences"
            sentences.append([])
            continue
        if word == "[CODE]" or _MARKER_LIKE_RE.match(word):
            raise ControllerParseError(f"unknown marker {word!r}", offset)
        if section == "codes":
            raise ControllerParseError(f"expected aspect code or [KEY], got {word!r}", offset)
        if section == "keywords":
            keywords.append(word)
        else:
            sentences[-1].append(word)

    if section == "codes":
        raise ControllerParseError("missing [KEY] marker", len(text.encode("utf-8")))
    if not codes:
        raise ControllerParseError("controller set has no aspect codes", 0)
    if sentences and not sentences[-1]:
        raise ControllerParseError("empty sentence block", len(text.encode("utf-8")))
    try:
        return ControllerSet(codes=frozenset(codes), keywords=tuple(keywords),
                             sentences=tuple(" ".join(s) for s in sentences))
    except SynthesisError as exc:
        raise ControllerParseError(str(exc), 0) from exc


def build_controllers(summary: Review, inputs: list[Review], model: MilModel,
                      table: EmbeddingTable, config: SynthConfig) -> ControllerSet:
    """Controllers for one (summary, inputs) pair."""
    codes = predict_document_aspects(summary, table, model)
    if not codes:
        raise SynthesisError(
            f"review {summary.review_id!r} has no positive aspect; not a valid pseudo-summary")
    if config.continuous_targets:
        target = forward(summary, table, model).z_d
    else:
        target = codes
    keywords = extract_keywords(inputs, target, model, table, config)
    ranked = rank_sentences(inputs, target, model, table, config)
    return ControllerSet(codes=frozenset(codes), keywords=tuple(keywords),
                         sentences=tuple(s.surface for s in ranked))


def build_dataset(corpus: Corpus, model: MilModel, table: EmbeddingTable,
                  config: SynthConfig, out_path) -> DatasetStats:
    """Stream synthetic examples to a TSV file; returns per-entity counts."""
    stats = DatasetStats()
    with Path(out_path).open("w", encoding="utf-8") as handle:
        handle.write("\t".join(DATASET_HEADER) + "\n")
        for entity_id, reviews in corpus.entities.items():
            count = 0
            if len(reviews) >= 2:
                for summary, inputs in sample_pseudo_summaries(reviews, model, table, config):
                    controllers = build_controllers(summary, inputs, model, table, config)
                    line = "\t".join([
                        entity_id,
                        summary.text,
                        serialize_controllers(controllers, corpus.aspect_specs),
                        ",".join(r.review_id for r in inputs),
                    ])
                    handle.write(line + "\n")
                    count += 1
            stats.per_entity[entity_id] = count
    return stats
