"""Review corpora: loading, sentence segmentation, tokenization, seed labeling.

File formats (all UTF-8, one JSON record per line):
  corpus   {"entity_id": str, "review_id": str, "text": str}
  aspects  {"name": str, "seeds": [str, ...]}          # line order = aspect_id
  eval     {"entity_id": str, "reviews": [{"review_id": str, "text": str}],
            "general": [str, ...], "aspects": {name: [str, ...]}}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorpusError

# Tokens that never terminate a sentence even when followed by
# whitespace and a capital letter. Compared lowercase, trailing dot
# stripped. Single capital initials ("J. Smith") are guarded separately.
ABBREVIATIONS = frozenset({
    "mr", "mrs", "ms", "dr", "prof", "st", "vs", "etc", "e.g", "i.e",
    "jr", "sr", "inc", "ltd", "co", "ave", "blvd", "dept", "approx",
    "a.m", "p.m", "u.s", "u.k",
})

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_TERMINAL_RE = re.compile(r"[.!?]+")
_WORD_BEFORE_RE = re.compile(r"([\w.]*\w)$", re.UNICODE)


def normalize_whitespace(text: str) -> str:
    """Collapse all whitespace runs to single spaces and strip the ends."""
    return " ".join(text.split())


def tokenize(sentence_raw: str) -> list[str]:
    """Lowercase tokens split on whitespace/punctuation; punctuation dropped,
    digits kept. "Wi-Fi 5GHz" -> ["wi", "fi", "5ghz"].
    """
    return _TOKEN_RE.findall(sentence_raw.lower())


def _is_abbreviation(text: str, punct_start: int) -> bool:
    match = _WORD_BEFORE_RE.search(text, 0, punct_start)
    if match is None:
        return False
    word = match.group(1).lower()
    if word in ABBREVIATIONS:
        return True
    # single-letter initials: "J." in "J. Smith"
    return len(word) == 1 and word.isalpha()


@dataclass(frozen=True)
class Sentence:
    """One segmented sentence: dense index within its review, lowercase
    tokens, and the original surface string."""

    index: int
    tokens: tuple[str, ...]
    raw: str

    def __post_init__(self):
        if not self.tokens:
            raise CorpusError(f"sentence {self.index} has no tokens: {self.raw!r}")


def split_sentences(text: str) -> list[Sentence]:
    """Deterministic rule-based segmentation of whitespace-normalized text.

    A run of sentence-final punctuation (., !, ?) ends a sentence when
    followed by whitespace and a capital letter, or at end of text. Periods
    after guarded abbreviations never split. Fragments without any token
    (e.g. stray punctuation) are merged into the preceding sentence.
    """
    text = normalize_whitespace(text)
    if not text:
        return []

    boundaries = []
    for match in _TERMINAL_RE.finditer(text):
        end = match.end()
        if end < len(text):
            if not (text[end] == " " and end + 1 < len(text) and text[end + 1].isupper()):
                continue
        if "." in match.group(0) and _is_abbreviation(text, match.start()):
            continue
        boundaries.append(end)

    if not boundaries or boundaries[-1] != len(text):
        boundaries.append(len(text))

    fragments = []
    start = 0
    for end in boundaries:
        fragment = text[start:end].strip()
        if fragment:
            fragments.append(fragment)
        start = end

    # merge token-less fragments so every sentence carries at least one token
    merged: list[str] = []
    for fragment in fragments:
        if merged and not tokenize(fragment):
            merged[-1] = merged[-1] + " " + fragment
        else:
            merged.append(fragment)
    if merged and not tokenize(merged[0]):
        if len(merged) > 1:
            merged[1] = merged[0] + " " + merged[1]
            merged = merged[1:]
        else:
            return []

    return [
        Sentence(index=i, tokens=tuple(tokenize(raw)), raw=raw)
        for i, raw in enumerate(merged)
    ]


@dataclass(frozen=True)
class Review:
    """An entity-grouped review with deterministic segmentation."""

    entity_id: str
    review_id: str
    text: str
    sentences: tuple[Sentence, ...]

    @classmethod
    def from_text(cls, entity_id: str, review_id: str, text: str) -> "Review":
        normalized = normalize_whitespace(text)
        if not normalized:
            raise CorpusError(f"review {review_id!r} is empty after normalization")
        sentences = split_sentences(normalized)
        if not sentences:
            raise CorpusError(f"review {review_id!r} has no tokens")
        return cls(entity_id=entity_id, review_id=review_id, text=normalized,
                   sentences=tuple(sentences))

    @property
    def tokens(self) -> list[str]:
        return [tok for sent in self.sentences for tok in sent.tokens]

    @property
    def token_count(self) -> int:
        return sum(len(sent.tokens) for sent in self.sentences)


@dataclass(frozen=True)
class AspectSpec:
    """A named aspect defined by its seed-word set."""

    aspect_id: int
    name: str
    seeds: frozenset[str]

    def __post_init__(self):
        if not self.seeds:
            raise CorpusError(f"aspect {self.name!r} has no seeds")
        lowered = frozenset(s.lower() for s in self.seeds)
        object.__setattr__(self, "seeds", lowered)


@dataclass
class Corpus:
    """Reviews grouped by entity, with the aspect inventory attached.

    Entities are ordered lexicographically by entity_id, reviews by
    review_id within each entity. Immutable after load.
    """

    domain: str
    entities: dict[str, list[Review]]
    aspect_specs: list[AspectSpec]

    def __post_init__(self):
        if not self.aspect_specs:
            raise CorpusError("corpus needs at least one aspect")
        names = [spec.name for spec in self.aspect_specs]
        if len(set(names)) != len(names):
            raise CorpusError("aspect names must be unique within a domain")

    @property
    def n_aspects(self) -> int:
        return len(self.aspect_specs)

    @property
    def entity_ids(self) -> list[str]:
        return list(self.entities.keys())

    def get_entity(self, entity_id: str) -> list[Review]:
        if entity_id not in self.entities:
            raise CorpusError(f"unknown entity {entity_id!r}")
        return self.entities[entity_id]

    def all_reviews(self) -> list[Review]:
        return [r for reviews in self.entities.values() for r in reviews]

    @property
    def n_reviews(self) -> int:
        return sum(len(v) for v in self.entities.values())

    def aspect_by_name(self, name: str) -> AspectSpec:
        for spec in self.aspect_specs:
            if spec.name == name:
                return spec
        raise CorpusError(
            f"unknown aspect {name!r}; available: "
            + ", ".join(s.name for s in self.aspect_specs))


def _read_json_lines(path):
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path.name} line {lineno}: invalid JSON ({exc})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path.name} line {lineno}: record must be an object")
            yield lineno, record


def _require_str(record: dict, key: str, where: str) -> str:
    value = record.get(key)
    if not isinstance(value, str) or not value:
        raise CorpusError(f"{where}: missing or non-string field {key!r}")
    return value


def load_aspect_specs(path) -> list[AspectSpec]:
    """Load aspect specs; line order defines the aspect_id ordinals."""
    specs = []
    for lineno, record in _read_json_lines(path):
        where = f"{Path(path).name} line {lineno}"
        name = _require_str(record, "name", where)
        seeds = record.get("seeds")
        if not isinstance(seeds, list) or not seeds or not all(isinstance(s, str) for s in seeds):
            raise CorpusError(f"{where}: 'seeds' must be a non-empty array of strings")
        specs.append(AspectSpec(aspect_id=len(specs), name=name, seeds=frozenset(seeds)))
    if not specs:
        raise CorpusError(f"{Path(path).name}: no aspects defined")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise CorpusError(f"{Path(path).name}: duplicate aspect names")
    return specs


def load_corpus(path, aspect_specs: list[AspectSpec], domain: str = "reviews") -> Corpus:
    """Load a line-delimited review corpus.

    Entities come out ordered lexicographically, reviews by review_id.
    Malformed lines and duplicate review ids are rejected by line number.
    """
    by_entity: dict[str, list[Review]] = {}
    seen_ids: set[str] = set()
    for lineno, record in _read_json_lines(path):
        where = f"{Path(path).name} line {lineno}"
        entity_id = _require_str(record, "entity_id", where)
        review_id = _require_str(record, "review_id", where)
        text = _require_str(record, "text", where)
        if review_id in seen_ids:
            raise CorpusError(f"{where}: duplicate review_id {review_id!r}")
        seen_ids.add(review_id)
        try:
            review = Review.from_text(entity_id, review_id, text)
        except CorpusError as exc:
            raise CorpusError(f"{where}: {exc}") from exc
        by_entity.setdefault(entity_id, []).append(review)

    if not by_entity:
        raise CorpusError("empty corpus")

    entities = {
        eid: sorted(by_entity[eid], key=lambda r: r.review_id)
        for eid in sorted(by_entity)
    }
    return Corpus(domain=domain, entities=entities, aspect_specs=list(aspect_specs))


def silver_label(review: Review, aspects: list[AspectSpec]) -> np.ndarray:
    """Document-level aspect labels in {+1, -1}.

    Entry a is +1 iff any review token exactly equals a seed of aspect a
    (both sides lowercase), -1 otherwise.
    """
    tokens = set(review.tokens)
    labels = np.full(len(aspects), -1, dtype=np.int8)
    for spec in aspects:
        if tokens & spec.seeds:
            labels[spec.aspect_id] = 1
    return labels


@dataclass
class EvalExample:
    """One evaluation entity: input reviews plus reference summaries."""

    entity_id: str
    input_reviews: list[Review]
    general_refs: list[str] = field(default_factory=list)
    aspect_refs: dict[int, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.input_reviews:
            raise CorpusError(f"eval example {self.entity_id!r} has no input reviews")
        for aspect_id, refs in self.aspect_refs.items():
            if not refs:
                raise CorpusError(
                    f"eval example {self.entity_id!r}: empty reference list for aspect {aspect_id}")


def load_eval_examples(path, aspect_specs: list[AspectSpec]) -> list[EvalExample]:
    by_name = {spec.name: spec.aspect_id for spec in aspect_specs}
    examples = []
    for lineno, record in _read_json_lines(path):
        where = f"{Path(path).name} line {lineno}"
        entity_id = _require_str(record, "entity_id", where)
        raw_reviews = record.get("reviews")
        if not isinstance(raw_reviews, list) or not raw_reviews:
            raise CorpusError(f"{where}: 'reviews' must be a non-empty array")
        reviews = [
            Review.from_text(entity_id, _require_str(r, "review_id", where),
                             _require_str(r, "text", where))
            for r in raw_reviews
        ]
        general = record.get("general", [])
        aspect_refs = {}
        for name, refs in record.get("aspects", {}).items():
            if name not in by_name:
                raise CorpusError(f"{where}: unknown aspect name {name!r}")
            aspect_refs[by_name[name]] = list(refs)
        examples.append(EvalExample(entity_id=entity_id, input_reviews=reviews,
                                    general_refs=list(general), aspect_refs=aspect_refs))
    if not examples:
        raise CorpusError("empty evaluation file")
    return examples
