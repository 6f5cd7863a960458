"""Evaluation: ROUGE-1/2/L, document and sentence aspect F1, a planted
corpus with known sentence aspects, and the pooling ablation driver.

ROUGE preprocessing is lowercase, punctuation-stripped tokens, no
stemming, no stopword removal; scores from other toolchains with
different preprocessing are not comparable number-for-number.

The planted corpus gives every sentence exactly one aspect by
construction: each aspect owns a disjoint token cluster in embedding
space and each sentence samples tokens from a single cluster. Models are
trained on seed-word silver labels and measured against the construction
gold, so the measurement is exact while the supervision stays noisy.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import AspectSpec, Corpus, EvalExample, Review, silver_label, tokenize
from .embeddings import EmbeddingTable, make_table
from .errors import EvaluationError
from .mil import POOL_VARIANTS, MilModel, TrainConfig, forward, train
from .summarizer import LexRankConfig, Query, summarize
from .synthesis import SynthConfig


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "PRF":
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0.0 else 0.0
        return cls(precision, recall, f1)

    @classmethod
    def zero(cls) -> "PRF":
        return cls(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class RougeScore:
    rouge1: PRF
    rouge2: PRF
    rougeL: PRF


def rouge_n(candidate: list[str], reference: list[str], n: int) -> PRF:
    """Clipped n-gram overlap; zeros when either side has no n-grams."""
    if n <= 0:
        raise EvaluationError("n must be positive")
    cand = Counter(tuple(candidate[i:i + n]) for i in range(len(candidate) - n + 1))
    ref = Counter(tuple(reference[i:i + n]) for i in range(len(reference) - n + 1))
    if not cand or not ref:
        return PRF.zero()
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    return PRF.from_pr(overlap / sum(cand.values()), overlap / sum(ref.values()))


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok_a in a:
        row = [0]
        for j, tok_b in enumerate(b, start=1):
            if tok_a == tok_b:
                row.append(prev[j - 1] + 1)
            else:
                row.append(max(row[j - 1], prev[j]))
        prev = row
    return prev[len(b)]


def rouge_l(candidate: list[str], reference: list[str]) -> PRF:
    if not candidate or not reference:
        return PRF.zero()
    lcs = _lcs_length(list(candidate), list(reference))
    return PRF.from_pr(lcs / len(candidate), lcs / len(reference))


def score_pair(candidate: list[str], reference: list[str]) -> RougeScore:
    return RougeScore(rouge1=rouge_n(candidate, reference, 1),
                      rouge2=rouge_n(candidate, reference, 2),
                      rougeL=rouge_l(candidate, reference))


def _aggregate(scores: list[PRF], how: str) -> PRF:
    if how == "mean":
        n = len(scores)
        return PRF(sum(s.precision for s in scores) / n,
                   sum(s.recall for s in scores) / n,
                   sum(s.f1 for s in scores) / n)
    if how == "max":
        return max(scores, key=lambda s: s.f1)
    raise EvaluationError(f"unknown aggregation {how!r} (use 'mean' or 'max')")


def multi_ref_score(candidate: str, references: list[str],
                    aggregate: str = "mean") -> RougeScore:
    """Candidate against several references, aggregated per component.

    Mean aggregation averages each field over references; max keeps the
    best-F1 reference per component.
    """
    if not references:
        raise EvaluationError("multi_ref_score needs at least one reference")
    cand_tokens = tokenize(candidate)
    per_ref = [score_pair(cand_tokens, tokenize(ref)) for ref in references]
    return RougeScore(rouge1=_aggregate([s.rouge1 for s in per_ref], aggregate),
                      rouge2=_aggregate([s.rouge2 for s in per_ref], aggregate),
                      rougeL=_aggregate([s.rougeL for s in per_ref], aggregate))


@dataclass
class PlantedVocabSpec:
    n_aspects: int = 3
    tokens_per_aspect: int = 30
    seeds_per_aspect: int = 6
    dim: int = 16
    noise_scale: float = 0.3
    min_sentences: int = 3
    max_sentences: int = 6
    min_tokens: int = 4
    max_tokens: int = 8
    major_prob: float = 0.7

    def __post_init__(self):
        if self.n_aspects < 2 or self.n_aspects > self.dim:
            raise EvaluationError("need 2 <= n_aspects <= dim")
        if not 0 < self.seeds_per_aspect <= self.tokens_per_aspect:
            raise EvaluationError("need 0 < seeds_per_aspect <= tokens_per_aspect")
        if self.min_sentences < 1 or self.max_sentences < self.min_sentences:
            raise EvaluationError("bad sentence count range")
        if self.min_tokens < 1 or self.max_tokens < self.min_tokens:
            raise EvaluationError("bad token count range")
        if not 0.0 < self.major_prob <= 1.0:
            raise EvaluationError("major_prob must lie in (0, 1]")


@dataclass
class PlantedCorpus:
    """Corpus plus construction gold: one aspect per sentence, document
    gold = union of its sentence aspects."""

    corpus: Corpus
    table: EmbeddingTable
    sentence_gold: dict[str, tuple[int, ...]] = field(default_factory=dict)
    doc_gold: dict[str, frozenset[int]] = field(default_factory=dict)


def make_planted_corpus(seed: int, n_entities: int, n_reviews: int,
                        spec: PlantedVocabSpec | None = None) -> PlantedCorpus:
    """Seeded synthetic corpus with disjoint per-aspect token clusters.

    n_reviews counts reviews per entity. Cluster centers are orthonormal;
    token vectors add isotropic noise. Every review has a major aspect;
    other aspects appear as minority sentences.
    """
    spec = spec or PlantedVocabSpec()
    if n_entities < 1 or n_reviews < 1:
        raise EvaluationError("need at least one entity and one review")
    rng = np.random.default_rng(seed)

    # orthonormal cluster centers from a QR factorization
    basis, _ = np.linalg.qr(rng.standard_normal((spec.dim, spec.dim)))
    centers = basis.T[: spec.n_aspects]

    vectors: dict[str, np.ndarray] = {}
    vocab: list[list[str]] = []
    for a in range(spec.n_aspects):
        cluster = []
        for w in range(spec.tokens_per_aspect):
            token = f"a{a}w{w}"
            noise = rng.standard_normal(spec.dim) * spec.noise_scale / np.sqrt(spec.dim)
            vectors[token] = centers[a] + noise
            cluster.append(token)
        vocab.append(cluster)
    table = make_table(vectors)

    aspect_specs = [
        AspectSpec(aspect_id=a, name=f"aspect{a}",
                   seeds=frozenset(vocab[a][: spec.seeds_per_aspect]))
        for a in range(spec.n_aspects)
    ]

    entities: dict[str, list[Review]] = {}
    sentence_gold: dict[str, tuple[int, ...]] = {}
    doc_gold: dict[str, frozenset[int]] = {}
    for e in range(n_entities):
        entity_id = f"e{e:03d}"
        reviews = []
        for r in range(n_reviews):
            review_id = f"{entity_id}-r{r:02d}"
            major = int(rng.integers(spec.n_aspects))
            n_sent = int(rng.integers(spec.min_sentences, spec.max_sentences + 1))
            aspects, sentences = [], []
            for _ in range(n_sent):
                if spec.n_aspects == 1 or rng.random() < spec.major_prob:
                    aspect = major
                else:
                    others = [a for a in range(spec.n_aspects) if a != major]
                    aspect = int(rng.choice(others))
                n_tok = int(rng.integers(spec.min_tokens, spec.max_tokens + 1))
                tokens = [vocab[aspect][int(i)]
                          for i in rng.integers(spec.tokens_per_aspect, size=n_tok)]
                aspects.append(aspect)
                sentences.append(" ".join(tokens).capitalize() + ".")
            review = Review.from_text(entity_id, review_id, " ".join(sentences))
            # the segmenter must recover the planted sentence boundaries
            if len(review.sentences) != n_sent:
                raise EvaluationError(
                    f"planted review {review_id} re-split into "
                    f"{len(review.sentences)} sentences, expected {n_sent}")
            reviews.append(review)
            sentence_gold[review_id] = tuple(aspects)
            doc_gold[review_id] = frozenset(aspects)
        entities[entity_id] = reviews

    corpus = Corpus(domain="planted", entities=entities, aspect_specs=aspect_specs)
    return PlantedCorpus(corpus=corpus, table=table,
                         sentence_gold=sentence_gold, doc_gold=doc_gold)


def _micro_f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom > 0 else 0.0


def aspect_f1(model: MilModel, planted: PlantedCorpus) -> tuple[float, float]:
    """Micro-averaged document and sentence aspect F1 against gold."""
    n_aspects = model.n_aspects
    doc_tp = doc_fp = doc_fn = 0
    sent_tp = sent_fp = sent_fn = 0
    for review in planted.corpus.all_reviews():
        preds = forward(review, planted.table, model)
        gold_doc = planted.doc_gold[review.review_id]
        pred_doc = {a for a in range(n_aspects) if preds.z_d[a] > 0.0}
        doc_tp += len(pred_doc & gold_doc)
        doc_fp += len(pred_doc - gold_doc)
        doc_fn += len(gold_doc - pred_doc)
        gold_sents = planted.sentence_gold[review.review_id]
        for k, gold_aspect in enumerate(gold_sents):
            pred_sent = {a for a in range(n_aspects) if preds.z_s[k, a] > 0.0}
            gold_sent = {gold_aspect}
            sent_tp += len(pred_sent & gold_sent)
            sent_fp += len(pred_sent - gold_sent)
            sent_fn += len(gold_sent - pred_sent)
    return _micro_f1(doc_tp, doc_fp, doc_fn), _micro_f1(sent_tp, sent_fp, sent_fn)


def corpus_silver_labels(corpus: Corpus) -> dict[str, np.ndarray]:
    return {review.review_id: silver_label(review, corpus.aspect_specs)
            for review in corpus.all_reviews()}


@dataclass(frozen=True)
class AblationRow:
    pooling: str
    doc_f1: float
    sent_f1: float


def run_ablation(planted: PlantedCorpus, config: TrainConfig,
                 variants: tuple[str, ...] = POOL_VARIANTS,
                 progress=None) -> list[AblationRow]:
    """Train one model per pooling variant on identical silver labels and
    seed; score each against gold."""
    labels = corpus_silver_labels(planted.corpus)
    rows = []
    for variant in variants:
        model = train(planted.corpus, labels, planted.table,
                      replace(config, pooling=variant), progress=progress)
        doc_f1, sent_f1 = aspect_f1(model, planted)
        rows.append(AblationRow(pooling=variant, doc_f1=doc_f1, sent_f1=sent_f1))
    return rows


@dataclass(frozen=True)
class EvalRow:
    entity_id: str
    query: str
    rouge: RougeScore


@dataclass
class EvalReport:
    rows: list[EvalRow]
    mean: RougeScore


def _mean_rouge(scores: list[RougeScore]) -> RougeScore:
    return RougeScore(rouge1=_aggregate([s.rouge1 for s in scores], "mean"),
                      rouge2=_aggregate([s.rouge2 for s in scores], "mean"),
                      rougeL=_aggregate([s.rougeL for s in scores], "mean"))


def run_eval(examples: list[EvalExample], aspect_specs: list[AspectSpec],
             model: MilModel, table: EmbeddingTable,
             synth_config: SynthConfig | None = None,
             lexrank_config: LexRankConfig | None = None,
             aggregate: str = "mean") -> EvalReport:
    """Summarize each example (general plus every referenced aspect) and
    score against its references."""
    n_aspects = len(aspect_specs)
    names = {spec.aspect_id: spec.name for spec in aspect_specs}
    rows = []
    for example in examples:
        queries: list[tuple[str, Query, list[str]]] = []
        if example.general_refs:
            queries.append(("general", Query.general(n_aspects), example.general_refs))
        for aspect_id in sorted(example.aspect_refs):
            queries.append((names[aspect_id], Query.from_codes({aspect_id}, n_aspects),
                            example.aspect_refs[aspect_id]))
        for label, query, refs in queries:
            summary = summarize(example.input_reviews, query, model, table,
                                synth_config, lexrank_config)
            rows.append(EvalRow(entity_id=example.entity_id, query=label,
                                rouge=multi_ref_score(summary.text, refs, aggregate)))
    if not rows:
        raise EvaluationError("evaluation produced no rows (no references present)")
    return EvalReport(rows=rows, mean=_mean_rouge([row.rouge for row in rows]))
