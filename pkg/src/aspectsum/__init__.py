"""Aspect-controllable extractive opinion summarization.

Induce aspect controllers from seed words with a multi-instance model,
build synthetic controller-annotated datasets, and produce general or
aspect-specific extractive summaries scored with ROUGE.
"""

__version__ = "0.1.0"

from .corpus import (AspectSpec, Corpus, EvalExample, Review, Sentence,
                     load_aspect_specs, load_corpus, load_eval_examples,
                     silver_label, split_sentences, tokenize)
from .embeddings import EmbeddingTable, encode, load_embeddings, make_table, sentence_repr
from .errors import (AspectsumError, ConfigError, ControllerParseError, CorpusError,
                     EmbeddingError, EvaluationError, ModelError, SummarizerError,
                     SynthesisError)
from .evaluation import (AblationRow, EvalReport, PlantedCorpus, PlantedVocabSpec,
                         PRF, RougeScore, aspect_f1, corpus_silver_labels,
                         make_planted_corpus, multi_ref_score, rouge_l, rouge_n,
                         run_ablation, run_eval)
from .mil import (MilModel, TrainConfig, forward, init_model, load_model,
                  mip_pool, model_fingerprint, pool_variant,
                  predict_document_aspects, save_model, soft_margin_loss, train)
from .reports import format_table, render_ablation, render_eval, write_tsv
from .summarizer import (LexRankConfig, Query, Summary, SummarySentence,
                         centroid_baseline, extract_summary, lexrank,
                         seed_filter_baseline, select_pool, sentence_similarity,
                         summarize)
from .synthesis import (ControllerSet, DatasetStats, SynthConfig, SyntheticExample,
                        aspect_match_score, build_controllers, build_dataset,
                        extract_keywords, parse_controllers, rank_sentences,
                        sample_pseudo_summaries, serialize_controllers)

__all__ = [name for name in dir() if not name.startswith("_")]
