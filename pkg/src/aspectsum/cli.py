"""Command-line workflow driver.

Subcommands: label, train, build, summarize, eval, serve. Paths come
from a YAML config file, ASPECTSUM_* environment variables, or flags
(flags win). Exit code 0 on success, 1 with a diagnostic on stderr
otherwise.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import AppConfig, load_config
from .corpus import Corpus, load_aspect_specs, load_corpus, load_eval_examples, silver_label
from .embeddings import load_embeddings
from .errors import AspectsumError, ConfigError
from .evaluation import corpus_silver_labels, run_eval
from .mil import load_model, model_fingerprint, save_model, train
from .records import canonical_json, load_state, summary_record
from .reports import render_eval
from .synthesis import build_dataset

_PATH_FLAGS = (
    ("--corpus", "corpus_path", "review corpus (JSON lines)"),
    ("--aspects", "aspects_path", "aspect seed-word file (JSON lines)"),
    ("--embeddings", "embeddings_path", "word embedding text file"),
    ("--model", "model_path", "trained model file"),
    ("--dataset", "dataset_path", "synthetic dataset output (TSV)"),
    ("--eval-file", "eval_path", "evaluation examples (JSON lines)"),
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="YAML config file")
    for flag, dest, help_text in _PATH_FLAGS:
        parser.add_argument(flag, dest=dest, default=None, help=help_text)


def _app_config(args) -> AppConfig:
    overrides = {dest: getattr(args, dest) for _, dest, _ in _PATH_FLAGS}
    return load_config(args.config, overrides=overrides)


def write_labels(corpus: Corpus, handle) -> list[tuple[str, int, int]]:
    """Stream one TSV row of +1/-1 labels per review; returns per-aspect
    (name, positives, total) counts."""
    names = [spec.name for spec in corpus.aspect_specs]
    handle.write("\t".join(["review_id", "entity_id"] + names) + "\n")
    positives = [0] * len(names)
    total = 0
    for review in corpus.all_reviews():
        label = silver_label(review, corpus.aspect_specs)
        cells = [review.review_id, review.entity_id]
        cells.extend("+1" if v > 0 else "-1" for v in label)
        handle.write("\t".join(cells) + "\n")
        total += 1
        for a, v in enumerate(label):
            if v > 0:
                positives[a] += 1
    return [(name, positives[a], total) for a, name in enumerate(names)]


def cmd_label(args) -> int:
    config = _app_config(args)
    config.require("corpus_path", "aspects_path")
    specs = load_aspect_specs(config.aspects_path)
    corpus = load_corpus(config.corpus_path, specs)
    if args.out == "-":
        stats = write_labels(corpus, sys.stdout)
    else:
        with Path(args.out).open("w", encoding="utf-8") as handle:
            stats = write_labels(corpus, handle)
    for name, pos, total in stats:
        rate = pos / total if total else 0.0
        print(f"{name}: {pos}/{total} positive ({rate:.3f})", file=sys.stderr)
    return 0


_TRAIN_FLAGS = {
    "steps": "steps", "learning_rate": "learning_rate", "heads": "heads",
    "warmup_steps": "warmup_steps", "weight_decay": "weight_decay",
    "seed": "seed", "pooling": "pooling", "log_every": "log_every",
}


def cmd_train(args) -> int:
    config = _app_config(args)
    config.require("corpus_path", "aspects_path", "embeddings_path")
    out_path = args.out or config.model_path
    if not out_path:
        raise ConfigError("no output model path (use --out or --model)")
    overrides = {field: getattr(args, flag) for flag, field in _TRAIN_FLAGS.items()
                 if getattr(args, flag) is not None}
    train_config = replace(config.train, **overrides)

    specs = load_aspect_specs(config.aspects_path)
    corpus = load_corpus(config.corpus_path, specs)
    table = load_embeddings(config.embeddings_path)
    labels = corpus_silver_labels(corpus)

    def progress(step, loss):
        print(f"step {step}: loss {loss:.4f}", file=sys.stderr)

    model = train(corpus, labels, table, train_config, progress=progress)
    save_model(model, out_path)
    print(f"wrote {out_path} (model {model_fingerprint(out_path)}, "
          f"pooling={model.pooling}, {train_config.steps} steps)", file=sys.stderr)
    return 0


def cmd_build(args) -> int:
    config = _app_config(args)
    config.require("corpus_path", "aspects_path", "embeddings_path", "model_path")
    out_path = args.out or config.dataset_path
    if not out_path:
        raise ConfigError("no dataset output path (use --out or --dataset)")
    synth = config.synth
    if args.seed is not None:
        synth = replace(synth, seed=args.seed)
    if args.max_per_entity is not None:
        synth = replace(synth, max_examples_per_entity=args.max_per_entity)

    specs = load_aspect_specs(config.aspects_path)
    corpus = load_corpus(config.corpus_path, specs)
    table = load_embeddings(config.embeddings_path)
    model = load_model(config.model_path)
    stats = build_dataset(corpus, model, table, synth, out_path)
    print(f"wrote {stats.total} examples for {len(stats.per_entity)} entities "
          f"to {out_path}", file=sys.stderr)
    return 0


def cmd_summarize(args) -> int:
    config = _app_config(args)
    state = load_state(config)
    record = summary_record(state, args.entity, args.aspect or [])
    print(canonical_json(record))
    return 0


def cmd_eval(args) -> int:
    config = _app_config(args)
    config.require("eval_path", "aspects_path", "embeddings_path", "model_path")
    specs = load_aspect_specs(config.aspects_path)
    examples = load_eval_examples(config.eval_path, specs)
    table = load_embeddings(config.embeddings_path)
    model = load_model(config.model_path)
    report = run_eval(examples, specs, model, table, config.synth, config.lexrank,
                      aggregate=args.aggregate)
    rendered = render_eval(report, args.out_dir)
    print(rendered["text"], end="")
    print(f"wrote {rendered['table']}, {rendered['tsv']}, {rendered['figure']}",
          file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    config = _app_config(args)
    if args.host:
        config.host = args.host
    if args.port is not None:
        config.port = args.port
    from .service import serve

    serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aspectsum",
        description="Aspect-controllable extractive opinion summarization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("label", help="write silver aspect labels for a corpus")
    _add_common(p)
    p.add_argument("--out", default="-", help="output TSV path ('-' = stdout)")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train", help="train the controller induction model")
    _add_common(p)
    p.add_argument("--out", default=None, help="output model path (default: --model)")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None, dest="learning_rate")
    p.add_argument("--heads", type=int, default=None)
    p.add_argument("--warmup-steps", type=int, default=None, dest="warmup_steps")
    p.add_argument("--weight-decay", type=float, default=None, dest="weight_decay")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--pooling", choices=("mip", "max", "mean", "attention"), default=None)
    p.add_argument("--log-every", type=int, default=None, dest="log_every")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("build", help="build the synthetic controller dataset")
    _add_common(p)
    p.add_argument("--out", default=None, help="output TSV path (default: --dataset)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-per-entity", type=int, default=None, dest="max_per_entity")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("summarize", help="print a summary record for one entity")
    _add_common(p)
    p.add_argument("--entity", required=True)
    p.add_argument("--aspect", action="append", default=None,
                   help="aspect name; repeatable; omit for a general summary")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("eval", help="score summaries against references")
    _add_common(p)
    p.add_argument("--out-dir", default="reports", dest="out_dir")
    p.add_argument("--aggregate", choices=("mean", "max"), default="mean")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the read-only HTTP service")
    _add_common(p)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AspectsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
