"""Controller induction: multi-level aspect prediction trained on seed labels.

Documents are bags of sentences and sentences bags of tokens; only the
document level carries (silver) labels. Token scores come from a linear
head under tanh. One pooling level lifts token scores to a sentence score
and a second, independently parameterized level lifts sentence scores to
a document score. The default pooling ("mip") computes, per attention
head, a softmax-weighted convex combination of the lower-level scores and
then takes an elementwise max over heads; "max", "mean" and single-head
"attention" variants exist for ablations.

Training minimizes sum_a log(1 + exp(-z[a] * label[a])) with Adam plus
decoupled weight decay and linear warm-up. Gradients are exact
reverse-mode derivatives written out by hand for the fixed graph (tanh,
softmax, weighted sum, max); the max subgradient at ties follows the
lowest index. Token encodings are frozen throughout.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Review
from .embeddings import EmbeddingTable, encode, sentence_repr
from .errors import ModelError

POOL_VARIANTS = ("mip", "max", "mean", "attention")

_MODEL_MAGIC = "aspectsum-model"
_MODEL_FORMAT_VERSION = 1
# serialization order of the parameter tensors; all little-endian float64,
# C (row-major) layout
_TENSOR_ORDER = ("w_token", "b_token", "tp_w", "tp_b", "tp_q",
                 "sp_w", "sp_b", "sp_q")


@dataclass
class PoolParams:
    """Per-head attention parameters for one pooling level.

    w: (heads, d, d) key projections; b: (heads, d) key biases;
    q: (heads, d) head query vectors.
    """

    w: np.ndarray
    b: np.ndarray
    q: np.ndarray

    @property
    def heads(self) -> int:
        return self.w.shape[0]


@dataclass
class MilModel:
    """Token head plus two independent pooling levels."""

    w_token: np.ndarray   # (d, M)
    b_token: np.ndarray   # (M,)
    token_pool: PoolParams
    sentence_pool: PoolParams
    pooling: str = "mip"

    def __post_init__(self):
        if self.pooling not in POOL_VARIANTS:
            raise ModelError(f"unknown pooling variant {self.pooling!r}")

    @property
    def dim(self) -> int:
        return self.w_token.shape[0]

    @property
    def n_aspects(self) -> int:
        return self.w_token.shape[1]

    @property
    def heads(self) -> int:
        return self.token_pool.heads

    def params(self) -> dict[str, np.ndarray]:
        return {
            "w_token": self.w_token, "b_token": self.b_token,
            "tp_w": self.token_pool.w, "tp_b": self.token_pool.b, "tp_q": self.token_pool.q,
            "sp_w": self.sentence_pool.w, "sp_b": self.sentence_pool.b, "sp_q": self.sentence_pool.q,
        }


@dataclass
class AspectPredictions:
    """Aspect scores at token (N x M), sentence (S x M), and document (M)
    level, plus the [start, end) token span of each sentence in z_t."""

    z_t: np.ndarray
    z_s: np.ndarray
    z_d: np.ndarray
    sentence_spans: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    steps: int = 100_000
    heads: int = 12
    warmup_steps: int = 10_000
    weight_decay: float = 0.01
    seed: int = 0
    pooling: str = "mip"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_sentences: int = 128
    max_sentence_tokens: int = 128
    log_every: int = 1000

    def __post_init__(self):
        if self.learning_rate <= 0 or self.heads <= 0:
            raise ModelError("learning_rate and heads must be positive")
        if self.steps < 0:
            raise ModelError("steps must be nonnegative (0 = save the initialization)")
        if self.warmup_steps <= 0:
            raise ModelError("warmup_steps must be positive")
        if self.pooling not in POOL_VARIANTS:
            raise ModelError(f"unknown pooling variant {self.pooling!r}")


def init_model(dim: int, n_aspects: int, heads: int, seed: int,
               pooling: str = "mip") -> MilModel:
    """Seeded uniform init in [-1/sqrt(d), 1/sqrt(d)] (fan-in scaling)."""
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(dim)

    def uniform(*shape):
        return rng.uniform(-bound, bound, size=shape)

    def pool_params():
        return PoolParams(w=uniform(heads, dim, dim), b=uniform(heads, dim),
                          q=uniform(heads, dim))

    return MilModel(w_token=uniform(dim, n_aspects), b_token=uniform(n_aspects),
                    token_pool=pool_params(), sentence_pool=pool_params(),
                    pooling=pooling)


def token_predict(e: np.ndarray, model: MilModel) -> np.ndarray:
    """Per-token aspect scores tanh(W e_k + b), shape (n_tokens, M)."""
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 2 or e.shape[1] != model.dim:
        raise ModelError(
            f"encodings must be (n, {model.dim}), got {e.shape}")
    return np.tanh(e @ model.w_token + model.b_token)


def _head_attention(keys_input: np.ndarray, params: PoolParams, head: int):
    """Returns (attention weights over the K positions, tanh'd keys)."""
    keys = np.tanh(keys_input @ params.w[head] + params.b[head])
    scores = keys @ params.q[head]
    shifted = scores - scores.max()
    weights = np.exp(shifted)
    weights /= weights.sum()
    return weights, keys


def pool_variant(z_lower: np.ndarray, keys_input: np.ndarray,
                 params: PoolParams, variant: str) -> np.ndarray:
    """Aggregate K lower-level predictions into one M-vector.

    mip: per-head attention-weighted sums followed by an elementwise max
    over heads; max/mean: per-aspect max/mean over instances; attention:
    the single-head (head 0) weighted sum without the outer max.
    """
    z_lower = np.asarray(z_lower, dtype=np.float64)
    if z_lower.ndim != 2 or z_lower.shape[0] == 0:
        raise ModelError("empty bag")
    if variant == "max":
        return z_lower.max(axis=0)
    if variant == "mean":
        return z_lower.mean(axis=0)
    keys_input = np.asarray(keys_input, dtype=np.float64)
    if keys_input.shape != (z_lower.shape[0], params.w.shape[1]):
        raise ModelError(
            f"keys must be {(z_lower.shape[0], params.w.shape[1])}, got {keys_input.shape}")
    if variant == "attention":
        weights, _ = _head_attention(keys_input, params, 0)
        return weights @ z_lower
    if variant == "mip":
        per_head = np.stack([
            _head_attention(keys_input, params, h)[0] @ z_lower
            for h in range(params.heads)
        ])
        return per_head.max(axis=0)
    raise ModelError(f"unknown pooling variant {variant!r}")


def mip_pool(z_lower: np.ndarray, keys_input: np.ndarray,
             params: PoolParams) -> np.ndarray:
    return pool_variant(z_lower, keys_input, params, "mip")


def _sentence_matrices(review: Review, table: EmbeddingTable,
                       max_sentences: int = 0, max_tokens: int = 0):
    """Per-sentence encoding matrices and mean-vector keys for a review."""
    sentences = review.sentences
    if max_sentences:
        sentences = sentences[:max_sentences]
    embs = []
    for sent in sentences:
        tokens = sent.tokens[:max_tokens] if max_tokens else sent.tokens
        embs.append(encode(tokens, table))
    if not embs or sum(e.shape[0] for e in embs) == 0:
        raise ModelError(f"review {review.review_id!r} has no tokens")
    reprs = np.stack([sentence_repr(e) for e in embs])
    return embs, reprs


def forward(review: Review, table: EmbeddingTable, model: MilModel) -> AspectPredictions:
    """Token, sentence, and document aspect scores for one review.

    Token encodings serve as pooling keys at the token level; sentence
    keys are the mean of each sentence's token encodings.
    """
    embs, reprs = _sentence_matrices(review, table)
    z_t_rows, z_s_rows, spans = [], [], []
    offset = 0
    for e in embs:
        z_t = token_predict(e, model)
        z_t_rows.append(z_t)
        z_s_rows.append(pool_variant(z_t, e, model.token_pool, model.pooling))
        spans.append((offset, offset + e.shape[0]))
        offset += e.shape[0]
    z_s = np.stack(z_s_rows)
    z_d = pool_variant(z_s, reprs, model.sentence_pool, model.pooling)
    return AspectPredictions(z_t=np.vstack(z_t_rows), z_s=z_s, z_d=z_d,
                             sentence_spans=spans)


def soft_margin_loss(z: np.ndarray, label: np.ndarray) -> float:
    """sum_a log(1 + exp(-z[a] * label[a])) for labels in {+1, -1}."""
    z = np.asarray(z, dtype=np.float64)
    label = np.asarray(label, dtype=np.float64)
    if z.shape != label.shape:
        raise ModelError(f"shape mismatch: {z.shape} vs {label.shape}")
    return float(np.logaddexp(0.0, -z * label).sum())


def predict_document_aspects(review: Review, table: EmbeddingTable,
                             model: MilModel) -> set[int]:
    """Aspect ids with a positive document-level score."""
    z_d = forward(review, table, model).z_d
    return {int(a) for a in np.nonzero(z_d > 0)[0]}


# ---------------------------------------------------------------------------
# training: cached forward + hand-written reverse-mode backward
# ---------------------------------------------------------------------------

def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _pool_cached(z_lower, keys_input, params: PoolParams, variant: str):
    """Forward pass of one pooling level, keeping what backward needs."""
    cache = {"z_lower": z_lower, "keys_input": keys_input, "variant": variant}
    if variant == "max":
        cache["argmax"] = np.argmax(z_lower, axis=0)
        return z_lower.max(axis=0), cache
    if variant == "mean":
        return z_lower.mean(axis=0), cache
    heads = range(params.heads) if variant == "mip" else (0,)
    weights, keys, per_head = [], [], []
    for h in heads:
        a_h, key_h = _head_attention(keys_input, params, h)
        weights.append(a_h)
        keys.append(key_h)
        per_head.append(a_h @ z_lower)
    cache["weights"], cache["keys"] = weights, keys
    per_head = np.stack(per_head)
    cache["per_head"] = per_head
    if variant == "attention":
        return per_head[0], cache
    cache["arg_head"] = np.argmax(per_head, axis=0)
    return per_head.max(axis=0), cache


def _pool_backward(g_up, cache, params: PoolParams, g_w, g_b, g_q):
    """Backward of one pooling level.

    Returns the gradient w.r.t. z_lower and accumulates the level's
    parameter gradients in place. No gradient flows to keys_input: both
    key sources (token encodings, sentence means) are frozen.
    """
    z_lower = cache["z_lower"]
    variant = cache["variant"]
    g_z_lower = np.zeros_like(z_lower)
    if variant == "max":
        g_z_lower[cache["argmax"], np.arange(z_lower.shape[1])] = g_up
        return g_z_lower
    if variant == "mean":
        g_z_lower += g_up / z_lower.shape[0]
        return g_z_lower

    keys_input = cache["keys_input"]
    heads = range(params.heads) if variant == "mip" else (0,)
    for pos, h in enumerate(heads):
        if variant == "mip":
            g_head = np.where(cache["arg_head"] == h, g_up, 0.0)
        else:
            g_head = g_up
        if not g_head.any():
            continue
        a_h = cache["weights"][pos]
        key_h = cache["keys"][pos]
        # z_h = a_h @ z_lower
        g_z_lower += np.outer(a_h, g_head)
        g_a = z_lower @ g_head
        # softmax backward
        g_scores = a_h * (g_a - a_h @ g_a)
        # scores = key_h @ q_h
        g_keys = np.outer(g_scores, params.q[h])
        g_q[h] += key_h.T @ g_scores
        # key_h = tanh(keys_input @ w_h + b_h)
        g_pre = g_keys * (1.0 - key_h * key_h)
        g_w[h] += keys_input.T @ g_pre
        g_b[h] += g_pre.sum(axis=0)
    return g_z_lower


def _loss_and_grads(embs, reprs, label, model: MilModel):
    """Loss and parameter gradients for one review (embs frozen)."""
    variant = model.pooling
    z_t_list, z_s_rows, caches = [], [], []
    for e in embs:
        z_t = np.tanh(e @ model.w_token + model.b_token)
        z_s_row, cache = _pool_cached(z_t, e, model.token_pool, variant)
        z_t_list.append(z_t)
        z_s_rows.append(z_s_row)
        caches.append(cache)
    z_s = np.stack(z_s_rows)
    z_d, doc_cache = _pool_cached(z_s, reprs, model.sentence_pool, variant)

    margin = z_d * label
    loss = float(np.logaddexp(0.0, -margin).sum())
    g_z_d = -label * _sigmoid(-margin)

    grads = {name: np.zeros_like(p) for name, p in model.params().items()}
    g_z_s = _pool_backward(g_z_d, doc_cache, model.sentence_pool,
                           grads["sp_w"], grads["sp_b"], grads["sp_q"])
    for e, z_t, cache, g_row in zip(embs, z_t_list, caches, g_z_s):
        g_z_t = _pool_backward(g_row, cache, model.token_pool,
                               grads["tp_w"], grads["tp_b"], grads["tp_q"])
        g_pre = g_z_t * (1.0 - z_t * z_t)
        grads["w_token"] += e.T @ g_pre
        grads["b_token"] += g_pre.sum(axis=0)
    return loss, grads


def review_loss(review: Review, table: EmbeddingTable, model: MilModel,
                label: np.ndarray) -> float:
    """Training loss of one review under the model's pooling variant."""
    embs, reprs = _sentence_matrices(review, table)
    loss, _ = _loss_and_grads(embs, reprs, np.asarray(label, dtype=np.float64), model)
    return loss


def review_gradients(review: Review, table: EmbeddingTable, model: MilModel,
                     label: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    embs, reprs = _sentence_matrices(review, table)
    return _loss_and_grads(embs, reprs, np.asarray(label, dtype=np.float64), model)


def train(corpus: Corpus, labels: dict[str, np.ndarray], table: EmbeddingTable,
          config: TrainConfig, progress=None) -> MilModel:
    """Train a model on silver document labels, one review per step.

    Reviews are visited in seeded shuffled order per epoch. The optimizer
    is Adam with decoupled weight decay and linear warm-up. `progress`
    (optional) is called as progress(step, loss) every log_every steps.
    """
    reviews = corpus.all_reviews()
    if not reviews:
        raise ModelError("cannot train on an empty corpus")
    missing = [r.review_id for r in reviews if r.review_id not in labels]
    if missing:
        raise ModelError(f"unlabeled reviews: {missing[:5]}")

    prepared = []
    for review in reviews:
        embs, reprs = _sentence_matrices(review, table, config.max_sentences,
                                         config.max_sentence_tokens)
        prepared.append((embs, reprs, np.asarray(labels[review.review_id], dtype=np.float64)))

    rng = np.random.default_rng(config.seed)
    model = init_model(table.dim, corpus.n_aspects, config.heads, config.seed,
                       config.pooling)
    m_state = {k: np.zeros_like(p) for k, p in model.params().items()}
    v_state = {k: np.zeros_like(p) for k, p in model.params().items()}

    order = np.arange(len(prepared))
    step = 0
    while step < config.steps:
        rng.shuffle(order)
        for idx in order:
            if step >= config.steps:
                break
            embs, reprs, label = prepared[idx]
            loss, grads = _loss_and_grads(embs, reprs, label, model)
            if not np.isfinite(loss):
                raise ModelError(f"non-finite loss at step {step}")
            step += 1
            lr_t = config.learning_rate * min(1.0, step / config.warmup_steps)
            params = model.params()
            for name, p in params.items():
                g = grads[name]
                m_state[name] = config.beta1 * m_state[name] + (1 - config.beta1) * g
                v_state[name] = config.beta2 * v_state[name] + (1 - config.beta2) * g * g
                m_hat = m_state[name] / (1 - config.beta1 ** step)
                v_hat = v_state[name] / (1 - config.beta2 ** step)
                p -= lr_t * (m_hat / (np.sqrt(v_hat) + config.eps)
                             + config.weight_decay * p)
            if progress is not None and step % config.log_every == 0:
                progress(step, loss)
    return model


# ---------------------------------------------------------------------------
# model container: one JSON header line + raw little-endian float64 tensors
# ---------------------------------------------------------------------------

def save_model(model: MilModel, path) -> None:
    params = model.params()
    header = {
        "format": _MODEL_MAGIC,
        "version": _MODEL_FORMAT_VERSION,
        "dim": model.dim,
        "aspects": model.n_aspects,
        "heads": model.heads,
        "pooling": model.pooling,
        "dtype": "<f8",
        "order": "C",
        "tensors": [[name, list(params[name].shape)] for name in _TENSOR_ORDER],
    }
    with Path(path).open("wb") as handle:
        handle.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        handle.write(b"\n")
        for name in _TENSOR_ORDER:
            handle.write(np.ascontiguousarray(params[name], dtype="<f8").tobytes())


def load_model(path) -> MilModel:
    with Path(path).open("rb") as handle:
        header_line = handle.readline()
        try:
            header = json.loads(header_line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ModelError(f"{path}: not a model file ({exc})") from exc
        if header.get("format") != _MODEL_MAGIC:
            raise ModelError(f"{path}: not a model file")
        if header.get("version") != _MODEL_FORMAT_VERSION:
            raise ModelError(f"{path}: unsupported model version {header.get('version')!r}")
        tensors = {}
        for name, shape in header["tensors"]:
            count = int(np.prod(shape))
            raw = handle.read(count * 8)
            if len(raw) != count * 8:
                raise ModelError(f"{path}: truncated tensor {name!r}")
            tensors[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        if handle.read(1):
            raise ModelError(f"{path}: trailing bytes after tensors")
    model = MilModel(
        w_token=tensors["w_token"], b_token=tensors["b_token"],
        token_pool=PoolParams(w=tensors["tp_w"], b=tensors["tp_b"], q=tensors["tp_q"]),
        sentence_pool=PoolParams(w=tensors["sp_w"], b=tensors["sp_b"], q=tensors["sp_q"]),
        pooling=header["pooling"],
    )
    if model.dim != header["dim"] or model.n_aspects != header["aspects"]:
        raise ModelError(f"{path}: header/tensor shape mismatch")
    return model


def model_fingerprint(path) -> str:
    """Short content hash of a serialized model, used as the model version."""
    return format(zlib.crc32(Path(path).read_bytes()) & 0xFFFFFFFF, "08x")
