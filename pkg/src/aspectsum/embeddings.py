"""Frozen token encodings backed by a static word-vector table.

The aspect prediction head is encoder-agnostic; this module supplies the
frozen per-token vectors it consumes. The on-disk format is the common
text layout: one token followed by d whitespace-separated reals per line.
Out-of-vocabulary tokens map to a shared zero vector, which contributes
nothing to attention keys or predictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmbeddingError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass
class EmbeddingTable:
    """Immutable token -> vector map with a shared OOV vector."""

    dim: int
    vectors: dict[str, np.ndarray]
    oov_vector: np.ndarray

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def lookup(self, token: str) -> np.ndarray:
        return self.vectors.get(token, self.oov_vector)


def load_embeddings(path) -> EmbeddingTable:
    """Load a text vector file; the dimension is inferred from the first line."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise EmbeddingError(f"{path.name} line {lineno}: no vector components")
            elif len(values) != dim:
                raise EmbeddingError(
                    f"{path.name} line {lineno}: expected {dim} components, got {len(values)}")
            if token in vectors:
                raise EmbeddingError(f"{path.name} line {lineno}: duplicate token {token!r}")
            try:
                vector = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingError(f"{path.name} line {lineno}: {exc}") from exc
            vectors[token] = _frozen(vector)
    if dim is None:
        raise EmbeddingError(f"{path.name}: empty embedding file")
    return EmbeddingTable(dim=dim, vectors=vectors,
                          oov_vector=_frozen(np.zeros(dim, dtype=np.float64)))


def make_table(vectors: dict[str, np.ndarray]) -> EmbeddingTable:
    """Build an in-memory table; all vectors must share one dimension."""
    if not vectors:
        raise EmbeddingError("cannot build an empty embedding table")
    dims = {len(v) for v in vectors.values()}
    if len(dims) != 1:
        raise EmbeddingError(f"inconsistent vector dimensions: {sorted(dims)}")
    dim = dims.pop()
    frozen = {tok: _frozen(np.asarray(vec, dtype=np.float64).copy())
              for tok, vec in vectors.items()}
    return EmbeddingTable(dim=dim, vectors=frozen,
                          oov_vector=_frozen(np.zeros(dim, dtype=np.float64)))


def encode(tokens, table: EmbeddingTable) -> np.ndarray:
    """Stack per-token vectors into an (n_tokens, dim) matrix."""
    if len(tokens) == 0:
        return np.zeros((0, table.dim), dtype=np.float64)
    return np.stack([table.lookup(tok) for tok in tokens])


def sentence_repr(token_rows: np.ndarray) -> np.ndarray:
    """Arithmetic mean of a sentence's token encodings."""
    rows = np.asarray(token_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise EmbeddingError("sentence_repr needs at least one token row")
    return rows.mean(axis=0)
