"""Embedding providers and exact cosine retrieval over chunk vectors.

The local provider is a hashed TF-IDF bag of words: stable across runs
and platforms, no network, good enough to exercise every retrieval path.
The remote provider talks to any embeddings endpoint that accepts
``{"model": ..., "input": [...]}`` and answers ``{"data": [{"embedding":
[...]}, ...]}``; the API key is read from an environment variable.

Retrieval is exact brute force: every query scores every chunk.
"""

from __future__ import annotations

import hashlib
import math
import os
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import requests
import yaml

from fbsdiag.chunking import Chunk
from fbsdiag.errors import DomainError, EmbeddingError, ParseError

__all__ = [
    "DEFAULT_CONCURRENCY",
    "DEFAULT_DIMENSION",
    "HashedTfidfEmbedder",
    "RemoteEmbedder",
    "VectorIndex",
    "build_index",
    "cosine",
    "embed",
    "load_index",
    "make_provider",
    "save_index",
    "token_bucket",
    "tokenize",
    "top_k",
]

# wide enough that the bundled corpora hash with no bucket collisions
DEFAULT_DIMENSION = 16384
DEFAULT_CONCURRENCY = 4

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Hiragana, katakana, and the common CJK ideograph blocks.
_CJK_RANGES = (
    (0x3040, 0x30FF),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
)


def _is_cjk(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric runs; CJK spans become character bigrams."""
    tokens: list[str] = []
    for match in _WORD_RE.finditer(text.lower()):
        run = match.group()
        start = 0
        for index in range(len(run) + 1):
            boundary = index == len(run) or _is_cjk(run[index]) != _is_cjk(run[start])
            if not boundary:
                continue
            piece = run[start:index]
            if piece:
                if _is_cjk(piece[0]) and len(piece) > 1:
                    tokens.extend(piece[i : i + 2] for i in range(len(piece) - 1))
                else:
                    tokens.append(piece)
            start = index
    return tokens


def token_bucket(token: str, dimension: int) -> int:
    """Stable 64-bit hash of the token, reduced to a vector slot."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dimension


class HashedTfidfEmbedder:
    """Deterministic local provider; :meth:`fit` learns corpus frequencies.

    Unfitted, document frequencies are zero and the weights reduce to
    plain term frequency. Queries embedded after a fit reuse the corpus
    statistics, so query and chunk vectors live in the same space.
    """

    kind = "local"

    def __init__(self, dimension: int = DEFAULT_DIMENSION) -> None:
        if dimension <= 0:
            raise DomainError("dimension must be positive", code="bad-dimension")
        self.dimension = dimension
        self.corpus_size = 0
        self.df: dict[str, int] = {}

    def fit(self, texts: Sequence[str]) -> None:
        self.corpus_size = len(texts)
        df: dict[str, int] = {}
        for text in texts:
            for token in set(tokenize(text)):
                df[token] = df.get(token, 0) + 1
        self.df = df

    def _idf(self, token: str) -> float:
        df = self.df.get(token, 0)
        return math.log((1 + self.corpus_size) / (1 + df)) + 1.0

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for row, text in enumerate(texts):
            counts = Counter(tokenize(text))
            vector = out[row]
            # Sorted iteration pins the float summation order.
            for token in sorted(counts):
                vector[token_bucket(token, self.dimension)] += counts[token] * self._idf(token)
            norm = float(np.linalg.norm(vector))
            if norm > 0.0:
                vector /= norm
        return out

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind, "dimension": self.dimension}


class RemoteEmbedder:
    """HTTP provider for hosted embedding models."""

    kind = "remote"

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        key_env: str = "",
        dimension: int = 0,
        concurrency: int = DEFAULT_CONCURRENCY,
        batch_size: int = 64,
        timeout: float = 60.0,
    ) -> None:
        if not endpoint:
            raise EmbeddingError("remote provider needs an endpoint", code="bad-config")
        if not model:
            raise EmbeddingError("remote provider needs a model name", code="bad-config")
        if concurrency < 1:
            raise EmbeddingError("concurrency must be at least 1", code="bad-config")
        self.endpoint = endpoint
        self.model = model
        self.key_env = key_env
        self.dimension = dimension
        self.concurrency = concurrency
        self.batch_size = batch_size
        self.timeout = timeout

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.key_env:
            key = os.environ.get(self.key_env, "")
            if not key:
                raise EmbeddingError(
                    f"environment variable {self.key_env!r} is empty; no API key",
                    code="missing-key",
                )
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post_batch(self, batch: list[str]) -> list[list[float]]:
        try:
            response = requests.post(
                self.endpoint,
                json={"model": self.model, "input": batch},
                headers=self._headers(),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise EmbeddingError(f"embedding request failed: {exc}") from exc
        if response.status_code != 200:
            body = response.text[:500]
            raise EmbeddingError(
                f"embedding endpoint returned {response.status_code}: {body}"
            )
        try:
            data = response.json()["data"]
            vectors = [item["embedding"] for item in data]
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(batch):
            raise EmbeddingError(
                f"embedding endpoint returned {len(vectors)} vectors for {len(batch)} inputs"
            )
        return vectors

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            dim = self.dimension or 1
            return np.zeros((0, dim), dtype=np.float64)
        batches = [
            list(texts[start : start + self.batch_size])
            for start in range(0, len(texts), self.batch_size)
        ]
        if len(batches) == 1:
            results = [self._post_batch(batches[0])]
        else:
            with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
                results = list(pool.map(self._post_batch, batches))
        vectors = [vector for batch in results for vector in batch]
        width = self.dimension or len(vectors[0])
        out = np.zeros((len(vectors), width), dtype=np.float64)
        for row, vector in enumerate(vectors):
            if len(vector) != width:
                raise EmbeddingError(
                    f"expected {width}-dimensional embeddings, got {len(vector)}"
                )
            out[row] = vector
        return out

    def describe(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "endpoint": self.endpoint,
            "model": self.model,
            "key_env": self.key_env,
            "concurrency": self.concurrency,
        }


def make_provider(config: Mapping[str, Any] | None = None) -> HashedTfidfEmbedder | RemoteEmbedder:
    """Build a provider from an ``embedder`` config mapping."""
    config = dict(config or {})
    kind = config.get("kind", "local")
    if kind == "local":
        return HashedTfidfEmbedder(dimension=int(config.get("dimension") or DEFAULT_DIMENSION))
    if kind == "remote":
        return RemoteEmbedder(
            endpoint=str(config.get("endpoint") or ""),
            model=str(config.get("model") or ""),
            key_env=str(config.get("key_env") or ""),
            dimension=int(config.get("dimension") or 0),
            concurrency=int(config.get("concurrency") or DEFAULT_CONCURRENCY),
        )
    raise EmbeddingError(f"unknown embedder kind {kind!r}", code="bad-config")


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity; zero whenever either vector has zero norm."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise DomainError(
            f"dimension mismatch: {a.shape} vs {b.shape}", code="dimension-mismatch"
        )
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))


@dataclass
class VectorIndex:
    """Unit (or zero) chunk vectors, one matrix row per chunk.

    ``chunks`` is None for an index loaded from disk until
    :meth:`bind_chunks` re-attaches freshly generated chunks.
    """

    provider: HashedTfidfEmbedder | RemoteEmbedder
    chunk_ids: list[str]
    matrix: np.ndarray
    fingerprint: str
    chunks: list[Chunk] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.chunk_ids)

    def bind_chunks(self, chunks: Sequence[Chunk]) -> None:
        by_id = {chunk.chunk_id: chunk for chunk in chunks}
        if sorted(by_id) != sorted(self.chunk_ids):
            raise DomainError(
                "index does not match the supplied chunks; rebuild it",
                code="index-mismatch",
            )
        self.chunks = [by_id[chunk_id] for chunk_id in self.chunk_ids]


def _fingerprint(provider: Any, chunks: Sequence[Chunk]) -> str:
    digest = hashlib.blake2b(digest_size=16)
    described = provider.describe()
    digest.update(repr(sorted(described.items())).encode("utf-8"))
    for chunk in chunks:
        digest.update(chunk.chunk_id.encode("utf-8"))
        digest.update(b"\0")
        digest.update(chunk.text.encode("utf-8"))
        digest.update(b"\0")
    return digest.hexdigest()


def build_index(chunks: Sequence[Chunk], provider: Any) -> VectorIndex:
    """Embed every chunk text; for the local provider this fits IDF first."""
    texts = [chunk.text for chunk in chunks]
    if hasattr(provider, "fit"):
        provider.fit(texts)
    matrix = provider.embed(texts)
    # Normalize rows so retrieval scores are plain dot products.
    if matrix.size:
        norms = np.linalg.norm(matrix, axis=1)
        nonzero = norms > 0.0
        matrix[nonzero] = matrix[nonzero] / norms[nonzero, None]
    return VectorIndex(
        provider=provider,
        chunk_ids=[chunk.chunk_id for chunk in chunks],
        matrix=matrix,
        fingerprint=_fingerprint(provider, chunks),
        chunks=list(chunks),
    )


def top_k(
    index: VectorIndex,
    query_vector: np.ndarray,
    k: int,
    *,
    allowed_ids: set[str] | None = None,
) -> list[tuple[str, float]]:
    """Exact top-k by cosine, ties broken by chunk id ascending."""
    if k < 1:
        raise DomainError("k must be at least 1", code="bad-k")
    query = np.asarray(query_vector, dtype=np.float64).reshape(-1)
    if index.matrix.size and query.shape[0] != index.matrix.shape[1]:
        raise DomainError(
            f"dimension mismatch: query {query.shape[0]} vs index {index.matrix.shape[1]}",
            code="dimension-mismatch",
        )
    norm = float(np.linalg.norm(query))
    unit = query / norm if norm > 0.0 else query
    scores = index.matrix @ unit if index.matrix.size else np.zeros(0)
    ranked = [
        (chunk_id, float(score))
        for chunk_id, score in zip(index.chunk_ids, scores)
        if allowed_ids is None or chunk_id in allowed_ids
    ]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked[:k]


# -- persistence -----------------------------------------------------------


def _vector_text(row: np.ndarray) -> str:
    slots = np.nonzero(row)[0]
    return " ".join("%d:%.9g" % (slot, row[slot]) for slot in slots)


def _vector_from_text(text: str, dimension: int, where: str) -> np.ndarray:
    row = np.zeros(dimension, dtype=np.float64)
    if not text:
        return row
    for pair in text.split():
        slot_text, _, value_text = pair.partition(":")
        try:
            slot = int(slot_text)
            value = float(value_text)
        except ValueError:
            raise ParseError(f"{where}: bad vector component {pair!r}") from None
        if not 0 <= slot < dimension:
            raise ParseError(f"{where}: slot {slot} outside dimension {dimension}")
        row[slot] = value
    return row


def save_index(index: VectorIndex, path: str | os.PathLike[str]) -> None:
    """Persist as structured text: provider config, then one row per chunk."""
    provider = index.provider
    doc: dict[str, Any] = {
        "format_version": "1",
        "fingerprint": index.fingerprint,
        "provider": provider.describe(),
    }
    if isinstance(provider, HashedTfidfEmbedder):
        doc["provider"]["corpus_size"] = provider.corpus_size
        doc["provider"]["df"] = dict(sorted(provider.df.items()))
    entries = [
        {"chunk_id": chunk_id, "vector": _vector_text(index.matrix[row])}
        for row, chunk_id in enumerate(index.chunk_ids)
    ]
    entries.sort(key=lambda entry: entry["chunk_id"])
    doc["entries"] = entries
    Path(path).write_text(
        yaml.safe_dump(doc, sort_keys=True, allow_unicode=True, width=2**16),
        encoding="utf-8",
    )


def load_index(path: str | os.PathLike[str]) -> VectorIndex:
    """Read a persisted index; call :meth:`VectorIndex.bind_chunks` before use."""
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise ParseError(f"{path}: expected a mapping at the document root")
    if str(doc.get("format_version")) != "1":
        raise ParseError(f"{path}: unsupported index format_version")
    provider_doc = doc.get("provider") or {}
    if not isinstance(provider_doc, Mapping):
        raise ParseError(f"{path}: provider: expected a mapping")
    provider = make_provider(provider_doc)
    if isinstance(provider, HashedTfidfEmbedder):
        provider.corpus_size = int(provider_doc.get("corpus_size") or 0)
        df_doc = provider_doc.get("df") or {}
        if not isinstance(df_doc, Mapping):
            raise ParseError(f"{path}: provider.df: expected a mapping")
        provider.df = {str(token): int(count) for token, count in df_doc.items()}
    dimension = provider.dimension or DEFAULT_DIMENSION
    entries = doc.get("entries") or []
    if not isinstance(entries, list):
        raise ParseError(f"{path}: entries: expected a list")
    chunk_ids: list[str] = []
    rows: list[np.ndarray] = []
    for position, entry in enumerate(entries):
        where = f"{path}: entries[{position}]"
        if not isinstance(entry, Mapping) or "chunk_id" not in entry:
            raise ParseError(f"{where}: expected a mapping with 'chunk_id'")
        chunk_ids.append(str(entry["chunk_id"]))
        rows.append(_vector_from_text(str(entry.get("vector") or ""), dimension, where))
    matrix = np.vstack(rows) if rows else np.zeros((0, dimension), dtype=np.float64)
    return VectorIndex(
        provider=provider,
        chunk_ids=chunk_ids,
        matrix=matrix,
        fingerprint=str(doc.get("fingerprint") or ""),
        chunks=None,
    )


def embed(texts: Sequence[str], provider: Any) -> np.ndarray:
    """Convenience wrapper so callers need not hold a provider method ref."""
    return provider.embed(texts)
