"""Sentence vectors through pluggable providers, plus cosine similarity.

Two providers are available:

* ``hashed_fallback`` — a deterministic feature-hashing embedder that makes
  the whole pipeline runnable without any ML runtime.  Features are the
  token unigrams plus the character trigrams of the space-joined token
  string; each feature adds +1 at index ``fnv1a_64(feature) % dim`` and the
  count vector is L2-normalized.  Empty feature sets map to the zero vector.
* ``vector_cache`` — a precomputed text-to-vector table (TSV, keyed by the
  FNV-1a-64 hex digest of the raw text) for carrying real transformer
  embeddings produced elsewhere.

All vectors are unit-norm except the designated zero vector for degenerate
text, and ``cosine`` with a zero vector is 0 by convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._text import tokenize
from .errors import CacheMiss, DimensionMismatch, SchemaViolation

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

PROVIDER_KINDS = ("hashed_fallback", "vector_cache")
DEFAULT_DIM = 256


def fnv1a_64(data: str | bytes) -> int:
    """FNV-1a 64-bit hash of UTF-8 bytes."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def cache_key(text: str) -> str:
    """Lowercase hex FNV-1a-64 of the raw text, zero-padded to 16 digits."""
    return format(fnv1a_64(text), "016x")


def cosine(u, v) -> float:
    """Cosine similarity; 0.0 when either norm is 0, exactly 1.0 for
    elementwise-identical nonzero vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"cosine of shapes {u.shape} and {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if np.array_equal(u, v):
        return 1.0
    return float(np.dot(u, v) / (nu * nv))


@dataclass(frozen=True)
class ProviderConfig:
    provider_kind: str
    dim: int = DEFAULT_DIM
    cache_path: str | None = None

    def __post_init__(self):
        if self.provider_kind not in PROVIDER_KINDS:
            raise ValueError(f"unknown provider kind {self.provider_kind!r}")
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.provider_kind == "vector_cache" and not self.cache_path:
            raise ValueError("vector_cache provider requires cache_path")


class HashedEmbedder:
    """Deterministic hashed bag-of-features embedder."""

    kind = "hashed_fallback"

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = dim

    def embed_one(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        joined = " ".join(tokens)
        features = list(tokens)
        features.extend(joined[i : i + 3] for i in range(len(joined) - 2))
        counts = np.zeros(self.dim, dtype=np.float64)
        for feature in features:
            counts[fnv1a_64(feature) % self.dim] += 1.0
        norm = np.linalg.norm(counts)
        if norm == 0.0:
            return counts
        return counts / norm

    def embed(self, texts) -> np.ndarray:
        return np.array([self.embed_one(t) for t in texts], dtype=np.float64).reshape(
            len(texts), self.dim
        )


class CacheEmbedder:
    """Looks texts up in a precomputed key->vector table.

    The table is loaded eagerly; the embedder is read-only afterwards.
    Non-zero rows are renormalized to unit length on load so the vector
    contract holds regardless of how the cache was produced.
    """

    kind = "vector_cache"

    def __init__(self, path, dim: int | None = None):
        self.path = str(path)
        self._table: dict[str, np.ndarray] = {}
        with open(path, encoding="utf-8") as handle:
            header = handle.readline().strip()
            if not header.startswith("#dim="):
                raise SchemaViolation(
                    f"vector cache {self.path} missing '#dim=' header"
                )
            file_dim = int(header[len("#dim=") :])
            if file_dim < 2:
                raise SchemaViolation(f"vector cache dim must be >= 2, got {file_dim}")
            if dim is not None and dim != file_dim:
                raise DimensionMismatch(
                    f"cache {self.path} has dim {file_dim}, expected {dim}"
                )
            self.dim = file_dim
            for lineno, line in enumerate(handle, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                key, components = parts[0], parts[1:]
                if len(components) != self.dim:
                    raise DimensionMismatch(
                        f"cache row {lineno} has {len(components)} components, "
                        f"expected {self.dim}"
                    )
                vec = np.array([float(c) for c in components], dtype=np.float64)
                norm = np.linalg.norm(vec)
                if norm > 0.0:
                    vec = vec / norm
                self._table[key] = vec

    def embed_one(self, text: str) -> np.ndarray:
        key = cache_key(text)
        try:
            return self._table[key]
        except KeyError:
            raise CacheMiss(key, text) from None

    def embed(self, texts) -> np.ndarray:
        return np.array([self.embed_one(t) for t in texts], dtype=np.float64).reshape(
            len(texts), self.dim
        )


def make_embedder(cfg: ProviderConfig):
    if cfg.provider_kind == "hashed_fallback":
        return HashedEmbedder(dim=cfg.dim)
    return CacheEmbedder(cfg.cache_path, dim=cfg.dim)


def embed(texts, cfg: ProviderConfig) -> np.ndarray:
    """Embed texts under the given provider config, one row per text."""
    return make_embedder(cfg).embed(texts)


def read_cache_dim(path) -> int:
    """Peek the ``#dim=`` header of a vector-cache file."""
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip()
    if not header.startswith("#dim="):
        raise SchemaViolation(f"vector cache {path} missing '#dim=' header")
    return int(header[len("#dim=") :])


def write_vector_cache(path, texts, vectors) -> None:
    """Write a vector-cache TSV keyed by each text's FNV-1a-64 digest."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if len(texts) != len(vectors):
        raise DimensionMismatch(
            f"{len(texts)} texts but {len(vectors)} vectors"
        )
    with open(path, "w", encoding="utf-8") as handle:
        dim = vectors.shape[1] if len(vectors) else DEFAULT_DIM
        handle.write(f"#dim={dim}\n")
        for text, vec in zip(texts, vectors):
            row = "\t".join(repr(float(c)) for c in vec)
            handle.write(f"{cache_key(text)}\t{row}\n")
