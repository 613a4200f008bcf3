"""Hashed bag-of-tokens features and centroid arithmetic.

Text becomes a sparse L2-normalized vector of dimension ``DEFAULT_DIM`` via
FNV-1a-64 feature hashing. Centroids of sample sets serve as registry keys.
All operations are pure and deterministic across platforms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_DIM = 65536

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1

# Underscore is treated as a separator even though \w would keep it.
_SPLIT = re.compile(r"[\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on runs of non-alphanumeric characters, drop tokens
    shorter than 2 characters. Order and multiplicity are preserved."""
    return [t for t in _SPLIT.split(text.lower()) if len(t) >= 2]


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 20)
def token_index(token: str, dim: int = DEFAULT_DIM) -> int:
    """Feature index of a token: FNV-1a-64 of its UTF-8 bytes, mod dim."""
    return fnv1a64(token.encode("utf-8")) % dim


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sparse float vector with sorted unique indices.

    Used both for unit-norm feature vectors and for (unnormalized) centroids.
    """

    dim: int
    indices: np.ndarray
    values: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def nnz(self) -> int:
        return len(self.indices)


# The two roles a SparseVector plays.
FeatureVector = SparseVector
Centroid = SparseVector


def empty_vector(dim: int = DEFAULT_DIM) -> SparseVector:
    return SparseVector(dim, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))


def from_entries(entries: dict[int, float], dim: int = DEFAULT_DIM) -> SparseVector:
    """Build a vector from an index->value map, dropping zero entries."""
    items = sorted((i, v) for i, v in entries.items() if v != 0.0)
    if not items:
        return empty_vector(dim)
    idx = np.array([i for i, _ in items], dtype=np.int64)
    val = np.array([v for _, v in items], dtype=np.float64)
    return SparseVector(dim, idx, val)


def vectorize(text: str, dim: int = DEFAULT_DIM) -> SparseVector:
    """Hash a text into a sparse L2-normalized bag-of-tokens vector.

    Texts with no surviving token map to the zero vector.
    """
    toks = tokenize(text)
    if not toks:
        return empty_vector(dim)
    idx = np.fromiter((token_index(t, dim) for t in toks), dtype=np.int64, count=len(toks))
    uniq, counts = np.unique(idx, return_counts=True)
    vals = counts.astype(np.float64)
    vals /= np.sqrt(np.dot(vals, vals))
    return SparseVector(dim, uniq, vals)


def centroid(vectors: list[SparseVector]) -> SparseVector:
    """Entrywise arithmetic mean of a non-empty list of vectors."""
    if not vectors:
        raise ValueError("centroid of an empty vector list")
    dim = vectors[0].dim
    all_idx = np.concatenate([v.indices for v in vectors])
    all_val = np.concatenate([v.values for v in vectors])
    if len(all_idx) == 0:
        return empty_vector(dim)
    uniq, inverse = np.unique(all_idx, return_inverse=True)
    sums = np.zeros(len(uniq), dtype=np.float64)
    np.add.at(sums, inverse, all_val)
    sums /= len(vectors)
    keep = sums != 0.0
    return SparseVector(dim, uniq[keep], sums[keep])


def sparse_dot(a: SparseVector, b: SparseVector) -> float:
    """Dot product of two sparse vectors over their index intersection."""
    if len(a.indices) == 0 or len(b.indices) == 0:
        return 0.0
    common, ia, ib = np.intersect1d(a.indices, b.indices, assume_unique=True, return_indices=True)
    if len(common) == 0:
        return 0.0
    return float(np.dot(a.values[ia], b.values[ib]))


def cosine_distance(a: SparseVector, b: SparseVector) -> float:
    """1 - cos(a, b), in [0, 2]. Distance to a zero vector is defined as 1."""
    na = a.norm()
    nb = b.norm()
    if na == 0.0 or nb == 0.0:
        return 1.0
    return 1.0 - sparse_dot(a, b) / (na * nb)
