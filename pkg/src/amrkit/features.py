"""Signed feature hashing: token sequences to fixed-dimension sparse vectors.

Each n-gram is hashed with 64-bit FNV-1a; the low bits pick the bucket
and the top bit picks the sign, so collisions cancel in expectation.
Vectors are L2-normalized, which makes downstream cosines and the
contrastive loss scale-free.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDim
from .linearize import TokenSequence

DEFAULT_DIM = 32768

# Joiner for multi-token n-grams; cannot occur inside a token.
_NGRAM_JOIN = "␟"

# Lowercased alphanumeric runs, with ":"-prefixed role tokens (possibly
# hyphenated, e.g. ":consist-of") kept intact so graph relations survive
# as features.
_TOKEN_RE = re.compile(r":[0-9a-z][0-9a-z-]*|[^\W_]+", re.UNICODE)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class SparseVector:
    dim: int
    entries: dict[int, float] = field(default_factory=dict)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for i, v in self.entries.items():
            out[i] = v
        return out


def tokenize_text(text: str) -> TokenSequence:
    """Lowercase and split into alphanumeric runs, keeping ":" role tokens."""
    return TokenSequence(tuple(_TOKEN_RE.findall(text.lower())))


def hash_features(tokens: TokenSequence, dim: int = DEFAULT_DIM, ngram_max: int = 1) -> SparseVector:
    """Hash ``tokens`` (and bigrams when ``ngram_max`` is 2) into a signed,
    L2-normalized sparse vector. Empty input gives the zero vector."""
    if dim <= 0 or dim & (dim - 1):
        raise BadDim(f"dim must be a power of two, got {dim}")
    if ngram_max not in (1, 2):
        raise ValueError(f"ngram_max must be 1 or 2, got {ngram_max}")
    entries: dict[int, float] = {}
    toks = tokens.tokens
    for n in range(1, ngram_max + 1):
        for start in range(len(toks) - n + 1):
            gram = _NGRAM_JOIN.join(toks[start : start + n])
            h = fnv1a64(gram.encode("utf-8"))
            sign = 1.0 if h >> 63 == 0 else -1.0
            idx = h % dim
            entries[idx] = entries.get(idx, 0.0) + sign
    entries = {i: v for i, v in entries.items() if v != 0.0}
    norm = np.sqrt(sum(v * v for v in entries.values()))
    if norm == 0.0:
        return SparseVector(dim, {})
    return SparseVector(dim, {i: v / norm for i, v in entries.items()})
