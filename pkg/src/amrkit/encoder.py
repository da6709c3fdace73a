"""Dense embeddings: a linear encoder trained with the multiple-negatives
ranking objective, plus the newline-delimited embedding file format shared
with external producers.

The encoder projects hashed feature vectors through a trainable matrix
and L2-normalizes, so cosine similarity is the native geometry. Training
treats every other positive in the batch as a negative in addition to
each triplet's hard negative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimMismatch,
    DuplicateId,
    EmptyBatch,
    EmptyFile,
    MalformedRecord,
)
from .features import SparseVector, hash_features, tokenize_text
from .graph import parse_penman
from .linearize import LinearizeOptions, linearize


@dataclass(frozen=True)
class EncoderConfig:
    dim_in: int = 32768
    dim_out: int = 256
    scale: float = 20.0
    learning_rate: float = 1e-2
    epochs: int = 5
    batch_size: int = 32
    seed: int = 13

    def __post_init__(self):
        if self.dim_in < 1 or self.dim_out < 1:
            raise ValueError("encoder dimensions must be positive")
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("bad epochs or batch size")


@dataclass
class EncoderParams:
    weights: np.ndarray  # (dim_in, dim_out)
    config: EncoderConfig


@dataclass
class EmbeddingSet:
    dim: int | None
    records: dict[str, np.ndarray] = field(default_factory=dict)


def init_params(config: EncoderConfig) -> EncoderParams:
    rng = np.random.default_rng(config.seed)
    w = rng.standard_normal((config.dim_in, config.dim_out)) / np.sqrt(config.dim_in)
    return EncoderParams(w, config)


def encode(v: SparseVector, params: EncoderParams) -> np.ndarray:
    """Project a sparse vector and L2-normalize; zero in, zero out."""
    w = params.weights
    if v.dim != w.shape[0]:
        raise DimMismatch(f"input dim {v.dim} != encoder dim_in {w.shape[0]}")
    y = np.zeros(w.shape[1])
    for i, val in v.entries.items():
        y += val * w[i]
    norm = np.linalg.norm(y)
    return y / norm if norm > 0 else y


def _normalize_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(x, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return x / safe[:, None], norms


def _grad_through_norm(d_hat: np.ndarray, x_hat: np.ndarray, norms: np.ndarray) -> np.ndarray:
    # For y = x/|x|: dL/dx = (dL/dy - (y . dL/dy) y) / |x|; zero rows get
    # zero gradient by the same convention as encode().
    inner = np.sum(d_hat * x_hat, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    out = (d_hat - inner * x_hat) / safe[:, None]
    out[norms == 0] = 0.0
    return out


def mnr_loss_and_grad(anchors, positives, negatives, params: EncoderParams):
    """Multiple-negatives ranking loss and its gradient over the weights.

    Inputs are pre-projection row matrices (dense or scipy sparse) of
    equal batch size N. With normalized projections a, p, n and scale
    lam, row i scores lam*cos(a_i, p_j) against every positive and
    lam*cos(a_i, n_j) against every negative; the loss is the mean
    cross-entropy of picking p_i. Returns (loss, dW).
    """
    w = params.weights
    mats = []
    for x in (anchors, positives, negatives):
        x = sp.csr_matrix(x) if sp.issparse(x) else np.asarray(x, dtype=float)
        if x.ndim != 2:
            raise DimMismatch("batches must be 2-d (N x dim_in)")
        if x.shape[1] != w.shape[0]:
            raise DimMismatch(f"batch dim {x.shape[1]} != encoder dim_in {w.shape[0]}")
        mats.append(x)
    n = mats[0].shape[0]
    if n == 0:
        raise EmptyBatch("empty batch")
    if any(m.shape[0] != n for m in mats[1:]):
        raise DimMismatch("anchor/positive/negative batch sizes differ")

    projected = [np.asarray(m @ w) for m in mats]
    (a_hat, a_n), (p_hat, p_n), (g_hat, g_n) = (_normalize_rows(m) for m in projected)
    lam = params.config.scale

    s = lam * (a_hat @ p_hat.T)  # N x N, diagonal holds the true pairs
    t = lam * (a_hat @ g_hat.T)
    z = np.concatenate([s, t], axis=1)
    zmax = z.max(axis=1, keepdims=True)
    expz = np.exp(z - zmax)
    denom = expz.sum(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(denom[:, 0])
    loss = float(np.mean(lse - np.diag(s)))

    q = expz / denom  # softmax over the 2N logits per row
    gs = (q[:, :n] - np.eye(n)) / n
    gt = q[:, n:] / n
    d_a_hat = lam * (gs @ p_hat + gt @ g_hat)
    d_p_hat = lam * (gs.T @ a_hat)
    d_g_hat = lam * (gt.T @ a_hat)

    grads = (
        _grad_through_norm(d_a_hat, a_hat, a_n),
        _grad_through_norm(d_p_hat, p_hat, p_n),
        _grad_through_norm(d_g_hat, g_hat, g_n),
    )
    dw = np.zeros_like(w)
    for m, d in zip(mats, grads):
        dw += np.asarray(m.T @ d)
    return loss, dw


@dataclass
class TrainResult:
    params: EncoderParams
    epoch_losses: list[float]


def read_triplets(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"bad JSON: {exc.msg}", lineno) from None
            if not all(isinstance(obj.get(k), str) for k in ("anchor", "positive", "negative")):
                raise MalformedRecord("record needs string anchor/positive/negative", lineno)
            rows.append(obj)
    if not rows:
        raise EmptyFile(f"no triplets in {path}")
    return rows


def featurize_value(value: str, mode: str, dim: int, ngram_max: int) -> SparseVector:
    """Hash a raw text or a PENMAN string, per ``mode`` ("text" | "amr")."""
    if mode == "amr":
        tokens = linearize(parse_penman(value), LinearizeOptions())
    elif mode == "text":
        tokens = tokenize_text(value)
    else:
        raise ValueError(f"unknown featurization mode '{mode}'")
    return hash_features(tokens, dim=dim, ngram_max=ngram_max)


def _stack(vectors: list[SparseVector]) -> sp.csr_matrix:
    dim = vectors[0].dim
    data, indices, indptr = [], [], [0]
    for v in vectors:
        for i, val in sorted(v.entries.items()):
            indices.append(i)
            data.append(val)
        indptr.append(len(indices))
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def train_contrastive(
    triplet_path,
    config: EncoderConfig = EncoderConfig(),
    mode: str = "text",
    ngram_max: int = 1,
) -> TrainResult:
    """Mini-batch gradient descent on the ranking loss over a triplet file.

    Sides are featurized with ``mode`` (raw text or PENMAN strings),
    shuffling is fixed by the config seed, and the per-epoch mean loss is
    recorded. Zero epochs returns the seeded initialization untouched.
    """
    rows = read_triplets(triplet_path)
    xa = _stack([featurize_value(r["anchor"], mode, config.dim_in, ngram_max) for r in rows])
    xp = _stack([featurize_value(r["positive"], mode, config.dim_in, ngram_max) for r in rows])
    xn = _stack([featurize_value(r["negative"], mode, config.dim_in, ngram_max) for r in rows])

    params = init_params(config)
    rng = np.random.default_rng(config.seed)
    losses: list[float] = []
    n = len(rows)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grad = mnr_loss_and_grad(xa[batch], xp[batch], xn[batch], params)
            params.weights = params.weights - config.learning_rate * grad
            total += loss * len(batch)
        losses.append(total / n)
    return TrainResult(params, losses)


# ---------------------------------------------------------------------------
# Embedding files: one {"id": ..., "vector": [...]} object per line


def write_embeddings(embeddings: EmbeddingSet, path) -> None:
    """Write newline-delimited records, floats at 9 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        for rid, vec in embeddings.records.items():
            body = ", ".join(format(float(x), ".9g") for x in vec)
            fh.write(f'{{"id": {json.dumps(rid)}, "vector": [{body}]}}\n')


def read_embeddings(path) -> EmbeddingSet:
    """Read an embedding file; the first record fixes the dimension."""
    records: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"bad JSON: {exc.msg}", lineno) from None
            if not isinstance(obj, dict) or "id" not in obj or "vector" not in obj:
                raise MalformedRecord("record needs 'id' and 'vector'", lineno)
            rid, vec = obj["id"], obj["vector"]
            if not isinstance(rid, str) or not isinstance(vec, list):
                raise MalformedRecord("'id' must be a string and 'vector' a list", lineno)
            try:
                arr = np.array([float(x) for x in vec])
            except (TypeError, ValueError):
                raise MalformedRecord("vector entries must be numbers", lineno) from None
            if rid in records:
                raise DuplicateId(f"duplicate id '{rid}' at line {lineno}")
            if dim is None:
                dim = arr.size
            elif arr.size != dim:
                raise DimMismatch(f"vector of dim {arr.size} != {dim} at line {lineno}")
            records[rid] = arr
    return EmbeddingSet(dim, records)


# ---------------------------------------------------------------------------
# Parameter files (.npz with a JSON-encoded config)


def save_params(params: EncoderParams, path) -> None:
    cfg = json.dumps(params.config.__dict__, sort_keys=True)
    np.savez(path, weights=params.weights, config=np.frombuffer(cfg.encode(), dtype=np.uint8))


def load_params(path) -> EncoderParams:
    with np.load(path) as data:
        cfg = json.loads(bytes(data["config"]).decode())
        return EncoderParams(data["weights"].copy(), EncoderConfig(**cfg))
