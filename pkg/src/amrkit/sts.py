"""Unsupervised semantic similarity: cosine per pair, Spearman against gold.

Gold annotations on the usual [0, 4] scale are mapped to [0, 1] before
scoring. Spearman is rank-based, so the mapping cannot change the
correlation; it is kept (and both gold forms reported) for protocol
fidelity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .classify import fused_matrix
from .dataset import LabeledDataset
from .encoder import EmbeddingSet
from .errors import ConstantInput, DimMismatch, LengthMismatch, MissingScore


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|), with 0 by convention when either operand is zero."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimMismatch(f"shapes {u.shape} and {v.shape} differ")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v / (nu * nv))


def _fractional_ranks(xs: np.ndarray) -> np.ndarray:
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs))
    i = 0
    vals = xs[order]
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and vals[j + 1] == vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1  # average rank, 1-based
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Rank correlation with fractional tie handling."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise LengthMismatch(f"shapes {xs.shape} and {ys.shape} differ")
    if len(xs) < 2:
        raise LengthMismatch("need at least 2 observations")
    rx, ry = _fractional_ranks(xs), _fractional_ranks(ys)
    dx, dy = rx - rx.mean(), ry - ry.mean()
    vx, vy = float(dx @ dx), float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise ConstantInput("an input has zero rank variance")
    return float(dx @ dy / np.sqrt(vx * vy))


@dataclass
class StsResult:
    spearman_rho: float
    n: int
    pairs: list[dict]  # {id, gold, gold_mapped, cosine}
    config: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config,
                "spearman_rho": self.spearman_rho,
                "n": self.n,
                "pairs": self.pairs,
            },
            ensure_ascii=False,
            indent=2,
        )


GOLD_SCALE = 4.0


def run_sts(dataset: LabeledDataset, sources: dict[str, EmbeddingSet]) -> StsResult:
    """Score every pair by fused-vector cosine and correlate with gold.

    Each embedding source must hold both pair elements: ``<id>`` for the
    first and ``<id>::b`` for the second.
    """
    missing = [ex.id for ex in dataset.examples if ex.score is None]
    if missing:
        raise MissingScore(f"examples without score: {', '.join(missing[:5])}")
    ids = dataset.ids()
    left = fused_matrix(ids, sources, pair_mode="joint")
    right = fused_matrix([f"{i}::b" for i in ids], sources, pair_mode="joint")
    golds = np.array([ex.score for ex in dataset.examples])
    mapped = golds / GOLD_SCALE
    cosines = np.array([cosine(left[i], right[i]) for i in range(len(ids))])
    rho = spearman(mapped, cosines)
    pairs = [
        {
            "id": rid,
            "gold": float(golds[i]),
            "gold_mapped": float(mapped[i]),
            "cosine": float(cosines[i]),
        }
        for i, rid in enumerate(ids)
    ]
    config = {"sources": sorted(sources), "gold_scale": GOLD_SCALE, "pair_elements": "::b"}
    return StsResult(float(rho), len(ids), pairs, config)
