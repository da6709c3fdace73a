"""SMATCH: triple-overlap F1 between two AMR graphs under the best
one-to-one variable mapping.

`smatch_score` searches by seeded hill-climbing with restarts (the usual
approach, since exact alignment is NP-hard); `smatch_exact` enumerates
every injective mapping and is the oracle for small graphs. Attribute
constants compare by exact string equality after quote stripping.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass

from .errors import TooLarge
from .graph import AmrGraph

DEFAULT_RESTARTS = 4


@dataclass(frozen=True)
class SmatchResult:
    precision: float
    recall: float
    f1: float
    matched: int
    mapping: dict[str, str]


def _strip_quotes(value: str) -> str:
    if len(value) >= 2 and value.startswith('"') and value.endswith('"'):
        return value[1:-1]
    return value


class _Side:
    """A graph reduced to integer-indexed match items."""

    def __init__(self, g: AmrGraph):
        self.vars = list(g.variables)
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.concepts = [g.concepts[v] for v in self.vars]
        self.top = self.index[g.top]
        self.relations = [(e.role, self.index[e.source], self.index[e.target]) for e in g.edges]
        self.attributes = [
            (a.role, self.index[a.source], _strip_quotes(a.value)) for a in g.attributes
        ]
        self.size = len(self.vars) + 1 + len(self.relations) + len(self.attributes)


def _matched(a: _Side, b: _Side, mapping: list[int]) -> int:
    count = 0
    for i, j in enumerate(mapping):
        if j >= 0 and a.concepts[i] == b.concepts[j]:
            count += 1
    if mapping[a.top] == b.top:
        count += 1
    rel_b = Counter(b.relations)
    rel_a = Counter(
        (role, mapping[s], mapping[t])
        for role, s, t in a.relations
        if mapping[s] >= 0 and mapping[t] >= 0
    )
    count += sum(min(n, rel_b[key]) for key, n in rel_a.items())
    att_b = Counter(b.attributes)
    att_a = Counter(
        (role, mapping[s], v) for role, s, v in a.attributes if mapping[s] >= 0
    )
    count += sum(min(n, att_b[key]) for key, n in att_a.items())
    return count


def _result(a: _Side, b: _Side, mapping: list[int], matched: int) -> SmatchResult:
    precision = matched / a.size if a.size else 0.0
    recall = matched / b.size if b.size else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    named = {a.vars[i]: b.vars[j] for i, j in enumerate(mapping) if j >= 0}
    return SmatchResult(precision, recall, f1, matched, named)


def _greedy_init(a: _Side, b: _Side) -> list[int]:
    mapping = [-1] * len(a.vars)
    used = set()
    for i, concept in enumerate(a.concepts):
        for j, other in enumerate(b.concepts):
            if j not in used and other == concept:
                mapping[i] = j
                used.add(j)
                break
    return mapping


def _random_init(a: _Side, b: _Side, rng: random.Random) -> list[int]:
    idx = list(range(len(b.vars)))
    rng.shuffle(idx)
    mapping = [-1] * len(a.vars)
    for i in range(min(len(a.vars), len(b.vars))):
        mapping[i] = idx[i]
    return mapping


def _hill_climb(a: _Side, b: _Side, mapping: list[int]) -> tuple[list[int], int]:
    score = _matched(a, b, mapping)
    n1, n2 = len(a.vars), len(b.vars)
    while True:
        best_gain = 0
        best_apply = None
        used = set(m for m in mapping if m >= 0)
        # Single-variable moves, then pairwise swaps; first candidate wins
        # ties so the climb is deterministic.
        for i in range(n1):
            for j in range(n2):
                if mapping[i] == j or j in used:
                    continue
                old = mapping[i]
                mapping[i] = j
                gain = _matched(a, b, mapping) - score
                mapping[i] = old
                if gain > best_gain:
                    best_gain, best_apply = gain, ("move", i, j)
        for i1 in range(n1):
            for i2 in range(i1 + 1, n1):
                if mapping[i1] == mapping[i2]:
                    continue
                mapping[i1], mapping[i2] = mapping[i2], mapping[i1]
                gain = _matched(a, b, mapping) - score
                mapping[i1], mapping[i2] = mapping[i2], mapping[i1]
                if gain > best_gain:
                    best_gain, best_apply = gain, ("swap", i1, i2)
        if best_apply is None:
            return mapping, score
        kind, x, y = best_apply
        if kind == "move":
            mapping[x] = y
        else:
            mapping[x], mapping[y] = mapping[y], mapping[x]
        score += best_gain


def smatch_score(
    g1: AmrGraph, g2: AmrGraph, restarts: int = DEFAULT_RESTARTS, seed: int = 0
) -> SmatchResult:
    """Hill-climbed SMATCH between ``g1`` (precision side) and ``g2``.

    Restart 0 starts from a greedy concept-agreement mapping; later
    restarts start from seeded random injective mappings. The best
    restart wins, ties broken by restart index. Deterministic given
    ``seed``.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    a, b = _Side(g1), _Side(g2)
    best: tuple[list[int], int] | None = None
    for r in range(restarts):
        if r == 0:
            init = _greedy_init(a, b)
        else:
            init = _random_init(a, b, random.Random(seed * 7919 + r))
        mapping, score = _hill_climb(a, b, init)
        if best is None or score > best[1]:
            best = (mapping, score)
    return _result(a, b, best[0], best[1])


_EXACT_VAR_BOUND = 8


def smatch_exact(g1: AmrGraph, g2: AmrGraph) -> SmatchResult:
    """Globally optimal SMATCH by exhausting injective mappings from the
    smaller variable set into the larger. Raises TooLarge when both
    graphs have more than 8 variables."""
    a, b = _Side(g1), _Side(g2)
    n1, n2 = len(a.vars), len(b.vars)
    if min(n1, n2) > _EXACT_VAR_BOUND:
        raise TooLarge(
            f"exact matching needs min(|vars|) <= {_EXACT_VAR_BOUND}, got {min(n1, n2)}"
        )
    best_mapping = [-1] * n1
    best_score = _matched(a, b, best_mapping)
    if n1 <= n2:
        for perm in itertools.permutations(range(n2), n1):
            score = _matched(a, b, list(perm))
            if score > best_score:
                best_score, best_mapping = score, list(perm)
    else:
        for perm in itertools.permutations(range(n1), n2):
            mapping = [-1] * n1
            for j, i in enumerate(perm):
                mapping[i] = j
            score = _matched(a, b, mapping)
            if score > best_score:
                best_score, best_mapping = score, mapping
    return _result(a, b, best_mapping, best_score)


def micro_average(results: list[SmatchResult], sizes: list[tuple[int, int]]) -> tuple[float, float, float]:
    """Corpus-level P/R/F1: summed matched counts over summed triple counts."""
    matched = sum(r.matched for r in results)
    total1 = sum(s1 for s1, _ in sizes)
    total2 = sum(s2 for _, s2 in sizes)
    p = matched / total1 if total1 else 0.0
    r = matched / total2 if total2 else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def graph_size(g: AmrGraph) -> int:
    """Number of canonical triples (the SMATCH denominator for one side)."""
    return _Side(g).size
