"""Textual-complexity measures and the complexity-binned error analysis.

Two measures: a readability grade from words-per-sentence and
syllables-per-word, and syntactic complexity as the mean token-to-head
distance in a dependency parse. Stored predictions are then sliced into
quantile bins of either measure and re-scored per bin, which shows how
a model's F1 moves as texts get harder.
"""

from __future__ import annotations

import bisect
import json
import re
from dataclasses import dataclass

import numpy as np

from .classify import macro_f1
from .errors import (
    MalformedConllu,
    MissingProfile,
    NoArcs,
    NoLetters,
    NoWords,
    TooFewSamples,
)
from .features import tokenize_text

_VOWELS = set("aeiouy")
_SENTENCE_SPLIT = re.compile(r"[.!?]+(?:\s+|$)")
_LETTER = re.compile(r"[^\W\d_]", re.UNICODE)


def count_syllables(word: str) -> int:
    """Maximal vowel-group count (aeiouy), dropping a terminal silent "e"
    not preceded by "l", floored at 1."""
    if not _LETTER.search(word):
        raise NoLetters(f"no letters in '{word}'")
    low = word.lower()
    groups = 0
    prev_vowel = False
    for ch in low:
        is_vowel = ch in _VOWELS
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    if len(low) >= 2 and low.endswith("e") and low[-2] != "l":
        groups -= 1
    return max(groups, 1)


def split_sentences(text: str) -> list[str]:
    parts = [p.strip() for p in _SENTENCE_SPLIT.split(text)]
    return [p for p in parts if p]


def text_counts(text: str) -> tuple[int, int, int]:
    """(words, sentences, syllables); words are letter-bearing tokens."""
    words = [t for t in tokenize_text(text).tokens if _LETTER.search(t)]
    sentences = max(len(split_sentences(text)), 1)
    syllables = sum(count_syllables(w) for w in words)
    return len(words), sentences, syllables


def fk_grade(text: str) -> float:
    """0.39 * words/sentence + 11.8 * syllables/word - 15.59."""
    words, sentences, syllables = text_counts(text)
    if words == 0:
        raise NoWords("text has no letter-bearing words")
    return 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59


# ---------------------------------------------------------------------------
# Dependency distance over CoNLL-U parses


@dataclass(frozen=True)
class DepToken:
    position: int
    head: int
    upos: str


def parse_conllu(blob: str) -> list[tuple[str | None, list[DepToken]]]:
    """Split standard 10-column CoNLL-U text into (sent_id, tokens) groups.

    Multi-word ranges and empty nodes are skipped; malformed token lines
    report their line number.
    """
    sentences: list[tuple[str | None, list[DepToken]]] = []
    sent_id: str | None = None
    tokens: list[DepToken] = []
    for lineno, raw in enumerate(blob.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            if tokens:
                sentences.append((sent_id, tokens))
            sent_id, tokens = None, []
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*sent_id\s*=\s*(\S+)", line)
            if m:
                sent_id = m.group(1)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise MalformedConllu(f"expected 10 columns, got {len(cols)}", lineno)
        if "-" in cols[0] or "." in cols[0]:
            continue
        try:
            position = int(cols[0])
            head = int(cols[6])
        except ValueError:
            raise MalformedConllu(f"non-integer ID or HEAD: '{cols[0]}', '{cols[6]}'", lineno) from None
        tokens.append(DepToken(position, head, cols[3]))
    if tokens:
        sentences.append((sent_id, tokens))
    return sentences


def mean_dep_distance(sentences: list[list[DepToken]], include_punct: bool = False) -> float:
    """Mean |position - head position| over all non-root tokens of all
    sentences, excluding punctuation unless asked otherwise."""
    distances: list[int] = []
    for tokens in sentences:
        for tok in tokens:
            if tok.head == 0:
                continue
            if not include_punct and tok.upos == "PUNCT":
                continue
            distances.append(abs(tok.position - tok.head))
    if not distances:
        raise NoArcs("no dependency arcs after exclusions")
    return float(np.mean(distances))


_TRAILING_INDEX = re.compile(r"-\d+\Z")


def group_conllu_by_text(path, known_ids: set[str] | None = None) -> dict[str, list[list[DepToken]]]:
    """Map dataset ids to their sentences via ``# sent_id = <id>[-k]``.

    A sentence id that exactly matches a known dataset id wins; otherwise
    a trailing ``-k`` sentence index is stripped.
    """
    with open(path, encoding="utf-8") as fh:
        blob = fh.read()
    grouped: dict[str, list[list[DepToken]]] = {}
    for sent_id, tokens in parse_conllu(blob):
        if sent_id is None:
            continue
        text_id = sent_id
        if not (known_ids and sent_id in known_ids):
            stripped = _TRAILING_INDEX.sub("", sent_id)
            if known_ids is None or stripped in known_ids:
                text_id = stripped
        grouped.setdefault(text_id, []).append(tokens)
    return grouped


# ---------------------------------------------------------------------------
# Profiles


@dataclass
class ComplexityProfile:
    id: str
    fk_grade: float | None
    mean_dep_distance: float | None
    words: int
    sentences: int
    syllables: int

    def metric(self, name: str) -> float | None:
        if name == "fk":
            return self.fk_grade
        if name == "mdd":
            return self.mean_dep_distance
        raise ValueError(f"unknown metric '{name}'")


def profile_text(example_id: str, text: str, dep_sentences=None) -> ComplexityProfile:
    words, sentences, syllables = text_counts(text)
    fk = 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59 if words else None
    mdd: float | None = None
    if dep_sentences:
        try:
            mdd = mean_dep_distance(dep_sentences)
        except NoArcs:
            mdd = None
    return ComplexityProfile(example_id, fk, mdd, words, sentences, syllables)


def write_profiles(profiles: list[ComplexityProfile], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in profiles:
            fh.write(json.dumps(p.__dict__, ensure_ascii=False) + "\n")


def read_profiles(path) -> dict[str, ComplexityProfile]:
    out: dict[str, ComplexityProfile] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                out[obj["id"]] = ComplexityProfile(**obj)
    return out


# ---------------------------------------------------------------------------
# Binned error analysis


@dataclass
class BinReport:
    metric: str
    edges: list[float]
    bins: list[dict]  # {low, high, count, macro_f1}
    n_bins: int
    requested_bins: int
    vote_rule: str

    def to_json(self) -> str:
        return json.dumps(self.__dict__, ensure_ascii=False, indent=2)

    def to_csv(self) -> str:
        lines = ["bin_low,bin_high,count,macro_f1"]
        for b in self.bins:
            lines.append(f'{b["low"]:.6g},{b["high"]:.6g},{b["count"]},{b["macro_f1"]:.6g}')
        return "\n".join(lines) + "\n"


def majority_vote(labels: list[str]) -> str:
    """Most frequent label; ties go to the lexicographically smallest."""
    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    best = max(counts.values())
    return min(lab for lab, c in counts.items() if c == best)


def bin_and_score(
    predictions: list[dict],
    profiles: dict[str, ComplexityProfile],
    metric: str = "fk",
    n_bins: int = 4,
) -> BinReport:
    """Quantile-bin examples by a complexity metric and re-score each bin.

    Multi-trial predictions are first reduced to one label per example by
    majority vote. Values tied with a bin edge fall into the lower bin.
    If a quantile bin would be empty (heavily tied metric values), the
    bin count is reduced and recorded; below 2 usable bins the analysis
    fails.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    by_id: dict[str, dict] = {}
    for row in predictions:
        entry = by_id.setdefault(row["id"], {"gold": row["gold"], "preds": []})
        entry["preds"].append(row["pred"])
    ids = list(by_id)
    values = []
    for rid in ids:
        prof = profiles.get(rid)
        value = prof.metric(metric) if prof is not None else None
        if value is None:
            raise MissingProfile(f"no {metric} value for id '{rid}'")
        values.append(value)
    values = np.array(values, dtype=float)
    golds = [by_id[rid]["gold"] for rid in ids]
    votes = [majority_vote(by_id[rid]["preds"]) for rid in ids]

    for nb in range(n_bins, 1, -1):
        edges = np.quantile(values, [i / nb for i in range(nb + 1)])
        inner = list(edges[1:-1])
        assignment = [bisect.bisect_left(inner, v) for v in values]
        counts = [assignment.count(b) for b in range(nb)]
        if all(counts):
            bins = []
            for b in range(nb):
                members = [i for i, a in enumerate(assignment) if a == b]
                bins.append(
                    {
                        "low": float(edges[b]),
                        "high": float(edges[b + 1]),
                        "count": len(members),
                        "macro_f1": macro_f1([golds[i] for i in members], [votes[i] for i in members]),
                    }
                )
            return BinReport(
                metric=metric,
                edges=[float(e) for e in edges],
                bins=bins,
                n_bins=nb,
                requested_bins=n_bins,
                vote_rule="majority, ties to lexicographically smallest",
            )
    raise TooFewSamples("metric values too concentrated for even 2 quantile bins")
