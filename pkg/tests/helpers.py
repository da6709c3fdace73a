"""Shared generators for graph and dataset tests."""

import random

from amrkit.dataset import Example, LabeledDataset
from amrkit.graph import AmrGraph

CONCEPTS = [
    "advise-01",
    "exercise-01",
    "epidemic",
    "happen-01",
    "person",
    "go-02",
    "city",
    "rest-01",
    "temporal-quantity",
    "condition",
]

ROLES = [":ARG0", ":ARG1", ":ARG2", ":time", ":condition", ":mod", ":frequency"]


def random_graph(rng: random.Random, max_vars: int = 6) -> AmrGraph:
    """A connected random graph: a spanning tree plus occasional extra
    re-entrant edges and attributes."""
    n = rng.randint(1, max_vars)
    names = [f"x{i}" for i in range(n)]
    concepts = {v: rng.choice(CONCEPTS) for v in names}
    edges = []
    for i in range(1, n):
        parent = names[rng.randrange(i)]
        edges.append((parent, rng.choice(ROLES), names[i]))
    if n >= 2 and rng.random() < 0.5:
        s, t = rng.sample(names, 2)
        edges.append((s, rng.choice(ROLES), t))
    attributes = []
    if rng.random() < 0.6:
        attributes.append((rng.choice(names), ":quant", str(rng.randint(1, 200))))
    if rng.random() < 0.3:
        attributes.append((rng.choice(names), ":name", '"Springfield"'))
    return AmrGraph.build(names[0], concepts, edges, attributes)


ACTIONS = ["exercise-01", "rest-01", "eat-01", "walk-01", "sleep-01", "drink-01"]
DISTRACTOR_ROLES = [":time", ":mod", ":manner"]


def conditional_dataset(n: int = 100, seed: int = 0) -> LabeledDataset:
    """Labels depend only on whether the AMR carries a ":condition" role;
    the texts are all identical, so text features carry no signal."""
    rng = random.Random(seed)
    examples = []
    for i in range(n):
        has_cond = i % 2 == 0
        role = ":condition" if has_cond else rng.choice(DISTRACTOR_ROLES)
        amr = (
            f"(a / advise-01 :ARG1 (e / {rng.choice(ACTIONS)}) "
            f"{role} (x / {rng.choice(ACTIONS)}))"
        )
        examples.append(
            Example(
                id=f"ex{i}",
                text="the advice text.",
                amr=amr,
                label="conditional" if has_cond else "plain",
            )
        )
    return LabeledDataset(examples)


def pair_dataset(n_train: int = 60, n_test: int = 30, seed: int = 1) -> LabeledDataset:
    """Fixed-split pair task: the pair conflicts iff the second text
    contains the token "never"."""
    rng = random.Random(seed)
    examples = []
    for i in range(n_train + n_test):
        positive = i % 2 == 0
        action = rng.choice(["aspirin", "exercise", "fasting", "stretching"])
        second = f"you should never try {action} at home" if positive else f"{action} is fine for most people"
        examples.append(
            Example(
                id=f"pair{i}",
                text=f"doctors suggest {action} every morning.",
                text_b=second,
                label="conflict" if positive else "consistent",
                split="train" if i < n_train else "test",
            )
        )
    return LabeledDataset(examples)
