"""Flatten AMR graphs into token sequences by depth-first traversal.

The traversal mirrors serialization: concepts and role tokens in stored
child order, parentheses marking node boundaries, and an indexed
placeholder per re-entered variable so co-reference stays explicit in
the flat form. Variables are dropped by default since the concepts carry
the semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GraphError
from .graph import AmrGraph, walk


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    source_id: str | None = None

    def joined(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class LinearizeOptions:
    keep_parens: bool = True
    keep_variables: bool = False
    reentrancy_template: str = "<R{}>"


def linearize(
    graph: AmrGraph,
    options: LinearizeOptions = LinearizeOptions(),
    source_id: str | None = None,
) -> TokenSequence:
    """Linearize ``graph`` depth-first from its top.

    Each expanded node emits "(", its concept (preceded by the variable
    and "/" when ``keep_variables``), its relations in stored order (role
    token, then the recursively linearized child or the constant), and
    ")". A variable seen again emits its re-entrancy token instead of
    re-expansion; tokens are numbered per distinct re-entered variable in
    order of first re-reference.
    """
    tokens: list[str] = []
    reent: dict[str, str] = {}
    for event in walk(graph):
        if event[0] == "enter":
            _, var, concept = event
            if options.keep_parens:
                tokens.append("(")
            if options.keep_variables:
                tokens.extend([var, "/"])
            tokens.append(concept)
        elif event[0] == "role":
            _, role_token, kind, payload = event
            tokens.append(role_token)
            if kind == "ref":
                if payload not in reent:
                    tag = options.reentrancy_template.format(len(reent))
                    if tag in graph.concepts.values():
                        raise GraphError(
                            f"re-entrancy token '{tag}' collides with a concept label"
                        )
                    reent[payload] = tag
                tokens.append(reent[payload])
            elif kind == "const":
                tokens.append(payload)
        elif options.keep_parens:
            tokens.append(")")
    return TokenSequence(tuple(tokens), source_id)
