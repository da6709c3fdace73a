"""amrkit: parse, linearize, embed, and evaluate AMR graphs alongside text."""

from .graph import AmrGraph, parse_penman, serialize_penman, triples

__all__ = ["AmrGraph", "parse_penman", "serialize_penman", "triples"]

__version__ = "0.1.0"
