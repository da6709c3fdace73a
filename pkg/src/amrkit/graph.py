"""AMR graphs in PENMAN notation: parsing, validation, serialization.

An AMR graph is a rooted, labeled, possibly re-entrant graph. The text
form looks like::

    (a / advise-01
        :ARG1 (e / exercise-01
            :ARG0 a)
        :frequency (t / temporal-quantity :quant 100))

Parsing normalizes inverse roles (``:ARG0-of``) to forward edges with the
direction flipped; an ``inverted`` flag records the original attachment
side. Graphs are immutable after construction and safe to share across
workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    DanglingReference,
    DuplicateVariable,
    EmptyInput,
    GraphError,
    UnbalancedParens,
)

# Lexical shape of AMR variables (single letter plus optional index, "h",
# "e2"). A bare token of this shape that is never declared is treated as a
# dangling variable reference rather than a symbol constant.
_VAR_SHAPE = re.compile(r"[a-z][0-9]*\Z")

_ATOM_DELIMS = set('()"/ \t\r\n')


@dataclass(frozen=True)
class Edge:
    """A relation between two variables, stored in forward orientation.

    ``inverted`` is True when the source text attached this edge at the
    target side using an ``-of`` role; serialization re-derives the
    orientation from the traversal, so the flag is provenance only.
    ``index`` is the relation's position in declaration order, shared
    with attributes, and fixes child order during traversal.
    """

    source: str
    role: str
    target: str
    inverted: bool = False
    index: int = 0


@dataclass(frozen=True)
class Attribute:
    """A relation from a variable to a constant (number, symbol, or quoted
    string; quoted values keep their quotes)."""

    source: str
    role: str
    value: str
    index: int = 0


@dataclass(frozen=True)
class Triple:
    """Canonical matching form: instance, relation, attribute, or top."""

    kind: str
    role: str
    source: str
    target: str


@dataclass(frozen=True)
class AmrGraph:
    variables: tuple[str, ...]
    concepts: dict[str, str]
    edges: tuple[Edge, ...]
    attributes: tuple[Attribute, ...]
    top: str

    @classmethod
    def build(cls, top, concepts, edges=(), attributes=()) -> "AmrGraph":
        """Construct a graph from plain tuples, assigning relation order.

        ``edges`` entries are (source, role, target); ``attributes``
        entries are (source, role, value). Edges precede attributes in
        child order. The result is validated.
        """
        e = tuple(Edge(s, r, t, False, i) for i, (s, r, t) in enumerate(edges))
        a = tuple(
            Attribute(s, r, v, len(e) + i) for i, (s, r, v) in enumerate(attributes)
        )
        g = cls(tuple(concepts), dict(concepts), e, a, top)
        g.validate()
        return g

    def validate(self) -> None:
        """Check structural invariants, raising GraphError on violation."""
        vars_ = self.variables
        if len(set(vars_)) != len(vars_):
            raise GraphError("duplicate variable names")
        vset = set(vars_)
        if self.top not in vset:
            raise GraphError(f"top variable '{self.top}' is not declared")
        if set(self.concepts) != vset:
            raise GraphError("variables and concepts do not coincide")
        for e in self.edges:
            if e.source not in vset or e.target not in vset:
                raise GraphError(f"edge endpoint not declared: {e.source} {e.role} {e.target}")
            _check_role(e.role)
        for a in self.attributes:
            if a.source not in vset:
                raise GraphError(f"attribute source '{a.source}' is not declared")
            _check_role(a.role)
            # Unquoted constants that look like variables would re-parse as
            # references; reject them so serialization stays unambiguous.
            if a.value in vset or (not a.value.startswith('"') and _VAR_SHAPE.match(a.value)):
                raise GraphError(
                    f"attribute value '{a.value}' is ambiguous with a variable; quote it"
                )
        # Reachability from top, treating edges as undirected.
        adj: dict[str, list[str]] = {v: [] for v in vars_}
        for e in self.edges:
            adj[e.source].append(e.target)
            adj[e.target].append(e.source)
        seen = {self.top}
        queue = [self.top]
        while queue:
            v = queue.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if seen != vset:
            missing = sorted(vset - seen)
            raise GraphError(f"variables unreachable from top: {', '.join(missing)}")


def _check_role(role: str) -> None:
    if not role.startswith(":") or len(role) < 2:
        raise GraphError(f"invalid role '{role}'")


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Tok:
    kind: str  # "(" ")" "/" "role" "atom" "string"
    text: str
    pos: int  # character offset into the input


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    n = len(text)
    at_line_start = True
    while i < n:
        c = text[i]
        if at_line_start and c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "\n":
            at_line_start = True
            i += 1
            continue
        if c in " \t\r":
            i += 1
            continue
        at_line_start = False
        if c in "()/":
            toks.append(_Tok(c, c, i))
            i += 1
            continue
        if c == '"':
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == '"':
                    break
                j += 1
            if j >= n:
                raise GraphError("unterminated string", _byte_offset(text, i))
            toks.append(_Tok("string", text[i : j + 1], i))
            i = j + 1
            continue
        j = i
        while j < n and text[j] not in _ATOM_DELIMS:
            j += 1
        atom = text[i:j]
        toks.append(_Tok("role" if atom.startswith(":") else "atom", atom, i))
        i = j
    return toks


# ---------------------------------------------------------------------------
# Parser


def parse_penman(text: str) -> AmrGraph:
    """Parse one PENMAN graph from ``text``.

    Lines starting with ``#`` are ignored. Inverse ``-of`` roles on
    variable targets are normalized to forward edges with the direction
    flipped. A bare token in value position becomes a re-entrant edge when
    it names a declared variable (forward references allowed), a dangling
    reference error when it merely looks like one, and a constant
    otherwise.

    Raises EmptyInput, UnbalancedParens, DuplicateVariable, or
    DanglingReference, each carrying the byte offset of the problem;
    other syntax violations raise GraphError.
    """
    toks = _tokenize(text)
    if not toks:
        raise EmptyInput("no graph in input", 0)

    def off(tok: _Tok) -> int:
        return _byte_offset(text, tok.pos)

    def end_off() -> int:
        return _byte_offset(text, len(text))

    variables: list[str] = []
    concepts: dict[str, str] = {}
    declared_at: dict[str, int] = {}
    # (source, role, kind, payload, pos) with kind "var" | "bare" | "const"
    relations: list[tuple[str, str, str, str, int]] = []

    pos = 0

    def take() -> _Tok:
        nonlocal pos
        if pos >= len(toks):
            raise UnbalancedParens("unexpected end of input", end_off())
        tok = toks[pos]
        pos += 1
        return tok

    tok = take()
    if tok.kind != "(":
        raise GraphError(f"expected '(' but found '{tok.text}'", off(tok))

    # Stack of variables for open nodes; parse is iterative so arbitrarily
    # deep inputs fail structurally instead of overflowing the interpreter.
    stack: list[str] = []
    top: str | None = None

    def open_node(paren: _Tok) -> None:
        nonlocal top
        var_tok = take()
        if var_tok.kind != "atom":
            raise GraphError("expected a variable after '('", off(var_tok))
        slash = take()
        if slash.kind != "/":
            raise GraphError(f"expected '/' after variable '{var_tok.text}'", off(slash))
        concept_tok = take()
        if concept_tok.kind not in ("atom", "string"):
            raise GraphError("expected a concept after '/'", off(concept_tok))
        var = var_tok.text
        if var in concepts:
            raise DuplicateVariable(f"variable '{var}' declared twice", off(var_tok))
        variables.append(var)
        concepts[var] = concept_tok.text
        declared_at[var] = var_tok.pos
        if top is None:
            top = var
        stack.append(var)

    open_node(tok)
    while stack:
        tok = take()
        if tok.kind == ")":
            stack.pop()
            continue
        if tok.kind != "role":
            raise UnbalancedParens(f"expected a role or ')' but found '{tok.text}'", off(tok))
        role = tok.text
        if len(role) < 2:
            raise GraphError("empty role name", off(tok))
        val = take()
        src = stack[-1]
        if val.kind == "(":
            open_node(val)
            relations.append((src, role, "var", stack[-1], val.pos))
        elif val.kind == "atom":
            relations.append((src, role, "bare", val.text, val.pos))
        elif val.kind == "string":
            relations.append((src, role, "const", val.text, val.pos))
        else:
            raise GraphError(f"expected a value after role '{role}'", off(val))

    if pos < len(toks):
        extra = toks[pos]
        raise UnbalancedParens(f"content after graph end: '{extra.text}'", off(extra))

    # Resolve bare tokens now that all declarations are known.
    edges: list[Edge] = []
    attributes: list[Attribute] = []
    for i, (src, role, kind, payload, cpos) in enumerate(relations):
        if kind == "bare":
            if payload in concepts:
                kind = "var"
            elif _VAR_SHAPE.match(payload):
                raise DanglingReference(
                    f"reference to undeclared variable '{payload}'",
                    _byte_offset(text, cpos),
                )
            else:
                kind = "const"
        if kind == "var":
            if role.endswith("-of") and len(role) > len(":-of"):
                edges.append(Edge(payload, role[:-3], src, True, i))
            else:
                edges.append(Edge(src, role, payload, False, i))
        else:
            attributes.append(Attribute(src, role, payload, i))

    assert top is not None
    graph = AmrGraph(tuple(variables), concepts, tuple(edges), tuple(attributes), top)
    graph.validate()
    return graph


# ---------------------------------------------------------------------------
# Traversal and serialization


def walk(graph: AmrGraph):
    """Depth-first spanning walk from the top, yielding linear events.

    Events: ``("enter", var, concept)`` when a node is expanded (each
    variable exactly once), ``("role", token, kind, payload)`` for each
    relation where kind is "expand" (payload expanded next), "ref"
    (re-entrant variable), or "const", and ``("exit", var)``. Relations
    are visited in declaration order; an edge reached from its target
    side gets the ``-of`` form of its role.
    """
    incident: dict[str, list[tuple[int, object]]] = {v: [] for v in graph.variables}
    for e in graph.edges:
        incident[e.source].append((e.index, e))
        if e.target != e.source:
            incident[e.target].append((e.index, e))
    for a in graph.attributes:
        incident[a.source].append((a.index, a))
    for lst in incident.values():
        lst.sort(key=lambda p: p[0])

    visited = {graph.top}
    used: set[int] = set()
    # Each stack frame is (var, iterator over its incident relations).
    stack = [(graph.top, iter(incident[graph.top]))]
    yield ("enter", graph.top, graph.concepts[graph.top])
    while stack:
        var, it = stack[-1]
        advanced = False
        for index, rel in it:
            if isinstance(rel, Attribute):
                yield ("role", rel.role, "const", rel.value)
                continue
            if index in used:
                continue
            used.add(index)
            if rel.source == var:
                token, child = rel.role, rel.target
            else:
                token, child = rel.role + "-of", rel.source
            if child in visited:
                yield ("role", token, "ref", child)
                continue
            visited.add(child)
            yield ("role", token, "expand", child)
            yield ("enter", child, graph.concepts[child])
            stack.append((child, iter(incident[child])))
            advanced = True
            break
        if not advanced:
            yield ("exit", var)
            stack.pop()


def serialize_penman(graph: AmrGraph) -> str:
    """Serialize to PENMAN text, one relation per line, 4-space indent.

    Re-parsing the output yields the same canonical triple set.
    """
    graph.validate()
    parts: list[str] = []
    depth = 0
    for event in walk(graph):
        if event[0] == "enter":
            _, var, concept = event
            parts.append(f"({var} / {concept}")
            depth += 1
        elif event[0] == "role":
            _, token, kind, payload = event
            parts.append("\n" + "    " * depth + token + " ")
            if kind != "expand":
                parts.append(payload)
        else:
            parts.append(")")
            depth -= 1
    return "".join(parts)


def triples(graph: AmrGraph) -> list[Triple]:
    """Canonical triples: instances, the top marker, edges, attributes.

    len(result) == len(variables) + 1 + len(edges) + len(attributes).
    """
    out = [Triple("instance", ":instance", v, graph.concepts[v]) for v in graph.variables]
    out.append(Triple("top", ":top", graph.top, ""))
    out.extend(Triple("relation", e.role, e.source, e.target) for e in graph.edges)
    out.extend(Triple("attribute", a.role, a.source, a.value) for a in graph.attributes)
    return out


# ---------------------------------------------------------------------------
# AMR files: blank-line separated graphs with "#"-prefixed metadata


_ID_LINE = re.compile(r"#\s*::id\s+(\S+)")


def read_amr_blocks(path) -> list[tuple[str | None, AmrGraph]]:
    """Read an AMR file: graphs separated by blank lines, with the id from
    a ``# ::id`` line or None. Variable names are scoped per block."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    out: list[tuple[str | None, AmrGraph]] = []
    for block in re.split(r"\n\s*\n", text):
        if not block.strip():
            continue
        if all(line.lstrip().startswith("#") or not line.strip() for line in block.splitlines()):
            continue
        m = _ID_LINE.search(block)
        out.append((m.group(1) if m else None, parse_penman(block)))
    return out


def read_amr_file(path) -> list[tuple[str, AmrGraph]]:
    """Like read_amr_blocks, falling back to the 0-based position as id."""
    return [
        (gid if gid is not None else str(i), g)
        for i, (gid, g) in enumerate(read_amr_blocks(path))
    ]


def write_amr_file(path, graphs: list[tuple[str, AmrGraph]]) -> None:
    """Write graphs with ``# ::id`` metadata, blank line separated."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, (gid, g) in enumerate(graphs):
            if i:
                fh.write("\n")
            fh.write(f"# ::id {gid}\n")
            fh.write(serialize_penman(g))
            fh.write("\n")
