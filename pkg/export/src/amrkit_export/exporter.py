"""Produce embedding files from dataset fields with a pretrained sentence
encoder.

This adapter talks to the main toolkit only through files and its CLI:
datasets come in as newline-delimited JSON, AMR fields are linearized by
shelling out to ``amrkit linearize`` (so both components share one
linearization), and the output is the toolkit's embedding file format,
one ``{"id": ..., "vector": [...]}`` object per line. Records for ``_b``
fields are keyed ``<id>::b``, the pair-element convention.

Encoder backends:
  * a sentence-transformers model id (needs the model locally or a
    working download);
  * ``hash://<dim>``, a deterministic token-hashing encoder for offline
    runs and contract tests.
"""

from __future__ import annotations

import json
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FIELDS = ("text", "amr", "text_b", "amr_b")

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"


class ExportError(Exception):
    pass


class MissingField(ExportError):
    pass


class ModelLoadFailure(ExportError):
    pass


@dataclass
class ExportJob:
    dataset: str
    field: str = "text"
    model: str = DEFAULT_MODEL
    out: str = "embeddings.jsonl"
    batch_size: int = 32
    parser_cmd: str | None = None
    amrkit_bin: str = "amrkit"


def load_rows(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError(f"bad JSON at line {lineno}: {exc.msg}") from None
            if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
                raise ExportError(f"record at line {lineno} needs a string 'id'")
            rows.append(obj)
    if not rows:
        raise ExportError(f"no examples in {path}")
    return rows


# ---------------------------------------------------------------------------
# Encoder backends

_HASH_MODEL = re.compile(r"hash://(\d+)\Z")


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


class HashEncoder:
    """Deterministic stand-in encoder: signed token hashing, L2-normalized.
    No model weights, no network; meant for offline runs and tests."""

    def __init__(self, dim: int):
        self.dim = dim

    def encode(self, sentences: list[str], batch_size: int) -> np.ndarray:
        out = np.zeros((len(sentences), self.dim))
        for i, sentence in enumerate(sentences):
            for token in sentence.lower().split():
                h = _fnv1a64(token.encode("utf-8"))
                out[i, h % self.dim] += 1.0 if h >> 63 == 0 else -1.0
        return out


class SentenceTransformerEncoder:
    def __init__(self, model_id: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadFailure(f"sentence-transformers is not installed: {exc}") from None
        try:
            self.model = SentenceTransformer(model_id)
        except Exception as exc:
            raise ModelLoadFailure(f"could not load model '{model_id}': {exc}") from None
        self.dim = self.model.get_sentence_embedding_dimension()

    def encode(self, sentences: list[str], batch_size: int) -> np.ndarray:
        return np.asarray(
            self.model.encode(sentences, batch_size=batch_size, show_progress_bar=False)
        )


def make_encoder(model: str):
    m = _HASH_MODEL.match(model)
    if m:
        return HashEncoder(int(m.group(1)))
    return SentenceTransformerEncoder(model)


# ---------------------------------------------------------------------------
# AMR handling through the main toolkit's CLI


def linearize_amrs(amrs: list[str], amrkit_bin: str) -> list[str]:
    """Run ``amrkit linearize`` over the graphs, preserving order."""
    with tempfile.TemporaryDirectory(prefix="amrkit-export-") as tmp:
        amr_path = Path(tmp) / "graphs.amr"
        out_path = Path(tmp) / "linearized.tsv"
        with open(amr_path, "w", encoding="utf-8") as fh:
            for i, graph in enumerate(amrs):
                fh.write(f"# ::id r{i}\n{graph.strip()}\n\n")
        proc = subprocess.run(
            [amrkit_bin, "linearize", "--in", str(amr_path), "--out", str(out_path)],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            raise ExportError(
                f"'{amrkit_bin} linearize' failed ({proc.returncode}): {proc.stderr.strip()}"
            )
        by_id = {}
        with open(out_path, encoding="utf-8") as fh:
            for line in fh:
                gid, _, tokens = line.rstrip("\n").partition("\t")
                by_id[gid] = tokens
    try:
        return [by_id[f"r{i}"] for i in range(len(amrs))]
    except KeyError as exc:
        raise ExportError(f"linearizer output is missing graph {exc}") from None


def run_parser_hook(rows: list[dict], field: str, parser_cmd: str) -> None:
    """Fill missing AMR fields by invoking an external text-to-graph parser.

    The command gets one extra argument, the path of a JSONL file of
    ``{"id", "text"}`` records, and must print an AMR file whose graphs
    carry matching ``# ::id`` lines.
    """
    text_field = "text" if field == "amr" else "text_b"
    todo = [r for r in rows if r.get(field) is None and r.get(text_field) is not None]
    if not todo:
        return
    with tempfile.TemporaryDirectory(prefix="amrkit-export-") as tmp:
        req = Path(tmp) / "texts.jsonl"
        with open(req, "w", encoding="utf-8") as fh:
            for i, r in enumerate(todo):
                fh.write(json.dumps({"id": f"r{i}", "text": r[text_field]}) + "\n")
        proc = subprocess.run(
            shlex.split(parser_cmd) + [str(req)], capture_output=True, text=True
        )
        if proc.returncode != 0:
            raise ExportError(f"parser command failed ({proc.returncode}): {proc.stderr.strip()}")
    graphs: dict[str, list[str]] = {}
    current: str | None = None
    for line in proc.stdout.splitlines():
        m = re.match(r"#\s*::id\s+(\S+)", line)
        if m:
            current = m.group(1)
            graphs[current] = []
        elif line.startswith("#"):
            continue
        elif current is not None:
            graphs[current].append(line)
    for i, r in enumerate(todo):
        block = "\n".join(graphs.get(f"r{i}", [])).strip()
        if not block:
            raise ExportError(f"parser returned no graph for id '{r['id']}'")
        r[field] = block


# ---------------------------------------------------------------------------


def export_embeddings(job: ExportJob) -> int:
    """Write one embedding record per example; returns the record count.

    Vectors are L2-normalized. Output ids are the dataset ids, with a
    ``::b`` suffix when exporting a ``_b`` field.
    """
    if job.field not in FIELDS:
        raise ExportError(f"field must be one of {FIELDS}")
    rows = load_rows(job.dataset)
    if job.field in ("amr", "amr_b") and job.parser_cmd:
        run_parser_hook(rows, job.field, job.parser_cmd)
    missing = [r["id"] for r in rows if not isinstance(r.get(job.field), str)]
    if missing:
        raise MissingField(f"examples without '{job.field}': {', '.join(missing[:5])}")
    values = [r[job.field] for r in rows]
    if job.field in ("amr", "amr_b"):
        values = linearize_amrs(values, job.amrkit_bin)
    encoder = make_encoder(job.model)
    vectors = encoder.encode(values, batch_size=job.batch_size)
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    vectors = np.where(norms > 0, vectors / np.where(norms > 0, norms, 1.0), vectors)
    suffix = "::b" if job.field.endswith("_b") else ""
    with open(job.out, "w", encoding="utf-8") as fh:
        for r, vec in zip(rows, vectors):
            body = ", ".join(format(float(x), ".9g") for x in vec)
            fh.write(f'{{"id": {json.dumps(r["id"] + suffix)}, "vector": [{body}]}}\n')
    return len(rows)
