"""Labeled datasets: id-keyed examples with text, optional AMR(s), and a
label, score, or train/test split, stored as newline-delimited JSON."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .errors import AmrkitError, DuplicateId, MalformedRecord

_SPLITS = ("train", "test")


@dataclass(frozen=True)
class Example:
    id: str
    text: str
    amr: str | None = None
    text_b: str | None = None
    amr_b: str | None = None
    label: str | None = None
    score: float | None = None
    split: str | None = None


@dataclass
class LabeledDataset:
    examples: list[Example]

    def __len__(self) -> int:
        return len(self.examples)

    def ids(self) -> list[str]:
        return [ex.id for ex in self.examples]

    def require_labels(self) -> list[str]:
        missing = [ex.id for ex in self.examples if ex.label is None]
        if missing:
            raise AmrkitError(f"examples without label: {', '.join(missing[:5])}")
        return [ex.label for ex in self.examples]

    def require_split(self) -> None:
        from .errors import NoSplit

        missing = [ex.id for ex in self.examples if ex.split is None]
        if missing:
            raise NoSplit(f"examples without split: {', '.join(missing[:5])}")


def load_dataset(path) -> LabeledDataset:
    examples: list[Example] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"bad JSON: {exc.msg}", lineno) from None
            if not isinstance(obj, dict):
                raise MalformedRecord("record must be an object", lineno)
            if not isinstance(obj.get("id"), str) or not isinstance(obj.get("text"), str):
                raise MalformedRecord("record needs string 'id' and 'text'", lineno)
            for key in ("amr", "text_b", "amr_b", "label"):
                if key in obj and obj[key] is not None and not isinstance(obj[key], str):
                    raise MalformedRecord(f"'{key}' must be a string", lineno)
            if "score" in obj and obj["score"] is not None and not isinstance(obj["score"], (int, float)):
                raise MalformedRecord("'score' must be a number", lineno)
            if obj.get("split") is not None and obj["split"] not in _SPLITS:
                raise MalformedRecord(f"'split' must be one of {_SPLITS}", lineno)
            if obj["id"] in seen:
                raise DuplicateId(f"duplicate id '{obj['id']}' at line {lineno}")
            seen.add(obj["id"])
            examples.append(
                Example(
                    id=obj["id"],
                    text=obj["text"],
                    amr=obj.get("amr"),
                    text_b=obj.get("text_b"),
                    amr_b=obj.get("amr_b"),
                    label=obj.get("label"),
                    score=float(obj["score"]) if obj.get("score") is not None else None,
                    split=obj.get("split"),
                )
            )
    return LabeledDataset(examples)


def save_dataset(dataset: LabeledDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in dataset.examples:
            row = {k: v for k, v in asdict(ex).items() if v is not None}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
