"""Turn datasets into embedding files: hashed features, optionally pushed
through a trained encoder.

Pair handling: in "joint" mode the two texts of a pair are joined with a
separator token and the two AMRs are linearized back to back, giving one
vector per example and modality. In "elements" mode each element is
embedded on its own and the second element is keyed ``<id>::b``, the
convention consumed by per-element fusion and by similarity scoring.
"""

from __future__ import annotations

from .dataset import Example, LabeledDataset
from .encoder import EmbeddingSet, EncoderParams, encode
from .errors import MissingField
from .features import DEFAULT_DIM, hash_features, tokenize_text
from .graph import parse_penman
from .linearize import TokenSequence, linearize

TEXT_PAIR_SEPARATOR = "[SEP]"

MODALITIES = ("text", "amr")
PAIR_MODES = ("joint", "elements")


def _amr_tokens(penman: str) -> tuple[str, ...]:
    return linearize(parse_penman(penman)).tokens


def element_tokens(ex: Example, modality: str, element: str = "a") -> TokenSequence | None:
    """Tokens for one pair element, or None when the _b field is absent."""
    if modality == "text":
        value = ex.text if element == "a" else ex.text_b
        return tokenize_text(value) if value is not None else None
    if modality == "amr":
        value = ex.amr if element == "a" else ex.amr_b
        if value is None:
            if element == "a":
                raise MissingField(f"example '{ex.id}' has no amr field")
            return None
        return TokenSequence(_amr_tokens(value))
    raise ValueError(f"unknown modality '{modality}'")


def joint_tokens(ex: Example, modality: str) -> TokenSequence:
    """Both pair elements as one sequence (separator token between texts,
    AMR linearizations back to back)."""
    if modality == "text":
        text = ex.text
        if ex.text_b is not None:
            text = f"{text} {TEXT_PAIR_SEPARATOR} {ex.text_b}"
        return tokenize_text(text)
    if modality == "amr":
        if ex.amr is None:
            raise MissingField(f"example '{ex.id}' has no amr field")
        tokens = _amr_tokens(ex.amr)
        if ex.amr_b is not None:
            tokens = tokens + _amr_tokens(ex.amr_b)
        return TokenSequence(tokens)
    raise ValueError(f"unknown modality '{modality}'")


def featurize_dataset(
    dataset: LabeledDataset,
    modality: str,
    pair_mode: str = "joint",
    dim: int = DEFAULT_DIM,
    ngram_max: int = 1,
    params: EncoderParams | None = None,
) -> EmbeddingSet:
    """One embedding per example (plus ``::b`` records in elements mode).

    With ``params`` the hashed features are projected through the encoder
    (its input dimension wins); otherwise the hashed vectors are emitted
    densely as-is.
    """
    if pair_mode not in PAIR_MODES:
        raise ValueError(f"pair_mode must be one of {PAIR_MODES}")
    if params is not None:
        dim = params.config.dim_in
    records = {}
    for ex in dataset.examples:
        keyed: list[tuple[str, TokenSequence]] = []
        if pair_mode == "joint":
            keyed.append((ex.id, joint_tokens(ex, modality)))
        else:
            keyed.append((ex.id, element_tokens(ex, modality, "a")))
            second = element_tokens(ex, modality, "b")
            if second is not None:
                keyed.append((f"{ex.id}::b", second))
        for key, tokens in keyed:
            hashed = hash_features(tokens, dim=dim, ngram_max=ngram_max)
            records[key] = encode(hashed, params) if params is not None else hashed.to_dense()
    out_dim = params.config.dim_out if params is not None else dim
    return EmbeddingSet(out_dim, records)
