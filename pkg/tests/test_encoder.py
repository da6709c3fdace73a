import json
import math
import random

import numpy as np
import pytest

from amrkit.encoder import (
    EmbeddingSet,
    EncoderConfig,
    EncoderParams,
    encode,
    init_params,
    load_params,
    mnr_loss_and_grad,
    read_embeddings,
    save_params,
    train_contrastive,
    write_embeddings,
)
from amrkit.errors import (
    DimMismatch,
    DuplicateId,
    EmptyBatch,
    EmptyFile,
    MalformedRecord,
)
from amrkit.features import SparseVector, hash_features, tokenize_text


def identity_params(dim: int, scale: float = 20.0) -> EncoderParams:
    cfg = EncoderConfig(dim_in=dim, dim_out=dim, scale=scale)
    return EncoderParams(np.eye(dim), cfg)


class TestEncode:
    def test_identity_on_unit_input(self):
        params = identity_params(4)
        y = encode(SparseVector(4, {2: 1.0}), params)
        assert np.allclose(y, [0, 0, 1, 0])

    def test_zero_in_zero_out(self):
        params = identity_params(4)
        assert np.all(encode(SparseVector(4, {}), params) == 0)

    def test_output_normalized(self):
        params = init_params(EncoderConfig(dim_in=16, dim_out=8, seed=3))
        y = encode(SparseVector(16, {0: 0.5, 3: -2.0}), params)
        assert np.linalg.norm(y) == pytest.approx(1.0)

    def test_deterministic_given_seed(self):
        a = init_params(EncoderConfig(dim_in=8, dim_out=4, seed=11))
        b = init_params(EncoderConfig(dim_in=8, dim_out=4, seed=11))
        assert np.array_equal(a.weights, b.weights)
        x = SparseVector(8, {1: 1.0, 5: 0.25})
        assert np.array_equal(encode(x, a), encode(x, b))

    def test_scaling_input_leaves_output_unchanged(self):
        params = init_params(EncoderConfig(dim_in=8, dim_out=4, seed=1))
        x1 = SparseVector(8, {1: 1.0, 5: 0.25})
        x3 = SparseVector(8, {1: 3.0, 5: 0.75})
        assert np.allclose(encode(x1, params), encode(x3, params))

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            encode(SparseVector(5, {0: 1.0}), identity_params(4))


class TestMnrLoss:
    def test_equal_cosines_gives_ln2(self):
        params = identity_params(3)
        a, p, n = np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]), np.array([[0, 1.0, 0]])
        loss, _ = mnr_loss_and_grad(a, p, n, params)
        assert loss == pytest.approx(math.log(2), abs=1e-9)

    def test_perfectly_separated_pair(self):
        params = identity_params(2, scale=20.0)
        a, p, n = np.array([[1.0, 0]]), np.array([[1.0, 0]]), np.array([[-1.0, 0]])
        loss, _ = mnr_loss_and_grad(a, p, n, params)
        assert loss == pytest.approx(math.log1p(math.exp(-40)), abs=1e-9)

    def test_all_equal_cosines_gives_ln_2n(self):
        for n in (1, 2, 3, 5):
            params = identity_params(4, scale=7.5)
            batch = np.tile([[0.0, 2.0, 0, 0]], (n, 1))
            loss, _ = mnr_loss_and_grad(batch, batch, batch, params)
            assert loss == pytest.approx(math.log(2 * n), abs=1e-9)

    def test_permutation_covariant(self):
        rng = np.random.default_rng(8)
        params = EncoderParams(rng.normal(size=(6, 4)), EncoderConfig(dim_in=6, dim_out=4))
        a, p, n = (rng.normal(size=(5, 6)) for _ in range(3))
        base, _ = mnr_loss_and_grad(a, p, n, params)
        perm = rng.permutation(5)
        shuffled, _ = mnr_loss_and_grad(a[perm], p[perm], n[perm], params)
        assert shuffled == pytest.approx(base, rel=1e-12)

    def test_input_scaling_invariant(self):
        rng = np.random.default_rng(9)
        params = EncoderParams(rng.normal(size=(6, 4)), EncoderConfig(dim_in=6, dim_out=4))
        a, p, n = (rng.normal(size=(3, 6)) for _ in range(3))
        base, _ = mnr_loss_and_grad(a, p, n, params)
        scaled, _ = mnr_loss_and_grad(a * 5.0, p, n * 0.25, params)
        assert scaled == pytest.approx(base, rel=1e-12)

    def test_empty_batch(self):
        params = identity_params(3)
        empty = np.zeros((0, 3))
        with pytest.raises(EmptyBatch):
            mnr_loss_and_grad(empty, empty, empty, params)

    def test_batch_size_mismatch(self):
        params = identity_params(3)
        with pytest.raises(DimMismatch):
            mnr_loss_and_grad(np.ones((2, 3)), np.ones((1, 3)), np.ones((2, 3)), params)

    def test_input_dim_mismatch(self):
        params = identity_params(3)
        with pytest.raises(DimMismatch):
            mnr_loss_and_grad(np.ones((1, 4)), np.ones((1, 4)), np.ones((1, 4)), params)


def finite_difference_grad(a, p, n, params, h=1e-5):
    w = params.weights
    grad = np.zeros_like(w)
    for i in range(w.shape[0]):
        for j in range(w.shape[1]):
            wp = w.copy()
            wp[i, j] += h
            lp, _ = mnr_loss_and_grad(a, p, n, EncoderParams(wp, params.config))
            wm = w.copy()
            wm[i, j] -= h
            lm, _ = mnr_loss_and_grad(a, p, n, EncoderParams(wm, params.config))
            grad[i, j] = (lp - lm) / (2 * h)
    return grad


class TestGradient:
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        batch = int(rng.choice([1, 2, 4]))
        cfg = EncoderConfig(dim_in=7, dim_out=4, scale=float(rng.uniform(1, 20)))
        params = EncoderParams(rng.normal(size=(7, 4)), cfg)
        a, p, n = (rng.normal(size=(batch, 7)) for _ in range(3))
        _, analytic = mnr_loss_and_grad(a, p, n, params)
        fd = finite_difference_grad(a, p, n, params)
        scale = max(np.abs(fd).max(), 1e-12)
        assert np.abs(analytic - fd).max() / scale < 1e-4


def write_triplets(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r) + "\n")


def synthetic_triplets(count: int, rng: random.Random):
    rows = []
    for i in range(count):
        shared = f"topic{i}"
        rows.append(
            {
                "anchor": f"{shared} story about {shared} events",
                "positive": f"more {shared} news on {shared}",
                "negative": f"unrelated {rng.randint(1000, 9999)} filler text",
            }
        )
    return rows


class TestTraining:
    def test_loss_decreases_and_ranks_pairs(self, tmp_path):
        rng = random.Random(0)
        path = tmp_path / "triplets.jsonl"
        rows = synthetic_triplets(80, rng)
        write_triplets(path, rows)
        cfg = EncoderConfig(dim_in=1024, dim_out=32, epochs=4, batch_size=16, seed=5)
        result = train_contrastive(path, cfg)
        assert result.epoch_losses[-1] < result.epoch_losses[0]
        ok = 0
        for r in rows:
            va = encode(hash_features(tokenize_text(r["anchor"]), 1024), result.params)
            vp = encode(hash_features(tokenize_text(r["positive"]), 1024), result.params)
            vn = encode(hash_features(tokenize_text(r["negative"]), 1024), result.params)
            if float(va @ vp) > float(va @ vn):
                ok += 1
        assert ok / len(rows) >= 0.9

    def test_zero_epochs_returns_seeded_init(self, tmp_path):
        path = tmp_path / "one.jsonl"
        write_triplets(path, [{"anchor": "a b", "positive": "a c", "negative": "z"}])
        cfg = EncoderConfig(dim_in=64, dim_out=8, epochs=0, seed=21)
        result = train_contrastive(path, cfg)
        assert np.array_equal(result.params.weights, init_params(cfg).weights)
        assert result.epoch_losses == []

    def test_empty_file(self, tmp_path):
        path = tmp_path / "none.jsonl"
        path.write_text("")
        with pytest.raises(EmptyFile):
            train_contrastive(path, EncoderConfig(dim_in=16, dim_out=4))

    def test_malformed_triplet(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"anchor": "a", "positive": "b"}\n')
        with pytest.raises(MalformedRecord):
            train_contrastive(path, EncoderConfig(dim_in=16, dim_out=4))

    def test_amr_mode(self, tmp_path):
        path = tmp_path / "amr.jsonl"
        write_triplets(
            path,
            [
                {
                    "anchor": "(a / advise-01 :ARG1 (e / exercise-01))",
                    "positive": "(a / advise-01 :ARG1 (r / rest-01))",
                    "negative": "(h / happen-01)",
                }
            ],
        )
        cfg = EncoderConfig(dim_in=128, dim_out=8, epochs=1, seed=2)
        result = train_contrastive(path, cfg, mode="amr")
        assert len(result.epoch_losses) == 1


class TestEmbeddingFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "e.jsonl"
        recs = {
            "x": np.array([0.25, -1.5, 3.0]),
            "y": np.array([1e-7, 2.123456789, -0.333333333]),
            "z": np.array([0.0, 0.0, 1.0]),
        }
        write_embeddings(EmbeddingSet(3, recs), path)
        back = read_embeddings(path)
        assert back.dim == 3
        assert list(back.records) == ["x", "y", "z"]
        for k in recs:
            assert np.allclose(back.records[k], recs[k], atol=1e-9)

    def test_dim_mismatch_line_number(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text('{"id": "a", "vector": [1, 2, 3, 4]}\n{"id": "b", "vector": [1, 2, 3, 4, 5]}\n')
        with pytest.raises(DimMismatch, match="line 2"):
            read_embeddings(path)

    def test_empty_file_valid(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text("")
        empty = read_embeddings(path)
        assert empty.dim is None and empty.records == {}

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text('{"id": "a", "vector": [1]}\n{"id": "a", "vector": [2]}\n')
        with pytest.raises(DuplicateId):
            read_embeddings(path)

    def test_malformed_record(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text('{"id": "a", "vector": [1]}\nnot json\n')
        with pytest.raises(MalformedRecord, match="line 2"):
            read_embeddings(path)

    def test_vector_must_be_numeric(self, tmp_path):
        path = tmp_path / "e.jsonl"
        path.write_text('{"id": "a", "vector": ["x"]}\n')
        with pytest.raises(MalformedRecord):
            read_embeddings(path)


def test_config_validation():
    with pytest.raises(ValueError):
        EncoderConfig(scale=0.0)
    with pytest.raises(ValueError):
        EncoderConfig(dim_in=0)
    with pytest.raises(ValueError):
        EncoderConfig(batch_size=0)


def test_params_round_trip(tmp_path):
    params = init_params(EncoderConfig(dim_in=32, dim_out=8, seed=4, scale=12.5))
    path = tmp_path / "params.npz"
    save_params(params, path)
    back = load_params(path)
    assert np.array_equal(back.weights, params.weights)
    assert back.config == params.config
