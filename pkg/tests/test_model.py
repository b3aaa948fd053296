import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dataclasses import replace

import numpy as np
import pytest
from pydantic import ValidationError

from engines.orthography import OrthographySpec, Scheme
from microformer.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from library.taskgen import SamplingConfig, iter_examples
from microformer.config import ModelConfig, PositionMode, TargetPositionMode, TrainConfig
from microformer.data import collate, encode_pair
from microformer.decode import greedy_decode, predict
from microformer.errors import ModelConfigError, ModelError, VocabularyError
from microformer.model import Seq2SeqTransformer, cross_entropy
from microformer.optim import Adam, global_norm
from microformer.vocab import BOS, EOS, PAD, Vocabulary, build_vocabulary

TEN_E = OrthographySpec(scheme=Scheme.TEN_E_BASED)
QUESTION = "What is 4 10e1 2 10e0 plus 7 10e0 ?"
TOKENS = "What is plus ? - 0 1 2 3 4 5 6 7 8 9 10e0 10e1 10e2 10e3"


def tiny_model(dtype=np.float64):
    vocab = build_vocabulary([TOKENS])
    config = ModelConfig(
        layers_encoder=1,
        layers_decoder=1,
        model_width=16,
        heads=2,
        feedforward_width=32,
        vocabulary=vocab.tokens,
        position_mode=PositionMode.POS_MASKED,
        target_position_mode=TargetPositionMode.WITH_TGT,
        max_sequence_length=64,
    )
    examples = iter_examples(SamplingConfig(max_digits=3, count=4, seed=3), TEN_E)
    pairs = [encode_pair(e.question, e.answer, TEN_E, vocab, config, dtype) for e in examples]
    return Seq2SeqTransformer(config, dtype, seed=1), collate(pairs, vocab, config.model_width, dtype)


def pad_column(array: np.ndarray, value) -> np.ndarray:
    extra = np.full(array.shape[:1] + (1,) + array.shape[2:], value, dtype=array.dtype)
    return np.concatenate([array, extra], axis=1)


def test_logits_shape():
    model, batch = tiny_model()
    logits = model.forward(batch)
    assert logits.shape == (batch.size, batch.decoder_ids.shape[1], len(model.vocab))
    assert logits.dtype == np.float64


def test_extra_padding_leaves_logits_unchanged():
    model, batch = tiny_model()
    logits = model.forward(batch)
    padded = replace(
        batch,
        source_ids=pad_column(batch.source_ids, model.vocab.pad_id),
        source_pos=pad_column(batch.source_pos, 0),
        decoder_ids=pad_column(batch.decoder_ids, model.vocab.pad_id),
        decoder_pos=pad_column(batch.decoder_pos, 0),
        targets=pad_column(batch.targets, model.vocab.pad_id),
    )
    padded_logits = model.forward(padded)
    assert np.allclose(padded_logits[:, : logits.shape[1]], logits)


def test_scaling_the_head_scales_logits():
    model, batch = tiny_model()
    logits = model.forward(batch)
    model.params["head.W"] *= 2
    model.params["head.b"] *= 2
    assert np.allclose(model.forward(batch), 2 * logits)


def test_cross_entropy_ignores_padding():
    logits = np.zeros((1, 3, 4))
    loss, grad = cross_entropy(logits, np.array([[3, 0, 0]]), pad_id=0)
    assert loss == pytest.approx(np.log(4))
    assert not grad[0, 1:].any()
    assert grad[0, 0, 3] == pytest.approx(0.25 - 1)


def test_loss_and_grad():
    model, batch = tiny_model()
    loss = model.loss_and_grad(batch)
    assert np.isfinite(loss)
    assert loss == pytest.approx(model.loss(batch))
    assert all(np.isfinite(g).all() for g in model.grads.values())
    assert np.any(model.grads["head.W"])
    assert np.any(model.grads["encoder.0.ffn.up.W"])
    assert global_norm(model.grads) > 0


def test_empty_vocabulary_rejected():
    with pytest.raises(ModelConfigError):
        Seq2SeqTransformer(ModelConfig(model_width=8, heads=2))


def test_heads_must_divide_width():
    with pytest.raises(ValidationError):
        ModelConfig(model_width=10, heads=4)


def test_vocabulary_reserved_ids():
    vocab = build_vocabulary(["8 10e0", "What is ?"])
    assert vocab.tokens[:3] == [PAD, BOS, EOS]
    assert (vocab.pad_id, vocab.bos_id, vocab.eos_id) == (0, 1, 2)
    assert vocab.words(vocab.ids(["8", "10e0"])) == ["8", "10e0"]


def test_unknown_token_raises():
    vocab = build_vocabulary(["8 10e0"])
    with pytest.raises(VocabularyError):
        vocab.ids(["9"])


def test_vocabulary_limit():
    with pytest.raises(VocabularyError):
        build_vocabulary([str(i) for i in range(300)], max_size=256)


def test_vocabulary_must_start_with_reserved_symbols():
    with pytest.raises(VocabularyError):
        Vocabulary(["a", PAD, BOS, EOS])


def test_greedy_decode_is_deterministic():
    model, _ = tiny_model()
    first = greedy_decode(model, QUESTION.split(), TEN_E, max_len=6)
    second = greedy_decode(model, QUESTION.split(), TEN_E, max_len=6)
    assert first == second
    assert len(first.tokens) <= 6


def test_greedy_decode_stops_at_eos():
    model, _ = tiny_model()
    model.params["head.b"][model.vocab.eos_id] = 1e6
    result = greedy_decode(model, QUESTION.split(), TEN_E)
    assert result.tokens.tokens == ()
    assert not result.truncated


def test_greedy_decode_truncates_at_max_len():
    model, _ = tiny_model()
    digit = model.vocab.ids(["7"])[0]
    model.params["head.b"][digit] = 1e6
    result = greedy_decode(model, QUESTION.split(), TEN_E, max_len=5)
    assert result.tokens.tokens == ("7",) * 5
    assert result.truncated


def test_greedy_decode_never_emits_reserved_tokens():
    model, _ = tiny_model()
    model.params["head.b"][model.vocab.pad_id] = 1e6
    model.params["head.b"][model.vocab.bos_id] = 1e6
    result = greedy_decode(model, QUESTION.split(), TEN_E, max_len=4)
    assert PAD not in result.tokens.tokens
    assert BOS not in result.tokens.tokens


def test_batched_predictions_match_single_decodes():
    model, _ = tiny_model()
    questions = [QUESTION, "What is 7 10e0 plus 4 10e1 2 10e0 ?", "What is 2 10e0 plus 2 10e0 ?"]
    batched = predict(model, questions, TEN_E, batch_size=2, max_len=5)
    single = [greedy_decode(model, q.split(), TEN_E, max_len=5) for q in questions]
    assert [r.tokens for r in batched] == [r.tokens for r in single]


def test_adam_with_zero_learning_rate_keeps_params():
    model, batch = tiny_model()
    before = {k: v.copy() for k, v in model.params.items()}
    model.loss_and_grad(batch)
    Adam(model.params, lr=0.0).step(model.grads)
    assert all(np.array_equal(before[k], model.params[k]) for k in before)


def test_adam_step_reduces_loss():
    model, batch = tiny_model()
    optimizer = Adam(model.params, lr=1e-3, clip_norm=1.0)
    start = model.loss_and_grad(batch)
    for _ in range(5):
        optimizer.step(model.grads)
        model.loss_and_grad(batch)
    assert model.loss(batch) < start


def test_adam_state_round_trip():
    model, batch = tiny_model()
    optimizer = Adam(model.params, lr=1e-3)
    model.loss_and_grad(batch)
    optimizer.step(model.grads)
    clone = Adam({k: v.copy() for k, v in model.params.items()}, lr=1e-3)
    clone.load_state_dict(optimizer.state_dict())
    assert clone.t == 1
    assert all(np.array_equal(clone.m[k], optimizer.m[k]) for k in optimizer.m)


def test_checkpoint_round_trip(tmp_path):
    model, batch = tiny_model()
    optimizer = Adam(model.params, lr=1e-3)
    model.loss_and_grad(batch)
    optimizer.step(model.grads)
    train_cfg = TrainConfig(seed=1, precision="f64")
    checkpoint = Checkpoint.capture(model, train_cfg, optimizer, orthography=TEN_E, epoch=3, dev_accuracy=0.5)
    path = save_checkpoint(checkpoint, tmp_path / "run" / "model.ckpt")
    assert path.name == "model.ckpt"

    loaded = load_checkpoint(path)
    assert loaded.epoch == 3
    assert loaded.dev_accuracy == 0.5
    assert loaded.orthography == TEN_E
    assert loaded.adam_step == 1
    assert loaded.model_config == model.config
    restored = loaded.build_model()
    assert np.array_equal(restored.forward(batch), model.forward(batch))


def test_load_rejects_foreign_archive(tmp_path):
    path = tmp_path / "other.npz"
    np.savez(path, weights=np.zeros(3))
    with pytest.raises(ModelError):
        load_checkpoint(path)
