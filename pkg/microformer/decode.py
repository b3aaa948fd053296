from dataclasses import dataclass
from typing import Sequence

import numpy as np

from engines.orthography import OrthographySpec
from engines.tokens import TokenSequence
from microformer.model import Seq2SeqTransformer
from microformer.positions import inference_target_positions, source_positions


@dataclass(frozen=True)
class DecodeResult:
    tokens: TokenSequence
    # True when max_len was reached before EOS
    truncated: bool


def _source_batch(model: Seq2SeqTransformer, sources: Sequence[Sequence[str]], spec: OrthographySpec):
    d = model.config.model_width
    s = max(len(src) for src in sources)
    ids = np.full((len(sources), s), model.vocab.pad_id, dtype=np.int64)
    pos = np.zeros((len(sources), s, d), dtype=model.dtype)
    for row, src in enumerate(sources):
        ids[row, : len(src)] = model.vocab.ids(src)
        pos[row, : len(src)] = source_positions(src, spec, model.config, model.dtype)
    return ids, pos


def greedy_decode_batch(
    model: Seq2SeqTransformer,
    sources: Sequence[Sequence[str]],
    spec: OrthographySpec,
    max_len: int | None = None,
) -> list[DecodeResult]:
    """Argmax decoding from BOS until EOS or max_len tokens, for a batch of questions.

    PAD and BOS are never emitted. The decoder sees no digit-position rows.
    """
    if not sources:
        return []
    if max_len is None:
        max_len = model.config.max_sequence_length - 1
    vocab = model.vocab
    ids, pos = _source_batch(model, sources, spec)
    memory = model.encode(ids, pos)
    b = len(sources)
    prefix = np.full((b, 1), vocab.bos_id, dtype=np.int64)
    done = np.zeros(b, dtype=bool)
    outputs: list[list[int]] = [[] for _ in range(b)]
    for _ in range(max_len):
        decoder_pos = np.broadcast_to(
            inference_target_positions(prefix.shape[1], model.config, model.dtype),
            (b, prefix.shape[1], model.config.model_width),
        )
        logits = model.decode(prefix, decoder_pos, memory)[:, -1, :].copy()
        logits[:, [vocab.pad_id, vocab.bos_id]] = -np.inf
        step = logits.argmax(axis=-1)
        for row in range(b):
            if done[row]:
                continue
            if step[row] == vocab.eos_id:
                done[row] = True
            else:
                outputs[row].append(int(step[row]))
        if done.all():
            break
        # Finished rows keep feeding EOS; their later outputs are ignored
        step = np.where(done, vocab.eos_id, step)
        prefix = np.concatenate([prefix, step[:, None]], axis=1)
    return [DecodeResult(TokenSequence(tuple(vocab.words(out))), truncated=not done[row]) for row, out in enumerate(outputs)]


def greedy_decode(
    model: Seq2SeqTransformer,
    source: Sequence[str] | TokenSequence,
    spec: OrthographySpec,
    max_len: int | None = None,
) -> DecodeResult:
    tokens = source.tokens if isinstance(source, TokenSequence) else tuple(source)
    return greedy_decode_batch(model, [tokens], spec, max_len)[0]


def predict(
    model: Seq2SeqTransformer,
    questions: Sequence[str],
    spec: OrthographySpec,
    batch_size: int = 32,
    max_len: int | None = None,
) -> list[DecodeResult]:
    """Greedy answers for wire-format questions, decoded in chunks of batch_size."""
    results: list[DecodeResult] = []
    for start in range(0, len(questions), batch_size):
        chunk = [q.split() for q in questions[start:start + batch_size]]
        results.extend(greedy_decode_batch(model, chunk, spec, max_len))
    return results
