from typing import Iterable, Sequence

from microformer.errors import VocabularyError

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
RESERVED = (PAD, BOS, EOS)


class Vocabulary:
    """Token <-> id map; ids 0, 1, 2 are PAD, BOS and EOS."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[: len(RESERVED)]) != RESERVED:
            raise VocabularyError(f"vocabulary must start with {RESERVED}")
        if len(set(tokens)) != len(tokens):
            raise VocabularyError("vocabulary contains duplicate tokens")
        self.tokens = list(tokens)
        self._ids = {tok: i for i, tok in enumerate(self.tokens)}

    pad_id = 0
    bos_id = 1
    eos_id = 2

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def ids(self, tokens: Iterable[str]) -> list[int]:
        out = []
        for tok in tokens:
            if tok not in self._ids:
                raise VocabularyError(f"token {tok!r} is not in the vocabulary")
            out.append(self._ids[tok])
        return out

    def words(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]


def build_vocabulary(sequences: Iterable[str], max_size: int | None = None) -> Vocabulary:
    """Reserved symbols followed by every whitespace token of `sequences`, sorted."""
    seen = set()
    for text in sequences:
        seen.update(text.split())
    seen.difference_update(RESERVED)
    tokens = list(RESERVED) + sorted(seen)
    if max_size is not None and len(tokens) > max_size:
        raise VocabularyError(
            f"vocabulary of {len(tokens)} tokens exceeds the limit of {max_size}; "
            "use a per-digit orthography"
        )
    return Vocabulary(tokens)
