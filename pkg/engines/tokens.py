from dataclasses import dataclass


@dataclass(frozen=True)
class TokenSequence:
    """Ordered tokens; the wire form joins them with single spaces."""
    tokens: tuple[str, ...]

    def __post_init__(self):
        for token in self.tokens:
            if not token or any(ch.isspace() for ch in token):
                raise ValueError(f"invalid token {token!r}")

    @classmethod
    def of(cls, *tokens: str) -> "TokenSequence":
        return cls(tuple(tokens))

    @classmethod
    def from_wire(cls, text: str) -> "TokenSequence":
        """Split on any run of whitespace; leading and trailing whitespace is ignored."""
        return cls(tuple(text.split()))

    @property
    def wire(self) -> str:
        return " ".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __str__(self) -> str:
        return self.wire
