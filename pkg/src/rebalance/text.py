"""Text normalization, tokenization and detokenization.

Tokens are maximal runs of non-whitespace after Unicode NFC normalization.
A custom ``splitter`` can be plugged into :class:`NormalizationConfig` to
swap in a word segmenter (e.g. a Vietnamese compound-word tokenizer).
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .exceptions import TextDecodeError


@dataclass(frozen=True)
class NormalizationConfig:
    lowercase: bool = False
    splitter: Optional[Callable[[str], Sequence[str]]] = field(default=None, compare=False)


DEFAULT_CONFIG = NormalizationConfig()
FEATURE_CONFIG = NormalizationConfig(lowercase=True)


@dataclass(frozen=True)
class TokenizedSentence:
    """An ordered token sequence plus the raw text it came from.

    Tokens produced by :func:`tokenize` never contain whitespace. Tokens
    substituted in by augmentation may be multi-word lexicon entries such
    as ``"nhụt chí"``; they stay a single token.
    """

    tokens: tuple[str, ...]
    raw: str = field(default="", compare=False)  # provenance only

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            if not tok:
                raise ValueError("tokens must be non-empty strings")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def text(self) -> str:
        return detokenize(self)

    def replace_tokens(self, tokens: Sequence[str]) -> "TokenizedSentence":
        """Return a sentence with new tokens and the same raw text."""
        return TokenizedSentence(tuple(tokens), self.raw)


def decode_utf8(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TextDecodeError(exc.start, exc.reason) from None


def normalize(text: str, config: NormalizationConfig = DEFAULT_CONFIG) -> str:
    text = unicodedata.normalize("NFC", text)
    if config.lowercase:
        text = text.casefold()
    return text


def tokenize(
    text: Union[str, bytes], config: NormalizationConfig = DEFAULT_CONFIG
) -> TokenizedSentence:
    """Split ``text`` into tokens.

    >>> tokenize("  a   b ").tokens
    ('a', 'b')
    """
    if isinstance(text, (bytes, bytearray)):
        text = decode_utf8(bytes(text))
    norm = normalize(text, config)
    if config.splitter is None:
        tokens = norm.split()
    else:
        tokens = [t for t in config.splitter(norm) if t and not t.isspace()]
    return TokenizedSentence(tuple(tokens), text)


def detokenize(sentence: Union[TokenizedSentence, Sequence[str]]) -> str:
    tokens = sentence.tokens if isinstance(sentence, TokenizedSentence) else sentence
    return " ".join(tokens)
