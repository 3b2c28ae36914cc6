"""The four EDA operations and the per-sentence augmentation driver.

Every operation takes an explicit ``numpy.random.Generator`` so results are
reproducible and independent of execution order. Use :func:`derive_rng` to
get the generator for a given (base seed, record, variant) triple.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import NamedTuple, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_alpha, check_seed
from .exceptions import ValidationError
from .lexicon import EMPTY_LEXICON, EMPTY_STOPWORDS, StopwordSet, SynonymLexicon
from .text import TokenizedSentence, detokenize, tokenize

SR, RI, RS, RD = "SR", "RI", "RS", "RD"
ALL_OPS = (SR, RI, RS, RD)


@dataclass(frozen=True)
class EdaParams:
    alpha: float = 0.1
    ops_enabled: tuple[str, ...] = ALL_OPS
    n_aug: int = 4

    def __post_init__(self):
        check_alpha(self.alpha)
        ops = tuple(self.ops_enabled)
        if not ops:
            raise ValidationError("ops_enabled must name at least one operation")
        unknown = [op for op in ops if op not in ALL_OPS]
        if unknown:
            raise ValidationError(f"unknown EDA operations {unknown}; expected a subset of {ALL_OPS}")
        if len(set(ops)) != len(ops):
            raise ValidationError(f"duplicate operations in {ops}")
        if isinstance(self.n_aug, bool) or not isinstance(self.n_aug, (int, np.integer)) or self.n_aug < 1:
            raise ValidationError(f"n_aug must be a positive integer, got {self.n_aug!r}")
        object.__setattr__(self, "ops_enabled", ops)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "n_aug", int(self.n_aug))

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "ops_enabled": list(self.ops_enabled), "n_aug": self.n_aug}

    @classmethod
    def from_dict(cls, d: dict) -> "EdaParams":
        return cls(alpha=d.get("alpha", 0.1), ops_enabled=tuple(d.get("ops_enabled", ALL_OPS)),
                   n_aug=d.get("n_aug", 4))


class OpResult(NamedTuple):
    sentence: TokenizedSentence
    n_applied: int

    @property
    def degenerate(self) -> bool:
        return self.n_applied == 0


class Variant(NamedTuple):
    sentence: TokenizedSentence
    op: str
    index: int
    degenerate: bool


def derive_rng(base_seed: int, record_index: int, variant_index: int) -> np.random.Generator:
    """Independent generator for one (record, variant) pair."""
    for name, value in (("base_seed", base_seed), ("record_index", record_index),
                        ("variant_index", variant_index)):
        check_seed(value, name)
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), int(record_index),
                                                         int(variant_index)]))


def num_edits(alpha: float, length: int) -> int:
    """Edit budget for SR/RI/RS: ``max(1, round_half_up(alpha * length))``."""
    check_alpha(alpha)
    if length < 0:
        raise ValidationError(f"length must be non-negative, got {length}")
    # Decimal avoids binary artefacts such as 0.15 * 10 == 1.4999...
    scaled = (Decimal(repr(float(alpha))) * int(length)).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    return max(1, int(scaled))


def _eligible(token: str, lex: SynonymLexicon, stop: StopwordSet) -> bool:
    return token not in stop and lex.has_synonyms(token)


def synonym_replacement(s: TokenizedSentence, n: int, lex: SynonymLexicon,
                        stop: StopwordSet, rng: np.random.Generator) -> OpResult:
    tokens = list(s.tokens)
    candidates = [i for i, tok in enumerate(tokens) if _eligible(tok, lex, stop)]
    k = min(n, len(candidates))
    if k == 0:
        return OpResult(s, 0)
    picks = rng.choice(len(candidates), size=k, replace=False)
    for j in picks:
        pos = candidates[j]
        options = lex.synonyms_of(tokens[pos])
        tokens[pos] = options[rng.integers(len(options))]
    return OpResult(s.replace_tokens(tokens), k)


def random_insertion(s: TokenizedSentence, n: int, lex: SynonymLexicon,
                     stop: StopwordSet, rng: np.random.Generator) -> OpResult:
    tokens = list(s.tokens)
    inserted = 0
    for _ in range(n):
        sources = [tok for tok in tokens if _eligible(tok, lex, stop)]
        if not sources:
            continue
        source = sources[rng.integers(len(sources))]
        options = lex.synonyms_of(source)
        synonym = options[rng.integers(len(options))]
        tokens.insert(int(rng.integers(len(tokens) + 1)), synonym)
        inserted += 1
    if not inserted:
        return OpResult(s, 0)
    return OpResult(s.replace_tokens(tokens), inserted)


def random_swap(s: TokenizedSentence, n: int, rng: np.random.Generator) -> OpResult:
    if len(s) < 2:
        return OpResult(s, 0)
    tokens = list(s.tokens)
    for _ in range(n):
        i, j = rng.choice(len(tokens), size=2, replace=False)
        tokens[i], tokens[j] = tokens[j], tokens[i]
    return OpResult(s.replace_tokens(tokens), n)


def random_deletion(s: TokenizedSentence, p: float, rng: np.random.Generator) -> OpResult:
    """Drop each token independently with probability ``p``; always keep one."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"deletion probability must lie in [0, 1], got {p}")
    if not len(s):
        return OpResult(s, 0)
    drop = rng.random(len(s)) < p
    if drop.all():
        keep = int(rng.integers(len(s)))
        return OpResult(s.replace_tokens([s.tokens[keep]]), len(s) - 1)
    survivors = [tok for tok, d in zip(s.tokens, drop) if not d]
    n_dropped = int(drop.sum())
    if not n_dropped:
        return OpResult(s, 0)
    return OpResult(s.replace_tokens(survivors), n_dropped)


def apply_op(op: str, s: TokenizedSentence, alpha: float, lex: SynonymLexicon,
             stop: StopwordSet, rng: np.random.Generator) -> OpResult:
    if op == RD:
        return random_deletion(s, alpha, rng)
    n = num_edits(alpha, len(s))
    if op == SR:
        return synonym_replacement(s, n, lex, stop, rng)
    if op == RI:
        return random_insertion(s, n, lex, stop, rng)
    if op == RS:
        return random_swap(s, n, rng)
    raise ValidationError(f"unknown EDA operation {op!r}")


def augment_sentence(s: TokenizedSentence, params: EdaParams,
                     lex: SynonymLexicon = EMPTY_LEXICON, stop: StopwordSet = EMPTY_STOPWORDS,
                     base_seed: int = 0, record_index: int = 0,
                     n_variants: int | None = None, start: int = 0) -> list[Variant]:
    """Generate variants ``start .. start + n_variants - 1`` of ``s``.

    Variant ``i`` applies ``params.ops_enabled[i % len(ops_enabled)]`` with the
    generator ``derive_rng(base_seed, record_index, i)``. ``n_variants``
    defaults to ``params.n_aug``.
    """
    count = params.n_aug if n_variants is None else n_variants
    ops = params.ops_enabled
    out = []
    for i in range(start, start + count):
        op = ops[i % len(ops)]
        res = apply_op(op, s, params.alpha, lex, stop, derive_rng(base_seed, record_index, i))
        out.append(Variant(res.sentence, op, i, res.degenerate))
    return out


class EdaAugmenter(BaseEstimator):
    """Estimator-style wrapper over :func:`augment_sentence`.

    Stateless, so ``fit`` only validates parameters. ``augment`` returns the
    augmented strings of one sentence; ``augment_many`` maps over a sequence
    using each item's position as its record index.
    """

    def __init__(self, alpha=0.1, ops=ALL_OPS, n_aug=4, synonyms=None, stopwords=None,
                 random_state=0):
        self.alpha = alpha
        self.ops = ops
        self.n_aug = n_aug
        self.synonyms = synonyms
        self.stopwords = stopwords
        self.random_state = random_state

    def _params(self) -> EdaParams:
        return EdaParams(self.alpha, tuple(self.ops), self.n_aug)

    def fit(self, X=None, y=None):
        self._params()
        check_seed(self.random_state, "random_state")
        return self

    def augment(self, text: Union[str, TokenizedSentence], record_index: int = 0) -> list[str]:
        sentence = text if isinstance(text, TokenizedSentence) else tokenize(text)
        variants = augment_sentence(
            sentence, self._params(), self.synonyms or EMPTY_LEXICON,
            self.stopwords or EMPTY_STOPWORDS, self.random_state, record_index,
        )
        return [detokenize(v.sentence) for v in variants]

    def augment_many(self, texts: Sequence[Union[str, TokenizedSentence]]) -> list[list[str]]:
        return [self.augment(t, i) for i, t in enumerate(texts)]
