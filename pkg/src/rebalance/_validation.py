"""Input validation helpers shared by the estimators and functional API."""
from __future__ import annotations

import math
from numbers import Integral, Real
from typing import Iterable, Sequence

from .exceptions import ValidationError
from .text import FEATURE_CONFIG, NormalizationConfig, TokenizedSentence, normalize


def check_alpha(alpha) -> float:
    if isinstance(alpha, bool) or not isinstance(alpha, Real) or math.isnan(alpha):
        raise ValidationError(f"alpha must be a real number, got {alpha!r}")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    return float(alpha)


def check_seed(seed, name: str = "seed") -> int:
    if isinstance(seed, bool) or not isinstance(seed, Integral) or seed < 0:
        raise ValidationError(f"{name} must be a non-negative integer, got {seed!r}")
    return int(seed)


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def as_token_lists(X: Iterable, config: NormalizationConfig = FEATURE_CONFIG) -> list[list[str]]:
    """Coerce strings, token sequences or TokenizedSentences into normalized token lists.

    Lexicon tokens carrying an internal space are split back into words so
    features never depend on whether a phrase came from the lexicon.
    """
    out = []
    for item in X:
        if isinstance(item, str):
            tokens: Sequence[str] = item.split()
        elif isinstance(item, TokenizedSentence):
            tokens = item.tokens
        elif isinstance(item, (list, tuple)):
            tokens = item
        else:
            raise ValidationError(
                f"expected str, token list or TokenizedSentence, got {type(item).__name__}"
            )
        out.append([w for tok in tokens for w in normalize(tok, config).split()])
    return out
