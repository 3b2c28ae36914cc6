"""Bag-of-words vocabulary and sparse feature vectors.

The vocabulary is fit on training text only and then frozen. Term indices
follow lexicographic order; ``max_features`` keeps the terms with the highest
document frequency, breaking ties lexicographically.
"""
from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_token_lists, check_positive_int
from .corpus import LabeledCorpus
from .exceptions import ValidationError
from .text import NormalizationConfig

SCHEMES = ("counts", "tfidf")


@dataclass(frozen=True)
class VocabConfig:
    min_df: int = 1
    max_features: Optional[int] = None
    scheme: str = "counts"
    lowercase: bool = True
    bigrams: bool = False

    def __post_init__(self):
        check_positive_int(self.min_df, "min_df")
        if self.max_features is not None:
            check_positive_int(self.max_features, "max_features")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    def to_dict(self) -> dict:
        return {"min_df": self.min_df, "max_features": self.max_features, "scheme": self.scheme,
                "lowercase": self.lowercase, "bigrams": self.bigrams}


@dataclass(frozen=True)
class SparseVector:
    indices: tuple[int, ...]
    values: tuple[float, ...]
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValidationError("indices and values differ in length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValidationError("indices must be strictly increasing")
        if self.indices and (self.indices[0] < 0 or self.indices[-1] >= self.dim):
            raise ValidationError(f"index out of range for dimension {self.dim}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValidationError("weights must be finite")

    def __len__(self) -> int:
        return len(self.indices)

    def items(self) -> list[tuple[int, float]]:
        return list(zip(self.indices, self.values))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[list(self.indices)] = self.values
        return out


def _terms(tokens: Sequence[str], bigrams: bool) -> list[str]:
    if not bigrams:
        return list(tokens)
    return list(tokens) + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


def _documents(docs, config: VocabConfig) -> list[list[str]]:
    if isinstance(docs, LabeledCorpus):
        docs = docs.sentences
    token_lists = as_token_lists(docs, NormalizationConfig(lowercase=config.lowercase))
    return [_terms(tokens, config.bigrams) for tokens in token_lists]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    df: tuple[int, ...]
    n_docs: int
    config: VocabConfig = VocabConfig()
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def idf(self) -> np.ndarray:
        df = np.asarray(self.df, dtype=float)
        return np.log((1.0 + self.n_docs) / (1.0 + df)) + 1.0

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "n_docs": self.n_docs,
                "terms": [{"term": t, "index": i, "df": d}
                          for i, (t, d) in enumerate(zip(self.terms, self.df))]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        entries = sorted(d["terms"], key=lambda e: e["index"])
        if [e["index"] for e in entries] != list(range(len(entries))):
            raise ValidationError("vocabulary indices must be contiguous from 0")
        return cls(tuple(e["term"] for e in entries), tuple(int(e["df"]) for e in entries),
                   int(d["n_docs"]), VocabConfig(**d.get("config", {})))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def fit_vocabulary(train, config: VocabConfig = VocabConfig()) -> Vocabulary:
    docs = _documents(train, config)
    if not docs:
        raise ValidationError("cannot fit a vocabulary on an empty training set")
    df = Counter(term for doc in docs for term in set(doc))
    kept = [(t, n) for t, n in df.items() if n >= config.min_df]
    if config.max_features is not None and len(kept) > config.max_features:
        kept = sorted(kept, key=lambda tn: (-tn[1], tn[0]))[: config.max_features]
    if not kept:
        raise ValidationError(f"empty vocabulary: no term reaches min_df={config.min_df}")
    kept.sort()
    return Vocabulary(tuple(t for t, _ in kept), tuple(n for _, n in kept), len(docs), config)


def _weights(terms: Sequence[str], vocab: Vocabulary, idf: Optional[np.ndarray]):
    counts = Counter(vocab.index[t] for t in terms if t in vocab.index)
    idx = sorted(counts)
    vals = np.array([counts[i] for i in idx], dtype=float)
    if idf is not None and idx:
        vals = vals * idf[idx]
        vals = vals / np.sqrt(np.dot(vals, vals))
    return idx, vals


def vectorize(sentence, vocab: Vocabulary) -> SparseVector:
    """Map one sentence (string, token list or TokenizedSentence) to a sparse vector."""
    (terms,) = _documents([sentence], vocab.config)
    idf = vocab.idf() if vocab.config.scheme == "tfidf" else None
    idx, vals = _weights(terms, vocab, idf)
    return SparseVector(tuple(idx), tuple(float(v) for v in vals), len(vocab))


def vectorize_many(docs, vocab: Vocabulary) -> sp.csr_matrix:
    """Stack vectors for many documents into a CSR matrix (rows in input order)."""
    idf = vocab.idf() if vocab.config.scheme == "tfidf" else None
    indptr, indices, data = [0], [], []
    for terms in _documents(docs, vocab.config):
        idx, vals = _weights(terms, vocab, idf)
        indices.extend(idx)
        data.extend(vals.tolist())
        indptr.append(len(indices))
    return sp.csr_matrix((np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64),
                          np.asarray(indptr, dtype=np.int64)), shape=(len(indptr) - 1, len(vocab)))


def stack_vectors(vectors: Iterable[SparseVector], dim: Optional[int] = None) -> sp.csr_matrix:
    vectors = list(vectors)
    if dim is None:
        if not vectors:
            raise ValidationError("cannot infer dimension of an empty vector list")
        dim = vectors[0].dim
    indptr, indices, data = [0], [], []
    for v in vectors:
        if v.dim != dim:
            raise ValidationError(f"vector dimension {v.dim} != {dim}")
        indices.extend(v.indices)
        data.extend(v.values)
        indptr.append(len(indices))
    return sp.csr_matrix((np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64),
                          np.asarray(indptr, dtype=np.int64)), shape=(len(vectors), dim))


class BowVectorizer(TransformerMixin, BaseEstimator):
    """Unigram (optionally bigram) bag-of-words transformer producing CSR matrices."""

    def __init__(self, min_df=1, max_features=None, scheme="counts", lowercase=True,
                 bigrams=False):
        self.min_df = min_df
        self.max_features = max_features
        self.scheme = scheme
        self.lowercase = lowercase
        self.bigrams = bigrams

    def fit(self, X, y=None):
        config = VocabConfig(self.min_df, self.max_features, self.scheme, self.lowercase,
                             self.bigrams)
        self.vocabulary_ = fit_vocabulary(X, config)
        return self

    def transform(self, X):
        check_is_fitted(self, "vocabulary_")
        return vectorize_many(X, self.vocabulary_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "vocabulary_")
        return np.asarray(self.vocabulary_.terms, dtype=object)
