"""Synthetic imbalanced corpora with a matching synonym lexicon.

Each class owns a multinomial over ``vocab_per_class`` words, of which a
fraction ``shared_frac`` comes from a pool shared by all classes. Every
class-specific (content) word has a same-class alias; when a content word
is drawn, its alias is emitted instead with probability ``alias_rate``, and
the lexicon pairs the two. Shared words are returned as the stopword list.

``shared_mass`` is the total probability a class puts on the shared words;
``None`` leaves it to the Dirichlet draw. Higher values make classes harder
to tell apart.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import LabeledCorpus, Record
from .lexicon import StopwordSet, SynonymLexicon
from .text import TokenizedSentence

DEFAULT_LABELS = ("CLEAN", "OFFENSIVE", "HATE")


def make_imbalanced_corpus(class_sizes: Sequence[int] = (900, 60, 40),
                           labels: Sequence[str] = DEFAULT_LABELS,
                           vocab_per_class: int = 50, shared_frac: float = 0.3,
                           min_len: int = 8, max_len: int = 20, alias_rate: float = 0.5,
                           concentration: float = 1.0, shared_mass: float | None = None,
                           seed: int = 0):
    """Return ``(corpus, lexicon, stopwords)``."""
    if len(class_sizes) != len(labels):
        raise ValueError("class_sizes and labels differ in length")
    rng = np.random.default_rng(seed)
    n_shared = int(round(shared_frac * vocab_per_class))
    n_own = vocab_per_class - n_shared
    shared = [f"s{j:02d}" for j in range(n_shared)]
    groups = []
    class_words = []
    for c in range(len(labels)):
        own = [f"c{c}w{j:02d}" for j in range(n_own)]
        groups.extend((w, f"c{c}a{j:02d}") for j, w in enumerate(own))
        class_words.append(shared + own)
    alias = {w: a for w, a in groups}
    probs = []
    for _ in labels:
        p = rng.dirichlet(np.full(vocab_per_class, concentration))
        if shared_mass is not None and 0 < n_shared < vocab_per_class:
            p[:n_shared] *= shared_mass / p[:n_shared].sum()
            p[n_shared:] *= (1.0 - shared_mass) / p[n_shared:].sum()
        probs.append(p)

    records = []
    for c, (label, size) in enumerate(zip(labels, class_sizes)):
        words = class_words[c]
        for i in range(size):
            length = int(rng.integers(min_len, max_len + 1))
            draws = rng.choice(vocab_per_class, size=length, p=probs[c])
            flips = rng.random(length) < alias_rate
            tokens = [alias[words[d]] if (f and words[d] in alias) else words[d]
                      for d, f in zip(draws, flips)]
            records.append(Record(f"syn-{label}:{i + 1}", TokenizedSentence(tuple(tokens)), label))
    order = rng.permutation(len(records))
    corpus = LabeledCorpus(tuple(records[i] for i in order), tuple(labels))
    return corpus, SynonymLexicon.from_groups(groups), StopwordSet.from_words(shared)
