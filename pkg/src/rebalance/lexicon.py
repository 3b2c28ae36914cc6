"""Synonym sets and stopword lists loaded from flat UTF-8 files.

``synonyms.tsv``: one synonym group per line, words separated by tabs.
Entries may contain spaces (multi-word synonyms). Blank lines and lines
starting with ``#`` are skipped.

``stopwords.txt``: one word per line, ``#`` comments allowed.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .exceptions import ParseError
from .text import DEFAULT_CONFIG, NormalizationConfig, decode_utf8, normalize

logger = logging.getLogger(__name__)


def _clean_entry(entry: str, config: NormalizationConfig) -> str:
    return " ".join(normalize(entry, config).split())


@dataclass(frozen=True)
class SynonymLexicon:
    groups: tuple[tuple[str, ...], ...] = ()
    config: NormalizationConfig = DEFAULT_CONFIG
    dropped_groups: int = 0
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index: dict[str, list[int]] = {}
        for gid, group in enumerate(self.groups):
            if len(group) < 2 or len(set(group)) != len(group):
                raise ValueError(f"group {gid} must hold >= 2 distinct words: {group!r}")
            for word in group:
                index.setdefault(word, []).append(gid)
        object.__setattr__(self, "index", {w: tuple(g) for w, g in index.items()})

    @classmethod
    def from_groups(
        cls, groups: Iterable[Iterable[str]], config: NormalizationConfig = DEFAULT_CONFIG
    ) -> "SynonymLexicon":
        """Build a lexicon, deduplicating each group and dropping groups of size < 2."""
        kept, dropped = [], 0
        for group in groups:
            words = _dedup(_clean_entry(w, config) for w in group)
            words = [w for w in words if w]
            if len(words) < 2:
                dropped += 1
                continue
            kept.append(tuple(words))
        return cls(tuple(kept), config=config, dropped_groups=dropped)

    def __len__(self) -> int:
        return len(self.groups)

    def synonyms_of(self, word: str) -> list[str]:
        return synonyms_of(self, word)

    def has_synonyms(self, word: str) -> bool:
        return _clean_entry(word, self.config) in self.index


def _dedup(items: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def _read_lines(path) -> list[str]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, "rb") as fh:
        text = decode_utf8(fh.read())
    return text.splitlines()


def _skip(line: str) -> bool:
    stripped = line.strip()
    return not stripped or stripped.startswith("#")


def load_synonyms(path, config: NormalizationConfig = DEFAULT_CONFIG) -> SynonymLexicon:
    groups = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        # tab-only lines are malformed groups, not blank lines
        if _skip(line) and "\t" not in line:
            continue
        words = [w for w in (_clean_entry(f, config) for f in line.split("\t")) if w]
        if not words:
            raise ParseError("synonym line holds zero words", line=lineno, path=path)
        groups.append(words)
    lexicon = SynonymLexicon.from_groups(groups, config)
    if lexicon.dropped_groups:
        logger.warning("%s: dropped %d synonym groups with fewer than 2 distinct words",
                       path, lexicon.dropped_groups)
    return lexicon


def synonyms_of(lexicon: SynonymLexicon, word: str) -> list[str]:
    """All words sharing a group with ``word``, in file order, excluding ``word``."""
    key = _clean_entry(word, lexicon.config)
    out: list[str] = []
    seen = {key}
    for gid in lexicon.index.get(key, ()):
        for other in lexicon.groups[gid]:
            if other not in seen:
                seen.add(other)
                out.append(other)
    return out


@dataclass(frozen=True)
class StopwordSet:
    words: frozenset = frozenset()
    config: NormalizationConfig = DEFAULT_CONFIG

    @classmethod
    def from_words(
        cls, words: Iterable[str], config: NormalizationConfig = DEFAULT_CONFIG
    ) -> "StopwordSet":
        return cls(frozenset(w for w in (_clean_entry(x, config) for x in words) if w), config)

    def __contains__(self, word: str) -> bool:
        return _clean_entry(word, self.config) in self.words

    def __len__(self) -> int:
        return len(self.words)


def load_stopwords(path, config: NormalizationConfig = DEFAULT_CONFIG) -> StopwordSet:
    return StopwordSet.from_words(
        (line for line in _read_lines(path) if not _skip(line)), config
    )


EMPTY_LEXICON = SynonymLexicon()
EMPTY_STOPWORDS = StopwordSet()


def write_synonyms(groups: Union[SynonymLexicon, Sequence[Sequence[str]]], path) -> None:
    if isinstance(groups, SynonymLexicon):
        groups = groups.groups
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for group in groups:
            fh.write("\t".join(group) + "\n")


def write_stopwords(words: Union[StopwordSet, Iterable[str]], path) -> None:
    if isinstance(words, StopwordSet):
        words = sorted(words.words)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word in words:
            fh.write(word + "\n")
