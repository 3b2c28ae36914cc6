"""Labeled corpora: loading, saving, per-class statistics and stratified folds.

Supported formats are CSV/TSV (header row required, RFC 4180 quoting) and
JSONL (one object per line). A record whose tokens cannot be recovered by
re-tokenizing its text (multi-word lexicon substitutions) is saved with an
extra ``tokens`` field so it round-trips exactly.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from ._validation import check_positive_int, check_seed
from .exceptions import ParseError, ValidationError
from .text import TokenizedSentence, decode_utf8, detokenize, tokenize

logger = logging.getLogger(__name__)

FORMATS = ("csv", "tsv", "jsonl")
TOKEN_SEP = "\t"


@dataclass(frozen=True)
class Record:
    id: str
    sentence: TokenizedSentence
    label: str
    # provenance of augmented records; not persisted
    op: Optional[str] = field(default=None, compare=False)
    degenerate: bool = field(default=False, compare=False)

    @property
    def text(self) -> str:
        return detokenize(self.sentence)

    @property
    def is_empty(self) -> bool:
        return len(self.sentence) == 0


@dataclass(frozen=True)
class LabeledCorpus:
    records: tuple[Record, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError(f"duplicate labels in inventory {self.labels}")
        known = set(self.labels)
        seen: set[str] = set()
        for rec in self.records:
            if rec.label not in known:
                raise ValidationError(f"record {rec.id!r} has label {rec.label!r} outside {self.labels}")
            if rec.id in seen:
                raise ValidationError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)

    @classmethod
    def from_records(cls, records: Iterable[Record], labels: Sequence[str] | None = None):
        records = tuple(records)
        if labels is None:
            labels = list(dict.fromkeys(r.label for r in records))
        return cls(records, tuple(labels))

    @classmethod
    def from_texts(cls, texts: Sequence[str], labels: Sequence[str], ids=None, prefix="doc"):
        if len(texts) != len(labels):
            raise ValidationError(f"{len(texts)} texts but {len(labels)} labels")
        ids = ids if ids is not None else [f"{prefix}:{i + 1}" for i in range(len(texts))]
        recs = [Record(str(i), t if isinstance(t, TokenizedSentence) else tokenize(t), str(y))
                for i, t, y in zip(ids, texts, labels)]
        return cls.from_records(recs)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @property
    def y(self) -> list[str]:
        return [r.label for r in self.records]

    @property
    def sentences(self) -> list[TokenizedSentence]:
        return [r.sentence for r in self.records]

    @property
    def empty_ids(self) -> list[str]:
        return [r.id for r in self.records if r.is_empty]

    def label_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(self.labels, 0)
        for rec in self.records:
            counts[rec.label] += 1
        return counts

    def subset(self, ids: Iterable[str]) -> "LabeledCorpus":
        """Records whose id is in ``ids``, kept in corpus order; inventory unchanged."""
        wanted = set(ids)
        return LabeledCorpus(tuple(r for r in self.records if r.id in wanted), self.labels)


def infer_format(path, fmt: Optional[str] = None) -> str:
    if fmt:
        if fmt not in FORMATS:
            raise ValidationError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
        return fmt
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    if ext in ("jsonl", "json", "ndjson"):
        return "jsonl"
    if ext in ("csv", "tsv"):
        return ext
    raise ValidationError(f"cannot infer corpus format from {path!r}; pass format explicitly")


def _make_record(row: dict, rownum: int, source: str, text_field: str, label_field: str,
                 id_field: Optional[str], path) -> Record:
    for name in (text_field, label_field):
        if row.get(name) is None:
            raise ParseError(f"missing field {name!r}", line=rownum, path=path)
    text = row[text_field]
    if not isinstance(text, str):
        raise ParseError(f"field {text_field!r} must be a string", line=rownum, path=path)
    if id_field and row.get(id_field) not in (None, ""):
        rid = str(row[id_field])
    else:
        rid = f"{source}:{rownum}"
    tokens = row.get("tokens")
    if tokens not in (None, ""):
        if isinstance(tokens, str):
            tokens = tokens.split(TOKEN_SEP)
        sentence = TokenizedSentence(tuple(tokens), text)
    else:
        sentence = tokenize(text)
    return Record(rid, sentence, str(row[label_field]))


def load_corpus(path, format: Optional[str] = None, text_field: str = "text",
                label_field: str = "label", id_field: Optional[str] = "id") -> LabeledCorpus:
    """Read a corpus file.

    ``id_field`` is used when that column exists; otherwise ids are
    ``"<basename>:<row>"`` with rows counted from 1 (data rows for CSV/TSV,
    physical lines for JSONL).
    """
    fmt = infer_format(path, format)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, "rb") as fh:
        text = decode_utf8(fh.read())
    source = os.path.basename(str(path))
    records = []
    if fmt == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno, path=path) from None
            if not isinstance(row, dict):
                raise ParseError("expected a JSON object", line=lineno, path=path)
            records.append(_make_record(row, lineno, source, text_field, label_field, id_field, path))
    else:
        reader = csv.DictReader(io.StringIO(text, newline=""),
                                delimiter="," if fmt == "csv" else "\t")
        header = reader.fieldnames or []
        for name in (text_field, label_field):
            if name not in header:
                raise ParseError(f"header lacks field {name!r}", line=1, path=path)
        for rownum, row in enumerate(reader, start=1):
            records.append(_make_record(row, rownum, source, text_field, label_field, id_field, path))
    corpus = LabeledCorpus.from_records(records)
    if corpus.empty_ids:
        logger.warning("%s: %d records have empty text and will not be augmented",
                       path, len(corpus.empty_ids))
    return corpus


def _needs_tokens(rec: Record) -> bool:
    return tokenize(rec.text).tokens != rec.sentence.tokens


def save_corpus(corpus: LabeledCorpus, path, format: Optional[str] = None) -> None:
    fmt = infer_format(path, format)
    with_tokens = any(_needs_tokens(r) for r in corpus.records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for rec in corpus.records:
                row = {"id": rec.id, "text": rec.text, "label": rec.label}
                if with_tokens and _needs_tokens(rec):
                    row["tokens"] = list(rec.sentence.tokens)
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
            return
        fields = ["id", "text", "label"] + (["tokens"] if with_tokens else [])
        writer = csv.writer(fh, delimiter="," if fmt == "csv" else "\t",
                            quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(fields)
        for rec in corpus.records:
            row = [rec.id, rec.text, rec.label]
            if with_tokens:
                row.append(TOKEN_SEP.join(rec.sentence.tokens) if _needs_tokens(rec) else "")
            writer.writerow(row)


@dataclass(frozen=True)
class ClassStats:
    label: str
    count: int
    avg_len: float
    total_tokens: int
    unique_vocab: int

    def to_dict(self) -> dict:
        return {"label": self.label, "count": self.count, "avg_len": self.avg_len,
                "avg_len_2dp": round(self.avg_len, 2), "total_tokens": self.total_tokens,
                "unique_vocab": self.unique_vocab}


TOTAL = "Total"


@dataclass(frozen=True)
class CorpusStats:
    per_label: dict
    overall: ClassStats

    def __getitem__(self, label: str) -> ClassStats:
        return self.per_label[label]

    def counts(self) -> dict[str, int]:
        return {lab: s.count for lab, s in self.per_label.items()}

    def rows(self) -> list[ClassStats]:
        return list(self.per_label.values()) + [self.overall]

    def to_dict(self) -> dict:
        return {"classes": [s.to_dict() for s in self.per_label.values()],
                "overall": self.overall.to_dict()}


def _stats_for(label: str, records: Sequence[Record]) -> ClassStats:
    total = sum(len(r.sentence) for r in records)
    vocab = {tok for r in records for tok in r.sentence.tokens}
    avg = total / len(records) if records else 0.0
    return ClassStats(label, len(records), avg, total, len(vocab))


def class_stats(corpus: LabeledCorpus) -> CorpusStats:
    """Per-label statistics in inventory order plus an overall row.

    ``avg_len`` keeps full precision; renderers round it to 2 decimals.
    """
    by_label: dict[str, list[Record]] = {lab: [] for lab in corpus.labels}
    for rec in corpus.records:
        by_label[rec.label].append(rec)
    per_label = {lab: _stats_for(lab, recs) for lab, recs in by_label.items()}
    return CorpusStats(per_label, _stats_for(TOTAL, corpus.records))


def stats_to_json(stats: CorpusStats) -> str:
    return json.dumps(stats.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)


def format_stats_table(stats: CorpusStats) -> str:
    header = ["Label", "Num. comments", "Avg. word length", "Vocab. size (token total)",
              "Unique vocab"]
    body = [[s.label, f"{s.count:,}", f"{s.avg_len:.2f}", f"{s.total_tokens:,}",
             f"{s.unique_vocab:,}"] for s in stats.rows()]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    lines = []
    for n, row in enumerate([header] + body):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells))
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def kfold_splits(corpus: LabeledCorpus, k: int, seed: int = 0) -> list[tuple[list[str], list[str]]]:
    """Stratified k-fold partition of record ids.

    Each label's records are shuffled and dealt to folds round-robin; the
    dealing position carries over between labels so overall fold sizes also
    differ by at most one. Id lists keep corpus order.
    """
    k = check_positive_int(k, "k", minimum=2)
    check_seed(seed)
    if k > len(corpus):
        raise ValidationError(f"k={k} exceeds the number of records ({len(corpus)})")
    rng = np.random.default_rng(seed)
    fold_of: dict[str, int] = {}
    pointer = 0
    for label in corpus.labels:
        ids = [r.id for r in corpus.records if r.label == label]
        if 0 < len(ids) < k:
            logger.warning("label %r has %d records, fewer than k=%d folds", label, len(ids), k)
        for j in rng.permutation(len(ids)):
            fold_of[ids[j]] = pointer
            pointer = (pointer + 1) % k
    folds = []
    for f in range(k):
        test = [r.id for r in corpus.records if fold_of[r.id] == f]
        train = [r.id for r in corpus.records if fold_of[r.id] != f]
        folds.append((train, test))
    return folds
