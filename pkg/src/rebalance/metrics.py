"""Confusion matrices and precision / recall / F1 aggregation.

Macro-F1 averages over the *whole* label inventory: a class that never
occurs in gold or predictions contributes an F1 of 0. Any 0/0 ratio is 0.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import ValidationError

logger = logging.getLogger(__name__)


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows gold, columns predicted
    labels: tuple[str, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ValidationError("cannot add confusion matrices over different inventories")
        return ConfusionMatrix(self.counts + other.counts, self.labels)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["gold\\pred", *self.labels])
        for lab, row in zip(self.labels, self.counts):
            writer.writerow([lab, *(int(c) for c in row)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "counts": self.counts.tolist()}


def confusion_matrix(gold: Sequence, pred: Sequence, inventory: Sequence) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise ValidationError(f"{len(gold)} gold labels but {len(pred)} predictions")
    labels = tuple(inventory)
    pos = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(gold, pred):
        if g not in pos or p not in pos:
            bad = g if g not in pos else p
            raise ValidationError(f"unknown label {bad!r}; inventory is {labels}")
        counts[pos[g], pos[p]] += 1
    if not len(gold):
        logger.warning("confusion matrix over zero records; all metrics are 0")
    return ConfusionMatrix(counts, labels)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def per_class_prf(cm: ConfusionMatrix) -> dict[str, PRF]:
    counts = cm.counts
    diag = np.diag(counts)
    col = counts.sum(axis=0)
    row = counts.sum(axis=1)
    out = {}
    for i, lab in enumerate(cm.labels):
        p = _ratio(float(diag[i]), float(col[i]))
        r = _ratio(float(diag[i]), float(row[i]))
        out[lab] = PRF(p, r, _ratio(2 * p * r, p + r))
    return out


def f1_macro(cm: ConfusionMatrix) -> float:
    scores = [prf.f1 for prf in per_class_prf(cm).values()]
    return float(sum(scores) / len(scores)) if scores else 0.0


def f1_micro(cm: ConfusionMatrix) -> float:
    return _ratio(float(np.trace(cm.counts)), float(cm.total))


@dataclass(frozen=True)
class EvalReport:
    per_class: dict
    f1_macro: float
    f1_micro: float
    confusion: ConfusionMatrix
    support: dict

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "EvalReport":
        support = {lab: int(n) for lab, n in zip(cm.labels, cm.counts.sum(axis=1))}
        return cls(per_class_prf(cm), f1_macro(cm), f1_micro(cm), cm, support)

    def to_dict(self) -> dict:
        return {
            "f1_macro": self.f1_macro,
            "f1_micro": self.f1_micro,
            "per_class": {lab: prf._asdict() for lab, prf in self.per_class.items()},
            "support": self.support,
            "confusion_matrix": self.confusion.to_dict(),
        }

    def format(self) -> str:
        lines = [f"F1-micro (%): {100 * self.f1_micro:.2f}",
                 f"F1-macro (%): {100 * self.f1_macro:.2f}"]
        width = max(len(lab) for lab in self.per_class) if self.per_class else 5
        lines.append(f"{'label'.ljust(width)}  {'P (%)':>7}  {'R (%)':>7}  {'F1 (%)':>7}  support")
        for lab, prf in self.per_class.items():
            lines.append(f"{lab.ljust(width)}  {100 * prf.precision:7.2f}  {100 * prf.recall:7.2f}"
                         f"  {100 * prf.f1:7.2f}  {self.support[lab]:7d}")
        return "\n".join(lines)


def evaluate(gold: Sequence, pred: Sequence, inventory: Sequence) -> EvalReport:
    return EvalReport.from_confusion(confusion_matrix(gold, pred, inventory))
