"""Balancing plans: how many EDA variants each minority record receives.

A plan maps each label to a target count. Execution spreads the shortfall
``target - current`` over the label's non-empty records with a floor plus
remainder rule, so targets are hit exactly even when they are not integer
multiples of the current count.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from sklearn.base import BaseEstimator

from ._validation import check_positive_int, check_seed
from .corpus import ClassStats, CorpusStats, LabeledCorpus, Record, class_stats
from .eda import ALL_OPS, EdaParams, augment_sentence
from .exceptions import PlanError, ValidationError
from .lexicon import EMPTY_LEXICON, EMPTY_STOPWORDS, StopwordSet, SynonymLexicon
from .text import TokenizedSentence, tokenize

logger = logging.getLogger(__name__)

MATCH_MAJORITY = "match_majority"
TARGET_COUNTS = "target_counts"
FIXED_NAUG = "fixed_naug"
MAX_TOPUP_ROUNDS = 3


@dataclass(frozen=True)
class BalancePolicy:
    kind: str = MATCH_MAJORITY
    targets: Optional[Mapping[str, int]] = None
    n_aug: Optional[int] = None

    def __post_init__(self):
        if self.kind == TARGET_COUNTS:
            if not self.targets:
                raise ValidationError("target_counts policy needs a non-empty label -> count map")
            for label, n in self.targets.items():
                check_positive_int(n, f"target count for {label!r}", minimum=0)
            object.__setattr__(self, "targets", dict(self.targets))
        elif self.kind == FIXED_NAUG:
            check_positive_int(self.n_aug, "n_aug")
        elif self.kind != MATCH_MAJORITY:
            raise ValidationError(f"unknown balance policy {self.kind!r}")

    @classmethod
    def match_majority(cls):
        return cls(MATCH_MAJORITY)

    @classmethod
    def target_counts(cls, targets: Mapping[str, int]):
        return cls(TARGET_COUNTS, targets=targets)

    @classmethod
    def fixed_naug(cls, n_aug: int):
        return cls(FIXED_NAUG, n_aug=n_aug)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.targets is not None:
            d["targets"] = dict(self.targets)
        if self.n_aug is not None:
            d["n_aug"] = self.n_aug
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "BalancePolicy":
        return cls(d.get("kind", MATCH_MAJORITY), d.get("targets"), d.get("n_aug"))


@dataclass(frozen=True)
class LabelAllocation:
    current_count: int
    target_count: int
    base_naug: int
    remainder_count: int

    @property
    def planned_count(self) -> int:
        return self.current_count * (1 + self.base_naug) + self.remainder_count


def allocate(current: int, target: int) -> LabelAllocation:
    if target < current:
        raise PlanError(f"target {target} is below the current count {current}")
    if current == 0:
        if target:
            raise PlanError(f"cannot reach target {target} from zero records")
        return LabelAllocation(0, 0, 0, 0)
    base, rem = divmod(target - current, current)
    return LabelAllocation(current, target, base, rem)


@dataclass(frozen=True)
class AugmentationPlan:
    policy: BalancePolicy
    per_label: dict = field(default_factory=dict)
    eda: EdaParams = EdaParams()
    dedup: bool = False

    @property
    def is_empty(self) -> bool:
        return not self.per_label

    def targets(self) -> dict[str, int]:
        return {lab: a.target_count for lab, a in self.per_label.items()}

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.to_dict(),
            "eda": self.eda.to_dict(),
            "dedup": self.dedup,
            "per_label": {lab: {"current_count": a.current_count, "target_count": a.target_count,
                                "base_naug": a.base_naug, "remainder_count": a.remainder_count}
                          for lab, a in self.per_label.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping) -> "AugmentationPlan":
        per_label = {lab: LabelAllocation(int(a["current_count"]), int(a["target_count"]),
                                          int(a["base_naug"]), int(a["remainder_count"]))
                     for lab, a in d.get("per_label", {}).items()}
        return cls(BalancePolicy.from_dict(d.get("policy", {})), per_label,
                   EdaParams.from_dict(d.get("eda", {})), bool(d.get("dedup", False)))


def _counts(stats: Union[CorpusStats, Mapping[str, int], Mapping[str, ClassStats]]) -> dict[str, int]:
    if isinstance(stats, CorpusStats):
        return stats.counts()
    return {lab: (s.count if isinstance(s, ClassStats) else int(s)) for lab, s in stats.items()}


def plan_balance(stats, policy: BalancePolicy = BalancePolicy(), eda: EdaParams = EdaParams(),
                 dedup: bool = False) -> AugmentationPlan:
    """Build a plan from per-label counts (a :class:`CorpusStats` or a plain mapping)."""
    counts = _counts(stats)
    if not counts:
        raise PlanError("cannot plan over empty statistics")
    per_label: dict[str, LabelAllocation] = {}
    if policy.kind == TARGET_COUNTS:
        for label, target in policy.targets.items():
            if label not in counts:
                raise PlanError(f"target given for unknown label {label!r}")
            try:
                alloc = allocate(counts[label], target)
            except PlanError as exc:
                raise PlanError(f"label {label!r}: {exc}") from None
            if target > counts[label]:
                per_label[label] = alloc
    else:
        majority = max(counts.values())
        for label, count in counts.items():
            if count == majority:
                continue
            if count == 0:
                logger.warning("label %r has no records and cannot be augmented", label)
                continue
            target = majority if policy.kind == MATCH_MAJORITY else count * (1 + policy.n_aug)
            per_label[label] = allocate(count, target)
    return AugmentationPlan(policy, per_label, eda, dedup)


@dataclass
class ExecutionSummary:
    generated: dict = field(default_factory=dict)
    degenerate: dict = field(default_factory=dict)
    duplicates_dropped: dict = field(default_factory=dict)
    shortfall: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"generated": self.generated, "degenerate": self.degenerate,
                "duplicates_dropped": self.duplicates_dropped, "shortfall": self.shortfall}


def _variant_id(orig_id: str, index: int) -> str:
    return f"{orig_id}#aug{index}"


def execute_plan(train: LabeledCorpus, plan: AugmentationPlan,
                 lex: SynonymLexicon = EMPTY_LEXICON, stop: StopwordSet = EMPTY_STOPWORDS,
                 base_seed: int = 0, summary: Optional[ExecutionSummary] = None) -> LabeledCorpus:
    """Append EDA variants to ``train`` until each planned label hits its target.

    Output order: originals as given, then variants sorted by
    ``(original id, variant index)``. The allocation is recomputed from the
    records of ``train`` itself, so a plan may be applied to a corpus whose
    counts differ from the statistics it was planned on.
    """
    check_seed(base_seed, "base_seed")
    if plan.is_empty:
        return train
    summary = summary if summary is not None else ExecutionSummary()
    counts = train.label_counts()
    unknown = [lab for lab in plan.per_label if lab not in counts]
    if unknown:
        raise PlanError(f"plan names labels absent from the corpus: {unknown}")

    variants: list[tuple[str, int, Record]] = []
    for label, alloc in plan.per_label.items():
        needed = alloc.target_count - counts[label]
        if needed < 0:
            raise PlanError(f"label {label!r}: target {alloc.target_count} is below the "
                            f"current count {counts[label]}")
        if needed == 0:
            continue
        eligible = [(i, r) for i, r in enumerate(train.records)
                    if r.label == label and not r.is_empty]
        if not eligible:
            raise PlanError(f"label {label!r} has no non-empty records to augment")
        if len(eligible) != alloc.current_count:
            logger.info("label %r: allocating over %d eligible records (plan assumed %d)",
                        label, len(eligible), alloc.current_count)
        base, rem = divmod(needed, len(eligible))
        next_index = {}
        seen = {r.sentence.tokens for r in train.records if r.label == label} if plan.dedup else None
        kept = dropped = degenerate = 0

        def emit(pos: int, rec: Record, n: int):
            nonlocal kept, dropped, degenerate
            start = next_index.get(rec.id, 0)
            next_index[rec.id] = start + n
            for v in augment_sentence(rec.sentence, plan.eda, lex, stop, base_seed, pos,
                                      n_variants=n, start=start):
                if seen is not None:
                    if v.sentence.tokens in seen:
                        dropped += 1
                        continue
                    seen.add(v.sentence.tokens)
                degenerate += v.degenerate
                kept += 1
                variants.append((rec.id, v.index,
                                 Record(_variant_id(rec.id, v.index), v.sentence, label,
                                        op=v.op, degenerate=v.degenerate)))

        for j, (pos, rec) in enumerate(eligible):
            n = base + (1 if j < rem else 0)
            if n:
                emit(pos, rec, n)
        rounds = 0
        while plan.dedup and kept < needed and rounds < MAX_TOPUP_ROUNDS:
            rounds += 1
            short = needed - kept
            b, r = divmod(short, len(eligible))
            for j, (pos, rec) in enumerate(eligible):
                n = b + (1 if j < r else 0)
                if n:
                    emit(pos, rec, n)
        if kept < needed:
            logger.warning("label %r: %d variants short of target after %d top-up rounds",
                           label, needed - kept, rounds)
            summary.shortfall[label] = needed - kept
        summary.generated[label] = kept
        summary.degenerate[label] = int(degenerate)
        summary.duplicates_dropped[label] = dropped

    variants.sort(key=lambda t: (t[0], t[1]))
    return LabeledCorpus(train.records + tuple(v[2] for v in variants), train.labels)


def rebalance(train: LabeledCorpus, policy: BalancePolicy = BalancePolicy(),
              eda: EdaParams = EdaParams(), lex: SynonymLexicon = EMPTY_LEXICON,
              stop: StopwordSet = EMPTY_STOPWORDS, base_seed: int = 0,
              dedup: bool = False) -> tuple[LabeledCorpus, AugmentationPlan]:
    """Plan on ``train``'s own statistics and execute in one call."""
    plan = plan_balance(class_stats(train), policy, eda, dedup)
    return execute_plan(train, plan, lex, stop, base_seed), plan


class EdaResampler(BaseEstimator):
    """Oversample minority classes with EDA variants (``fit_resample`` API).

    ``X`` is a sequence of strings or token lists, ``y`` the labels. The
    resampled output lists originals first, then generated variants.
    """

    def __init__(self, policy=MATCH_MAJORITY, targets=None, n_aug=None, alpha=0.1,
                 ops=ALL_OPS, synonyms=None, stopwords=None, dedup=False, random_state=0):
        self.policy = policy
        self.targets = targets
        self.n_aug = n_aug
        self.alpha = alpha
        self.ops = ops
        self.synonyms = synonyms
        self.stopwords = stopwords
        self.dedup = dedup
        self.random_state = random_state

    def _policy(self) -> BalancePolicy:
        return BalancePolicy(self.policy, self.targets, self.n_aug)

    def fit(self, X, y):
        self.fit_resample(X, y)
        return self

    def fit_resample(self, X: Sequence, y: Sequence):
        if len(X) != len(y):
            raise ValidationError(f"X has {len(X)} samples but y has {len(y)}")
        sentences = [x if isinstance(x, TokenizedSentence)
                     else TokenizedSentence(tuple(x)) if isinstance(x, (list, tuple))
                     else tokenize(x) for x in X]
        originals = {str(v): v for v in y}
        corpus = LabeledCorpus.from_texts(sentences, [str(v) for v in y], prefix="x")
        eda = EdaParams(self.alpha, tuple(self.ops), 1)
        self.summary_ = ExecutionSummary()
        self.plan_ = plan_balance(class_stats(corpus), self._policy(), eda, self.dedup)
        out = execute_plan(corpus, self.plan_, self.synonyms or EMPTY_LEXICON,
                           self.stopwords or EMPTY_STOPWORDS, self.random_state, self.summary_)
        self.sample_ids_ = out.ids
        return [r.text for r in out.records], [originals[lab] for lab in out.y]
