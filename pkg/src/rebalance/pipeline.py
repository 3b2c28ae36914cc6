"""Baseline-versus-augmented experiments.

Two protocols share one per-split routine: fit a vocabulary and a MaxEnt
model on the raw training split (baseline), augment the training split with
a balancing plan computed on that split alone and fit again (augmented),
then score both on the untouched evaluation split.

ExperimentConfig JSON schema (relative paths resolve against the config
file's directory)::

    {
      "dataset": {"path": "corpus.csv", "format": null,
                  "text_field": "text", "label_field": "label"},
      "synonyms": "synonyms.tsv",            # optional
      "stopwords": "stopwords.txt",          # optional
      "eda": {"alpha": 0.1, "ops_enabled": ["SR", "RI", "RS", "RD"], "n_aug": 4},
      "policy": {"kind": "match_majority"},  # or target_counts / fixed_naug
      "dedup": false,
      "mode": {"kind": "crossval", "k": 5},
      #   or {"kind": "holdout", "train": ..., "test": ..., "dev": ...}
      "features": {"min_df": 1, "max_features": null, "scheme": "counts",
                   "lowercase": true, "bigrams": false},
      "classifier": {"learning_rate": 0.1, "l2": 0.0001, "max_epochs": 200,
                     "tol": 1e-06},
      "base_seed": 0,
      "output_dir": "out",
      "save_augmented": true,
      "augmented_format": null,              # defaults to the dataset format
      "n_jobs": 1
    }
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._validation import check_positive_int, check_seed
from .balance import AugmentationPlan, BalancePolicy, ExecutionSummary, execute_plan, plan_balance
from .corpus import LabeledCorpus, class_stats, infer_format, kfold_splits, load_corpus, save_corpus
from .eda import EdaParams
from .exceptions import ValidationError
from .features import VocabConfig, fit_vocabulary, vectorize_many
from .lexicon import EMPTY_LEXICON, EMPTY_STOPWORDS, StopwordSet, SynonymLexicon, load_stopwords, load_synonyms
from .maxent import MaxEntModel, TrainConfig, predict_many, train
from .metrics import ConfusionMatrix, EvalReport, evaluate

logger = logging.getLogger(__name__)

AUG_MARK = "#aug"


@dataclass(frozen=True)
class DatasetSpec:
    path: Optional[str] = None
    format: Optional[str] = None
    text_field: str = "text"
    label_field: str = "label"
    id_field: Optional[str] = "id"

    def load(self, path: Optional[str] = None) -> LabeledCorpus:
        return load_corpus(path or self.path, self.format, self.text_field, self.label_field,
                           self.id_field)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec = DatasetSpec()
    synonyms: Optional[str] = None
    stopwords: Optional[str] = None
    eda: EdaParams = EdaParams()
    policy: BalancePolicy = BalancePolicy()
    dedup: bool = False
    mode: str = "crossval"
    k: int = 5
    train_path: Optional[str] = None
    test_path: Optional[str] = None
    dev_path: Optional[str] = None
    features: VocabConfig = VocabConfig()
    classifier: TrainConfig = TrainConfig()
    base_seed: int = 0
    output_dir: Optional[str] = None
    save_augmented: bool = True
    augmented_format: Optional[str] = None
    n_jobs: int = 1

    def __post_init__(self):
        check_seed(self.base_seed, "base_seed")
        check_positive_int(self.n_jobs, "n_jobs")
        if self.mode == "crossval":
            check_positive_int(self.k, "k", minimum=2)
        elif self.mode == "holdout":
            if not (self.train_path and self.test_path):
                raise ValidationError("holdout mode needs train and test paths")
        else:
            raise ValidationError(f"mode must be 'crossval' or 'holdout', got {self.mode!r}")

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "ExperimentConfig":
        def resolve(p):
            return None if p is None else os.path.normpath(os.path.join(base_dir, p))

        known = {"dataset", "synonyms", "stopwords", "eda", "policy", "dedup", "mode", "features",
                 "classifier", "base_seed", "output_dir", "save_augmented", "augmented_format",
                 "n_jobs"}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown experiment config keys: {sorted(unknown)}")
        ds = dict(d.get("dataset", {}))
        if "path" in ds:
            ds["path"] = resolve(ds["path"])
        mode = dict(d.get("mode", {"kind": "crossval"}))
        kind = mode.pop("kind", "crossval")
        classifier = dict(d.get("classifier", {}))
        classifier.setdefault("seed", d.get("base_seed", 0))
        try:
            return cls(
                dataset=DatasetSpec(**ds),
                synonyms=resolve(d.get("synonyms")),
                stopwords=resolve(d.get("stopwords")),
                eda=EdaParams.from_dict(d.get("eda", {})),
                policy=BalancePolicy.from_dict(d.get("policy", {})),
                dedup=bool(d.get("dedup", False)),
                mode=kind,
                k=mode.get("k", 5),
                train_path=resolve(mode.get("train")),
                test_path=resolve(mode.get("test")),
                dev_path=resolve(mode.get("dev")),
                features=VocabConfig(**d.get("features", {})),
                classifier=TrainConfig(**classifier),
                base_seed=d.get("base_seed", 0),
                output_dir=resolve(d.get("output_dir")),
                save_augmented=bool(d.get("save_augmented", True)),
                augmented_format=d.get("augmented_format"),
                n_jobs=d.get("n_jobs", 1),
            )
        except TypeError as exc:  # unexpected keyword in a nested block
            raise ValidationError(f"invalid experiment config: {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: invalid JSON: {exc.msg}") from None
        return cls.from_dict(d, os.path.dirname(os.path.abspath(path)))

    def to_dict(self) -> dict:
        mode: dict = {"kind": self.mode}
        if self.mode == "crossval":
            mode["k"] = self.k
        else:
            mode.update(train=self.train_path, test=self.test_path, dev=self.dev_path)
        return {
            "dataset": {"path": self.dataset.path, "format": self.dataset.format,
                        "text_field": self.dataset.text_field,
                        "label_field": self.dataset.label_field},
            "synonyms": self.synonyms, "stopwords": self.stopwords,
            "eda": self.eda.to_dict(), "policy": self.policy.to_dict(), "dedup": self.dedup,
            "mode": mode, "features": self.features.to_dict(),
            "classifier": self.classifier.to_dict(), "base_seed": self.base_seed,
        }


@dataclass
class Resources:
    lexicon: SynonymLexicon = EMPTY_LEXICON
    stopwords: StopwordSet = EMPTY_STOPWORDS

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "Resources":
        return cls(load_synonyms(config.synonyms) if config.synonyms else EMPTY_LEXICON,
                   load_stopwords(config.stopwords) if config.stopwords else EMPTY_STOPWORDS)


@dataclass
class ArmResult:
    report: EvalReport
    model: MaxEntModel
    vocab_digest: str
    n_train: int

    def to_dict(self) -> dict:
        return {**self.report.to_dict(), "n_train": self.n_train,
                "vocab_digest": self.vocab_digest, "model_digest": self.model.digest(),
                "epochs_run": self.model.metadata["epochs_run"],
                "final_loss": self.model.metadata["final_loss"]}


@dataclass
class SplitResult:
    name: str
    baseline: ArmResult
    augmented: ArmResult
    plan: AugmentationPlan
    summary: ExecutionSummary
    test_ids: list
    train_ids: list
    augmented_corpus: LabeledCorpus = field(repr=False)

    def audit(self) -> dict:
        train_set = set(self.train_ids)
        return {"eval_ids_with_aug_suffix": sum(AUG_MARK in i for i in self.test_ids),
                "train_test_overlap": sum(i in train_set for i in self.test_ids)}

    def to_dict(self) -> dict:
        return {"name": self.name, "n_test": len(self.test_ids),
                "plan": self.plan.to_dict(), "augmentation": self.summary.to_dict(),
                "baseline": self.baseline.to_dict(), "augmented": self.augmented.to_dict(),
                "audit": self.audit()}


def fit_and_score(train_corpus: LabeledCorpus, test_corpus: LabeledCorpus, labels,
                  features: VocabConfig, classifier: TrainConfig,
                  dev_corpus: Optional[LabeledCorpus] = None) -> ArmResult:
    vocab = fit_vocabulary(train_corpus, features)
    X = vectorize_many(train_corpus.sentences, vocab)
    eval_set = None
    if dev_corpus is not None:
        eval_set = (vectorize_many(dev_corpus.sentences, vocab), dev_corpus.y)
    model = train(X, train_corpus.y, classifier, labels=labels, eval_set=eval_set)
    model.vocab_digest = vocab.digest()
    pred = predict_many(model, vectorize_many(test_corpus.sentences, vocab))
    return ArmResult(evaluate(test_corpus.y, pred, labels), model, vocab.digest(),
                     len(train_corpus))


def run_split(name: str, train_corpus: LabeledCorpus, test_corpus: LabeledCorpus,
              config: ExperimentConfig, resources: Resources,
              dev_corpus: Optional[LabeledCorpus] = None) -> SplitResult:
    labels = train_corpus.labels
    missing = [lab for lab, n in train_corpus.label_counts().items() if n == 0]
    if missing:
        raise ValidationError(f"{name}: training split lacks labels {missing}")
    baseline = fit_and_score(train_corpus, test_corpus, labels, config.features,
                             config.classifier, dev_corpus)
    plan = plan_balance(class_stats(train_corpus), config.policy, config.eda, config.dedup)
    summary = ExecutionSummary()
    augmented_corpus = execute_plan(train_corpus, plan, resources.lexicon, resources.stopwords,
                                    config.base_seed, summary)
    if plan.is_empty:
        augmented = baseline
    else:
        augmented = fit_and_score(augmented_corpus, test_corpus, labels, config.features,
                                  config.classifier, dev_corpus)
    return SplitResult(name, baseline, augmented, plan, summary, test_corpus.ids,
                       augmented_corpus.ids, augmented_corpus)


def _mean_std(values) -> dict:
    arr = np.asarray(values, dtype=float)
    return {"mean": float(arr.mean()), "std": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0}


def _summarize(splits: list[SplitResult]) -> dict:
    out = {}
    for arm in ("baseline", "augmented"):
        reports = [getattr(s, arm).report for s in splits]
        out[arm] = {"f1_macro": _mean_std([r.f1_macro for r in reports]),
                    "f1_micro": _mean_std([r.f1_micro for r in reports])}
    out["delta_f1_macro"] = out["augmented"]["f1_macro"]["mean"] - out["baseline"]["f1_macro"]["mean"]
    out["delta_f1_micro"] = out["augmented"]["f1_micro"]["mean"] - out["baseline"]["f1_micro"]["mean"]
    return out


def _leakage_audit(splits: list[SplitResult]) -> dict:
    aug_ids = sum(s.audit()["eval_ids_with_aug_suffix"] for s in splits)
    overlap = sum(s.audit()["train_test_overlap"] for s in splits)
    # folds with different training sets must end up with different vocabularies
    train_sets = {frozenset(i for i in s.train_ids if AUG_MARK not in i) for s in splits}
    digests = [s.baseline.vocab_digest for s in splits]
    distinct = len(set(digests)) == len(train_sets)
    return {"eval_ids_with_aug_suffix": aug_ids, "train_test_overlap": overlap,
            "baseline_vocab_digests": digests,
            "augmented_vocab_digests": [s.augmented.vocab_digest for s in splits],
            "vocab_digests_distinct_per_fold": distinct,
            "passed": aug_ids == 0 and overlap == 0 and distinct}


@dataclass
class ComparisonReport:
    mode: str
    config: dict
    splits: list
    summary: dict
    audit: dict

    def to_dict(self) -> dict:
        return {"mode": self.mode, "config": self.config,
                "folds": [s.to_dict() for s in self.splits],
                "summary": self.summary, "leakage_audit": self.audit}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)

    def total_confusion(self, arm: str) -> ConfusionMatrix:
        cms = [getattr(s, arm).report.confusion for s in self.splits]
        total = cms[0]
        for cm in cms[1:]:
            total = total + cm
        return total

    def write(self, output_dir) -> None:
        os.makedirs(output_dir, exist_ok=True)
        with open(os.path.join(output_dir, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")
        for arm in ("baseline", "augmented"):
            with open(os.path.join(output_dir, f"confusion_{arm}.csv"), "w", encoding="utf-8",
                      newline="") as fh:
                fh.write(self.total_confusion(arm).to_csv())


def _write_augmented(splits, config: ExperimentConfig, fmt: str) -> None:
    if not (config.output_dir and config.save_augmented):
        return
    os.makedirs(config.output_dir, exist_ok=True)
    for s in splits:
        save_corpus(s.augmented_corpus, os.path.join(config.output_dir, f"{s.name}_train_aug.{fmt}"),
                    fmt)


def _corpus_format(config: ExperimentConfig, path) -> str:
    if config.augmented_format:
        return infer_format("", config.augmented_format)
    return infer_format(path, config.dataset.format)


def run_crossval(config: ExperimentConfig, corpus: Optional[LabeledCorpus] = None,
                 resources: Optional[Resources] = None) -> ComparisonReport:
    """k-fold comparison; ``corpus``/``resources`` override the files named in ``config``."""
    if corpus is None:
        corpus = config.dataset.load()
    if resources is None:
        resources = Resources.from_config(config)
    folds = kfold_splits(corpus, config.k, config.base_seed)

    def one(i, train_ids, test_ids):
        return run_split(f"fold{i}", corpus.subset(train_ids), corpus.subset(test_ids), config,
                         resources)

    if config.n_jobs > 1:
        from joblib import Parallel, delayed

        splits = Parallel(n_jobs=config.n_jobs)(
            delayed(one)(i, tr, te) for i, (tr, te) in enumerate(folds))
    else:
        splits = [one(i, tr, te) for i, (tr, te) in enumerate(folds)]
    report = ComparisonReport("crossval", config.to_dict(), splits, _summarize(splits),
                              _leakage_audit(splits))
    if config.output_dir:
        report.write(config.output_dir)
        _write_augmented(splits, config,
                         _corpus_format(config, config.dataset.path or "corpus.jsonl"))
    return report


def run_holdout(config: ExperimentConfig, train_corpus: Optional[LabeledCorpus] = None,
                test_corpus: Optional[LabeledCorpus] = None,
                dev_corpus: Optional[LabeledCorpus] = None,
                resources: Optional[Resources] = None) -> ComparisonReport:
    """Fixed train/test (and optional dev) comparison.

    The dev split, when given, only selects the training epoch with the
    lowest development log-loss.
    """
    ds = config.dataset
    train_corpus = train_corpus or ds.load(config.train_path)
    test_corpus = test_corpus or ds.load(config.test_path)
    if dev_corpus is None and config.dev_path:
        dev_corpus = ds.load(config.dev_path)
    if resources is None:
        resources = Resources.from_config(config)
    known = set(train_corpus.labels)
    extra = [lab for lab in test_corpus.labels if lab not in known]
    if dev_corpus is not None:
        extra += [lab for lab in dev_corpus.labels if lab not in known and lab not in extra]
    if extra:
        raise ValidationError(f"labels {extra} occur in evaluation data but not in training data")
    test_corpus = replace(test_corpus, labels=train_corpus.labels)
    if dev_corpus is not None:
        dev_corpus = replace(dev_corpus, labels=train_corpus.labels)
    split = run_split("holdout", train_corpus, test_corpus, config, resources, dev_corpus)
    report = ComparisonReport("holdout", config.to_dict(), [split], _summarize([split]),
                              _leakage_audit([split]))
    if config.output_dir:
        report.write(config.output_dir)
        _write_augmented([split], config,
                         _corpus_format(config, config.train_path or "train.jsonl"))
    return report


def run_experiment(config: ExperimentConfig, **overrides) -> ComparisonReport:
    if config.mode == "crossval":
        return run_crossval(config, **overrides)
    return run_holdout(config, **overrides)
