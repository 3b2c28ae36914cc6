"""Command-line interface: ``rebalance <command> ...``.

Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from . import __version__
from .balance import AugmentationPlan, BalancePolicy, ExecutionSummary, execute_plan, plan_balance
from .corpus import class_stats, format_stats_table, load_corpus, save_corpus, stats_to_json
from .eda import ALL_OPS, EdaParams
from .exceptions import RebalanceError, ValidationError
from .features import VocabConfig, Vocabulary, fit_vocabulary, vectorize_many
from .lexicon import EMPTY_LEXICON, EMPTY_STOPWORDS, load_stopwords, load_synonyms
from .maxent import MaxEntModel, TrainConfig, predict_many, train
from .metrics import evaluate
from .pipeline import ExperimentConfig, run_experiment

logger = logging.getLogger("rebalance")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _target(value: str) -> tuple[str, int]:
    label, sep, count = value.rpartition("=")
    if not sep or not label:
        raise argparse.ArgumentTypeError(f"expected LABEL=COUNT, got {value!r}")
    try:
        return label, int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"count in {value!r} is not an integer") from None


def _ops(value: str) -> tuple[str, ...]:
    ops = tuple(v.strip().upper() for v in value.split(",") if v.strip())
    bad = [op for op in ops if op not in ALL_OPS]
    if bad or not ops:
        raise argparse.ArgumentTypeError(f"--ops takes a comma list drawn from {','.join(ALL_OPS)}")
    return ops


def _add_corpus_args(p):
    p.add_argument("corpus", help="corpus file (.csv, .tsv or .jsonl)")
    p.add_argument("--input-format", choices=["csv", "tsv", "jsonl"], default=None)
    p.add_argument("--text-field", default="text")
    p.add_argument("--label-field", default="label")
    p.add_argument("--id-field", default="id")


def _add_policy_args(p, allow_plan: bool):
    group = p.add_mutually_exclusive_group(required=True)
    if allow_plan:
        group.add_argument("--plan", help="plan JSON written by `rebalance plan`")
    group.add_argument("--match-majority", action="store_true",
                       help="grow every class to the majority count")
    group.add_argument("--target", type=_target, action="append", metavar="LABEL=COUNT",
                       help="explicit target count (repeatable)")
    group.add_argument("--naug", type=int, help="fixed number of variants per minority record")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--ops", type=_ops, default=ALL_OPS, help="comma list, default SR,RI,RS,RD")
    p.add_argument("--dedup", action="store_true", help="drop exact duplicate variants")


def _add_seed(p):
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)


def _add_model_args(p):
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--max-features", type=int, default=None)
    p.add_argument("--scheme", choices=["counts", "tfidf"], default="counts")
    p.add_argument("--bigrams", action="store_true")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rebalance",
                     description="Augment minority classes of labeled text corpora with EDA "
                                 "and measure the effect with a MaxEnt classifier.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None,
                        help="base random seed (default 0, or the experiment config's)")
    parser.add_argument("--deterministic", action="store_true",
                        help="force serial execution with a fixed reduction order")
    parser.add_argument("--format", choices=["text", "json"], default="text",
                        help="format of reports printed to stdout")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("stats", help="per-class corpus statistics")
    _add_corpus_args(p)

    p = sub.add_parser("plan", help="compute a balancing plan as JSON")
    _add_corpus_args(p)
    _add_policy_args(p, allow_plan=False)
    p.add_argument("--out", help="write the plan here instead of stdout")

    p = sub.add_parser("augment", help="augment minority classes and write the corpus")
    _add_corpus_args(p)
    _add_policy_args(p, allow_plan=True)
    p.add_argument("--synonyms", help="synonyms.tsv")
    p.add_argument("--stopwords", help="stopwords.txt")
    p.add_argument("--out", required=True, help="output corpus path")
    p.add_argument("--output-format", choices=["csv", "tsv", "jsonl"], default=None)
    _add_seed(p)

    p = sub.add_parser("train", help="fit a vocabulary and MaxEnt model")
    _add_corpus_args(p)
    _add_model_args(p)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--vocab-out", help="vocabulary JSON path (default <out stem>.vocab.json)")
    _add_seed(p)

    p = sub.add_parser("eval", help="score a trained model on a corpus")
    p.add_argument("model", help="model JSON from `rebalance train`")
    _add_corpus_args(p)
    p.add_argument("--vocab", help="vocabulary JSON (default <model stem>.vocab.json)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--confusion-out", help="write the confusion matrix CSV here")

    p = sub.add_parser("experiment", help="run a baseline vs augmented experiment")
    p.add_argument("config", help="experiment config JSON")
    p.add_argument("--output-dir", help="override the config's output_dir")
    _add_seed(p)
    return parser


def _load(args):
    return load_corpus(args.corpus, args.input_format, args.text_field, args.label_field,
                       args.id_field or None)


def _policy(args) -> BalancePolicy:
    if args.match_majority:
        return BalancePolicy.match_majority()
    if args.target:
        return BalancePolicy.target_counts(dict(args.target))
    return BalancePolicy.fixed_naug(args.naug)


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def _emit(text: str, out=None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _vocab_path(model_path: str) -> str:
    stem, _ = os.path.splitext(model_path)
    return stem + ".vocab.json"


def cmd_stats(args) -> None:
    stats = class_stats(_load(args))
    _emit(stats_to_json(stats) if args.format == "json" else format_stats_table(stats))


def cmd_plan(args) -> None:
    corpus = _load(args)
    plan = plan_balance(class_stats(corpus), _policy(args), EdaParams(args.alpha, args.ops, 1),
                        args.dedup)
    _emit(plan.to_json(), args.out)


def cmd_augment(args) -> None:
    corpus = _load(args)
    if args.plan:
        with open(args.plan, encoding="utf-8") as fh:
            plan = AugmentationPlan.from_dict(json.load(fh))
    else:
        plan = plan_balance(class_stats(corpus), _policy(args),
                            EdaParams(args.alpha, args.ops, 1), args.dedup)
    lex = load_synonyms(args.synonyms) if args.synonyms else EMPTY_LEXICON
    stop = load_stopwords(args.stopwords) if args.stopwords else EMPTY_STOPWORDS
    summary = ExecutionSummary()
    out = execute_plan(corpus, plan, lex, stop, _seed(args), summary)
    save_corpus(out, args.out, args.output_format)
    if args.format == "json":
        print(json.dumps({"out": args.out, "counts": out.label_counts(), **summary.to_dict()},
                         ensure_ascii=False, sort_keys=True))
    else:
        counts = ", ".join(f"{k}={v}" for k, v in out.label_counts().items())
        print(f"wrote {len(out)} records to {args.out} ({counts})")


def cmd_train(args) -> None:
    corpus = _load(args)
    vocab = fit_vocabulary(corpus, VocabConfig(args.min_df, args.max_features, args.scheme,
                                               not args.no_lowercase, args.bigrams))
    config = TrainConfig(args.learning_rate, args.l2, args.max_epochs, args.tol, _seed(args))
    model = train(vectorize_many(corpus.sentences, vocab), corpus.y, config, labels=corpus.labels)
    model.vocab_digest = vocab.digest()
    vocab_out = args.vocab_out or _vocab_path(args.out)
    model.save(args.out)
    vocab.save(vocab_out)
    m = model.metadata
    print(f"trained on {len(corpus)} records, {len(vocab)} features, {m['epochs_run']} epochs, "
          f"final loss {m['final_loss']:.6f}; wrote {args.out} and {vocab_out}")


def cmd_eval(args) -> None:
    model = MaxEntModel.load(args.model)
    vocab = Vocabulary.load(args.vocab or _vocab_path(args.model))
    if model.vocab_digest and model.vocab_digest != vocab.digest():
        raise ValidationError("vocabulary file does not match the model's vocabulary digest")
    corpus = _load(args)
    unknown = [lab for lab in corpus.labels if lab not in model.labels]
    if unknown:
        raise ValidationError(f"corpus labels {unknown} are unknown to the model")
    pred = predict_many(model, vectorize_many(corpus.sentences, vocab))
    report = evaluate(corpus.y, pred, model.labels)
    js = json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)
    if args.out:
        _emit(js, args.out)
    if args.confusion_out:
        with open(args.confusion_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.confusion.to_csv())
    print(js if args.format == "json" else report.format())


def cmd_experiment(args) -> None:
    config = ExperimentConfig.load(args.config)
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.output_dir:
        changes["output_dir"] = args.output_dir
    if args.deterministic:
        changes["n_jobs"] = 1
    if changes:
        config = replace(config, **changes)
    report = run_experiment(config)
    if args.format == "json":
        print(report.to_json())
        return
    s = report.summary
    for arm in ("baseline", "augmented"):
        f = s[arm]
        print(f"{arm:9s}  F1-macro {100 * f['f1_macro']['mean']:.2f} ± {100 * f['f1_macro']['std']:.2f}"
              f"  F1-micro {100 * f['f1_micro']['mean']:.2f} ± {100 * f['f1_micro']['std']:.2f}")
    print(f"leakage audit: {'passed' if report.audit['passed'] else 'FAILED'}")
    if config.output_dir:
        print(f"wrote {os.path.join(config.output_dir, 'report.json')}")


COMMANDS = {"stats": cmd_stats, "plan": cmd_plan, "augment": cmd_augment, "train": cmd_train,
            "eval": cmd_eval, "experiment": cmd_experiment}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        argv = sys.argv[1:] if argv is None else list(argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except (ValidationError, RebalanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
