"""Minority-class augmentation for imbalanced text corpora.

EDA operations (synonym replacement, random insertion, random swap, random
deletion), balancing plans, a Maximum Entropy classifier and F1-based
baseline-versus-augmented experiments.
"""
__version__ = "0.1.0"

from .balance import AugmentationPlan, BalancePolicy, EdaResampler, execute_plan, plan_balance, rebalance
from .corpus import LabeledCorpus, Record, class_stats, kfold_splits, load_corpus, save_corpus
from .eda import (EdaAugmenter, EdaParams, augment_sentence, derive_rng, num_edits, random_deletion,
                  random_insertion, random_swap, synonym_replacement)
from .exceptions import ParseError, PlanError, RebalanceError, TextDecodeError, TrainingError, ValidationError
from .features import BowVectorizer, SparseVector, VocabConfig, Vocabulary, fit_vocabulary, vectorize
from .lexicon import StopwordSet, SynonymLexicon, load_stopwords, load_synonyms, synonyms_of
from .maxent import MaxEntClassifier, MaxEntModel, TrainConfig, predict, predict_proba, train
from .metrics import ConfusionMatrix, EvalReport, confusion_matrix, evaluate, f1_macro, f1_micro, per_class_prf
from .pipeline import ExperimentConfig, run_crossval, run_experiment, run_holdout
from .text import NormalizationConfig, TokenizedSentence, detokenize, tokenize
