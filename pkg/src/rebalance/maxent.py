"""Multinomial logistic regression (Maximum Entropy) trained by full-batch GD.

Objective: mean cross-entropy plus ``l2 / 2 * ||W||^2`` (bias unregularized),
starting from all-zero parameters. Each epoch takes one gradient step; a step
that would raise the loss is retried with half the learning rate, up to
``MAX_HALVINGS`` times, so the loss sequence never increases.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_int, check_seed
from .exceptions import TrainingError, ValidationError
from .features import SparseVector, stack_vectors

MAX_HALVINGS = 10


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    l2: float = 1e-4
    max_epochs: int = 200
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (self.l2 >= 0 and math.isfinite(self.l2)):
            raise ValidationError(f"l2 must be non-negative, got {self.l2}")
        check_positive_int(self.max_epochs, "max_epochs", minimum=0)
        if not self.tol > 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        check_seed(self.seed)

    def to_dict(self) -> dict:
        return {"learning_rate": self.learning_rate, "l2": self.l2,
                "max_epochs": self.max_epochs, "tol": self.tol, "seed": self.seed}


def as_matrix(X, dim: Optional[int] = None):
    """Accept a CSR/dense matrix or a list of :class:`SparseVector`."""
    if isinstance(X, (list, tuple)) and (not X or isinstance(X[0], SparseVector)):
        return stack_vectors(X, dim)
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=float)
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D feature matrix, got shape {arr.shape}")
    return arr


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _logits(W, b, X):
    return np.asarray(X @ W.T) + b


def loss_and_grad(W: np.ndarray, b: np.ndarray, X, y: np.ndarray, l2: float):
    """Regularized mean cross-entropy and its gradient w.r.t. ``W`` and ``b``.

    ``y`` holds integer class indices.
    """
    n = X.shape[0]
    logits = _logits(W, b, X)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_p = shifted[np.arange(n), y] - log_norm
    loss = -log_p.mean() + 0.5 * l2 * float(np.sum(W * W))
    resid = np.exp(shifted - log_norm[:, None])
    resid[np.arange(n), y] -= 1.0
    resid /= n
    gW = np.asarray(X.T @ resid).T + l2 * W
    gb = resid.sum(axis=0)
    return float(loss), gW, gb


def mean_log_loss(W, b, X, y) -> float:
    return loss_and_grad(W, b, X, y, 0.0)[0]


@dataclass
class MaxEntModel:
    weights: np.ndarray
    bias: np.ndarray
    labels: tuple[str, ...]
    metadata: dict = field(default_factory=dict)
    vocab_digest: Optional[str] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        # numpy scalars (e.g. int64 labels) are not JSON serializable
        self.labels = tuple(v.item() if isinstance(v, np.generic) else v for v in self.labels)
        k = len(self.labels)
        if k < 2:
            raise ValidationError("a MaxEnt model needs at least two labels")
        if self.weights.ndim != 2 or self.weights.shape[0] != k or self.bias.shape != (k,):
            raise ValidationError(f"parameter shapes {self.weights.shape}/{self.bias.shape} "
                                  f"do not match {k} labels")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValidationError("model parameters must be finite")

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.labels, ensure_ascii=False).encode("utf-8"))
        h.update(np.ascontiguousarray(self.weights).tobytes())
        h.update(np.ascontiguousarray(self.bias).tobytes())
        return h.hexdigest()

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "vocab_digest": self.vocab_digest,
                "weights": self.weights.tolist(), "bias": self.bias.tolist(),
                "metadata": self.metadata}

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "MaxEntModel":
        return cls(np.array(d["weights"], dtype=float), np.array(d["bias"], dtype=float),
                   tuple(d["labels"]), d.get("metadata", {}), d.get("vocab_digest"))

    @classmethod
    def load(cls, path) -> "MaxEntModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _encode(y: Sequence, labels: Optional[Sequence[str]]):
    y = list(y)
    if labels is None:
        labels = sorted(set(y), key=str)
    labels = tuple(labels)
    pos = {lab: i for i, lab in enumerate(labels)}
    try:
        codes = np.array([pos[v] for v in y], dtype=np.int64)
    except KeyError as exc:
        raise ValidationError(f"label {exc.args[0]!r} not in inventory {labels}") from None
    return codes, labels


def train(X, y: Sequence, config: TrainConfig = TrainConfig(),
          labels: Optional[Sequence[str]] = None, eval_set=None) -> MaxEntModel:
    """Fit a MaxEnt model.

    ``labels`` fixes the class order (default: sorted unique ``y``).
    ``eval_set=(X_dev, y_dev)`` keeps the parameters of the epoch with the
    lowest development log-loss.
    """
    X = as_matrix(X)
    n, v = X.shape
    if n == 0 or n != len(y):
        raise ValidationError(f"need matching non-empty X and y, got {n} rows and {len(y)} labels")
    codes, labels = _encode(y, labels)
    if len(np.unique(codes)) < 2:
        raise TrainingError("training data holds a single class; need at least two")
    data = X.data if sp.issparse(X) else X
    if not np.isfinite(data).all():
        raise TrainingError("feature matrix contains non-finite values")

    k = len(labels)
    W, b = np.zeros((k, v)), np.zeros(k)
    loss, gW, gb = loss_and_grad(W, b, X, codes, config.l2)
    history = [loss]
    lr = config.learning_rate
    halvings = 0
    stop_reason = "max_epochs"

    dev = None
    if eval_set is not None:
        Xd = as_matrix(eval_set[0], v)
        yd, _ = _encode(eval_set[1], labels)
        dev = (Xd, yd)
        best = (mean_log_loss(W, b, Xd, yd), 0, W, b)

    epochs = 0
    for epoch in range(1, config.max_epochs + 1):
        for attempt in range(MAX_HALVINGS + 1):
            W_new, b_new = W - lr * gW, b - lr * gb
            new_loss, new_gW, new_gb = loss_and_grad(W_new, b_new, X, codes, config.l2)
            if math.isfinite(new_loss) and new_loss <= loss:
                break
            if attempt == MAX_HALVINGS:
                break
            lr *= 0.5
            halvings += 1
        if not math.isfinite(new_loss):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        if new_loss > loss:
            stop_reason = "no_descent"
            break
        rel = (loss - new_loss) / max(abs(loss), 1e-300)
        W, b, gW, gb, loss = W_new, b_new, new_gW, new_gb, new_loss
        history.append(loss)
        epochs = epoch
        if dev is not None:
            d = mean_log_loss(W, b, *dev)
            if d < best[0]:
                best = (d, epoch, W, b)
        if rel < config.tol:
            stop_reason = "tol"
            break

    meta = {"epochs_run": epochs, "final_loss": loss, "loss_history": history,
            "final_learning_rate": lr, "halvings": halvings, "stop_reason": stop_reason,
            "config": config.to_dict(), "n_samples": n}
    if dev is not None:
        _, best_epoch, W, b = best
        meta["best_epoch"] = best_epoch
        meta["best_dev_loss"] = best[0]
    return MaxEntModel(W, b, labels, meta)


def _row(model: MaxEntModel, x) -> np.ndarray:
    if isinstance(x, SparseVector):
        if x.dim != model.n_features:
            raise ValidationError(f"vector dimension {x.dim} != model dimension {model.n_features}")
        return model.bias + model.weights[:, list(x.indices)] @ np.asarray(x.values, dtype=float)
    arr = np.asarray(x.toarray() if sp.issparse(x) else x, dtype=float).ravel()
    if arr.shape[0] != model.n_features:
        raise ValidationError(f"vector dimension {arr.shape[0]} != model dimension {model.n_features}")
    return model.weights @ arr + model.bias


def predict_proba(model: MaxEntModel, x) -> np.ndarray:
    return softmax(_row(model, x))


def predict(model: MaxEntModel, x) -> str:
    # np.argmax returns the first maximum, i.e. the lowest label index on ties
    return model.labels[int(np.argmax(predict_proba(model, x)))]


def predict_proba_many(model: MaxEntModel, X) -> np.ndarray:
    X = as_matrix(X, model.n_features)
    if X.shape[1] != model.n_features:
        raise ValidationError(f"matrix has {X.shape[1]} columns, model expects {model.n_features}")
    return softmax(_logits(model.weights, model.bias, X))


def predict_many(model: MaxEntModel, X) -> list[str]:
    return [model.labels[i] for i in np.argmax(predict_proba_many(model, X), axis=1)]


class MaxEntClassifier(ClassifierMixin, BaseEstimator):
    """scikit-learn compatible wrapper around :func:`train`."""

    def __init__(self, learning_rate=0.1, l2=1e-4, max_epochs=200, tol=1e-6, random_state=0):
        self.learning_rate = learning_rate
        self.l2 = l2
        self.max_epochs = max_epochs
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y, labels=None, eval_set=None):
        config = TrainConfig(self.learning_rate, self.l2, self.max_epochs, self.tol,
                             self.random_state)
        self.model_ = train(X, y, config, labels=labels, eval_set=eval_set)
        self.classes_ = np.asarray(self.model_.labels, dtype=object)
        self.n_features_in_ = self.model_.n_features
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        return predict_proba_many(self.model_, X)

    def predict(self, X):
        check_is_fitted(self, "model_")
        return np.asarray(predict_many(self.model_, X), dtype=object)

    @property
    def loss_history_(self) -> list[float]:
        check_is_fitted(self, "model_")
        return self.model_.metadata["loss_history"]
