"""Multinomial logistic regression from scratch, plus the metrics suite.

Training minimizes class-weighted softmax cross-entropy with an L2 penalty
on the weights (bias unregularized) by deterministic mini-batch gradient
descent.  The analytic gradient is exposed separately so the test suite can
check it against central finite differences.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from .corpus import LABELS

__all__ = [
    "LogRegHyper",
    "LogRegModel",
    "TrainReport",
    "Metrics",
    "softmax",
    "train",
    "predict_proba",
    "predict",
    "loss",
    "gradient",
    "evaluate",
    "compute_metrics",
    "report_row",
    "save_model",
    "load_model",
    "grid_search",
]

LABEL_TO_INDEX = {label: i for i, label in enumerate(LABELS)}


@dataclass(frozen=True)
class LogRegHyper:
    """Hyperparameters; defaults fit desk-scale corpora."""

    l2: float = 1e-4
    class_weights: tuple = (1.0, 1.0, 1.0)
    max_iter: int = 5000
    learning_rate: float = 0.1
    batch_size: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.class_weights) != len(LABELS):
            raise ValueError("class_weights must have one entry per class")
        if self.l2 < 0 or self.learning_rate <= 0 or self.batch_size < 1 or self.max_iter < 0:
            raise ValueError("invalid hyperparameters")


@dataclass
class LogRegModel:
    """Weights (3×D), bias (3,), in fixed class order (hate, abusive, neither)."""

    W: np.ndarray
    b: np.ndarray
    hyper: LogRegHyper = field(default_factory=LogRegHyper)
    vocab_meta: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.W.shape[1]

    def __post_init__(self) -> None:
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.shape[0] != len(LABELS) or self.b.shape != (len(LABELS),):
            raise ValueError("model must carry one row/bias per class")
        if not (np.isfinite(self.W).all() and np.isfinite(self.b).all()):
            raise ValueError("model weights must be finite")


@dataclass(frozen=True)
class TrainReport:
    losses: tuple
    converged: bool
    epochs_run: int
    seconds: float


@dataclass(frozen=True)
class Metrics:
    confusion: np.ndarray  # rows = actual, cols = predicted
    precision: tuple
    recall: tuple
    f1: tuple
    macro_f1: float
    accuracy: float
    excluded: tuple  # classes with zero support and zero predictions

    def __post_init__(self) -> None:
        object.__setattr__(self, "confusion", np.asarray(self.confusion, dtype=np.int64))


def softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _as_matrix(X):
    if sparse.issparse(X):
        return X.tocsr()
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(1, -1) if X.ndim == 1 else X


def _labels_to_indices(y) -> np.ndarray:
    if len(y) and isinstance(y[0], str):
        return np.asarray([LABEL_TO_INDEX[label] for label in y], dtype=np.int64)
    return np.asarray(y, dtype=np.int64)


def predict_proba(model: LogRegModel, x) -> np.ndarray:
    """softmax(Wx + b); rows sum to 1."""
    X = _as_matrix(x)
    if X.shape[1] != model.n_features:
        raise ValueError(f"feature dim {X.shape[1]} != model dim {model.n_features}")
    logits = X @ model.W.T + model.b
    if sparse.issparse(logits):
        logits = np.asarray(logits)
    probs = softmax(logits)
    return probs[0] if not sparse.issparse(x) and np.asarray(x).ndim == 1 else probs


def predict(model: LogRegModel, x) -> np.ndarray:
    """argmax class indices; ties resolve to the more severe (lower) class."""
    probs = np.atleast_2d(predict_proba(model, x))
    return probs.argmax(axis=1)


def loss(model: LogRegModel, X, y) -> float:
    """Class-weighted mean cross-entropy + (λ/2)‖W‖² (bias unregularized)."""
    X = _as_matrix(X)
    y_idx = _labels_to_indices(y)
    with np.errstate(over="ignore"):
        probs = softmax(np.asarray(X @ model.W.T) + model.b)
        w = np.asarray(model.hyper.class_weights, dtype=np.float64)[y_idx]
        nll = -np.log(np.clip(probs[np.arange(len(y_idx)), y_idx], 1e-300, None))
        data_term = float((w * nll).mean())
        reg_term = 0.5 * model.hyper.l2 * float((model.W * model.W).sum())
        return data_term + reg_term


def gradient(model: LogRegModel, X, y):
    """Analytic (dW, db) of the weighted, regularized loss over the batch."""
    X = _as_matrix(X)
    y_idx = _labels_to_indices(y)
    n = X.shape[0]
    if n == 0:
        raise ValueError("gradient requires a non-empty batch")
    probs = softmax(np.asarray(X @ model.W.T) + model.b)
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), y_idx] = 1.0
    w = np.asarray(model.hyper.class_weights, dtype=np.float64)[y_idx]
    delta = (probs - onehot) * w[:, None] / n  # (n, 3)
    dW = np.asarray(delta.T @ X) + model.hyper.l2 * model.W
    db = delta.sum(axis=0)
    return dW, db


def train(X, y, hyper: LogRegHyper = None, vocab_meta: dict = None):
    """Deterministic mini-batch gradient descent.

    Stops at max_iter epochs or when |Δ full-data loss| < 1e-6 for five
    consecutive epochs.  Raises on non-finite loss (learning rate too high).
    """
    hyper = hyper or LogRegHyper()
    X = _as_matrix(X)
    y_idx = _labels_to_indices(y)
    if X.shape[0] != len(y_idx) or X.shape[0] == 0:
        raise ValueError("X and y must be non-empty and matched")

    model = LogRegModel(
        W=np.zeros((len(LABELS), X.shape[1])),
        b=np.zeros(len(LABELS)),
        hyper=hyper,
        vocab_meta=vocab_meta or {},
    )

    rng = np.random.default_rng(hyper.seed)
    start = time.perf_counter()
    losses = []
    still = 0
    converged = False
    epochs_run = 0

    for _ in range(hyper.max_iter):
        order = rng.permutation(X.shape[0])
        for lo in range(0, len(order), hyper.batch_size):
            batch = order[lo : lo + hyper.batch_size]
            dW, db = gradient(model, X[batch], y_idx[batch])
            model.W -= hyper.learning_rate * dW
            model.b -= hyper.learning_rate * db
        epochs_run += 1
        epoch_loss = loss(model, X, y_idx)
        if not np.isfinite(epoch_loss):
            raise FloatingPointError("non-finite loss: learning rate too high")
        losses.append(epoch_loss)
        if len(losses) >= 2 and abs(losses[-1] - losses[-2]) < 1e-6:
            still += 1
            if still >= 5:
                converged = True
                break
        else:
            still = 0

    report = TrainReport(
        losses=tuple(losses),
        converged=converged,
        epochs_run=epochs_run,
        seconds=time.perf_counter() - start,
    )
    return model, report


# --- metrics ---------------------------------------------------------------------

def compute_metrics(y_true, y_pred) -> Metrics:
    """Confusion-matrix metrics; F1 of an absent-and-never-predicted class is 0."""
    t = _labels_to_indices(list(y_true))
    p = _labels_to_indices(list(y_pred))
    if len(t) == 0:
        raise ValueError("metrics require a non-empty evaluation set")
    k = len(LABELS)
    confusion = np.zeros((k, k), dtype=np.int64)
    for a, b in zip(t, p):
        confusion[a, b] += 1

    precision, recall, f1, excluded = [], [], [], []
    for c in range(k):
        tp = confusion[c, c]
        predicted = confusion[:, c].sum()
        actual = confusion[c, :].sum()
        prec = tp / predicted if predicted else 0.0
        rec = tp / actual if actual else 0.0
        denom = prec + rec
        f1c = 2 * prec * rec / denom if denom else 0.0
        precision.append(float(prec))
        recall.append(float(rec))
        f1.append(float(f1c))
        excluded.append(predicted == 0 and actual == 0)

    return Metrics(
        confusion=confusion,
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        macro_f1=float(np.mean(f1)),
        accuracy=float(np.trace(confusion) / confusion.sum()),
        excluded=tuple(bool(e) for e in excluded),
    )


def evaluate(model: LogRegModel, X, y) -> Metrics:
    return compute_metrics(_labels_to_indices(y), predict(model, X))


def report_row(metrics: Metrics) -> dict:
    """One evaluation-table row: per-class F1 plus accuracy."""
    by_label = dict(zip(LABELS, metrics.f1))
    return {
        "f1_neither": round(by_label["neither"], 4),
        "f1_hate": round(by_label["hate"], 4),
        "f1_abuse": round(by_label["abusive"], 4),
        "accuracy": round(metrics.accuracy, 4),
    }


# --- serialization ------------------------------------------------------------------

_FORMAT_VERSION = 1


def save_model(model: LogRegModel, path) -> None:
    """Versioned text format; floats via repr() so round-trip is exact."""
    header = {
        "format_version": _FORMAT_VERSION,
        "classes": list(LABELS),
        "n_features": model.n_features,
        "hyper": {
            "l2": model.hyper.l2,
            "class_weights": list(model.hyper.class_weights),
            "max_iter": model.hyper.max_iter,
            "learning_rate": model.hyper.learning_rate,
            "batch_size": model.hyper.batch_size,
            "seed": model.hyper.seed,
        },
        "vocab_meta": model.vocab_meta,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header) + "\n")
        for row in model.W:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        fh.write(" ".join(repr(float(v)) for v in model.b) + "\n")


def load_model(path) -> LogRegModel:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format_version") != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported model format")
        if header.get("classes") != list(LABELS):
            raise ValueError(f"{path}: class order mismatch")
        rows = [np.array([float(v) for v in fh.readline().split()]) for _ in LABELS]
        b = np.array([float(v) for v in fh.readline().split()])
    h = header["hyper"]
    hyper = LogRegHyper(
        l2=h["l2"],
        class_weights=tuple(h["class_weights"]),
        max_iter=h["max_iter"],
        learning_rate=h["learning_rate"],
        batch_size=h["batch_size"],
        seed=h["seed"],
    )
    model = LogRegModel(W=np.vstack(rows), b=b, hyper=hyper, vocab_meta=header.get("vocab_meta", {}))
    if model.n_features != header["n_features"]:
        raise ValueError(f"{path}: feature dim mismatch")
    return model


# --- grid search ------------------------------------------------------------------------

def grid_search(X, y, grid: Sequence[LogRegHyper], k: int = 5, seed: int = 0):
    """k-fold cross-validated macro-F1 over a hyperparameter grid.

    Returns (best hyper, table) where table rows are
    (hyper, mean macro-F1, per-fold scores); deterministic given seed.
    """
    X = _as_matrix(X)
    y_idx = _labels_to_indices(y)
    n = X.shape[0]
    if n < k:
        raise ValueError(f"need at least k={k} samples")

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    folds = np.array_split(order, k)

    table = []
    for hyper in grid:
        scores = []
        for i in range(k):
            val_idx = folds[i]
            train_idx = np.concatenate([folds[j] for j in range(k) if j != i])
            model, _ = train(X[train_idx], y_idx[train_idx], hyper)
            scores.append(evaluate(model, X[val_idx], y_idx[val_idx]).macro_f1)
        table.append((hyper, float(np.mean(scores)), tuple(scores)))

    best = max(table, key=lambda row: row[1])
    return best[0], table
