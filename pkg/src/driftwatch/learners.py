"""Online linear classifiers trained by SGD: logistic regression and linear SVM.

Training shuffles each epoch with the package RNG, so models are bit-for-bit
reproducible given (samples, hyperparameters, seed). ``update`` continues
training on a copy and never touches the input model. The last 20% of each
window's samples are held out to score the model for ensemble weighting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .features import DEFAULT_DIM, SparseVector
from .rng import Xoshiro256StarStar, derive_seed

KINDS = ("logreg", "svm")


@dataclass(frozen=True)
class Hyper:
    lr: float = 0.1
    l2: float = 1e-4
    epochs: int = 5
    update_lr: float = 0.05
    update_epochs: int = 2
    seed: int = 0


@dataclass
class LabeledSample:
    features: SparseVector
    label: int
    timestamp: int
    post_id: str


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "Metrics":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (2.0 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        return cls(precision, recall, f1, tp, fp, fn, tn)


@dataclass
class LinearModel:
    kind: str
    dim: int
    weights: np.ndarray
    bias: float
    hyper: Hyper
    trained_window: int
    val_history: list[tuple[int, float]] = field(default_factory=list)


class Prediction(NamedTuple):
    label: int
    score: float
    margin: float


class _Prepared(NamedTuple):
    """Per-sample arrays extracted once so many models can share one window."""

    indices: list
    values: list
    targets: list  # +1.0 / -1.0


def prepare(samples: list[LabeledSample]) -> _Prepared:
    return _Prepared(
        [s.features.indices for s in samples],
        [s.features.values for s in samples],
        [1.0 if s.label else -1.0 for s in samples],
    )


def _fit(w: np.ndarray, bias: float, prepared: _Prepared, rng, lr: float,
         l2: float, epochs: int, kind: str) -> float:
    """Run SGD in place on w; returns the final bias.

    L2 decay uses a deferred weight scale so each step costs O(nnz); the scale
    is folded back into w before returning, keeping margins a plain dot
    product for bit-exact persistence.
    """
    idxs, vals, ys = prepared
    n = len(ys)
    order = list(range(n))
    scale = 1.0
    decay = 1.0 - lr * l2
    is_logreg = kind == "logreg"
    b = bias
    for _ in range(epochs):
        rng.shuffle(order)
        for i in order:
            xi = idxs[i]
            xv = vals[i]
            y = ys[i]
            m = scale * float(w[xi] @ xv) + b
            scale *= decay
            if is_logreg:
                z = y * m
                if z < 35.0:  # beyond this the gradient underflows anyway
                    g = lr * (y / (1.0 + math.exp(z)))
                    w[xi] += (g / scale) * xv
                    b += g
            else:
                if y * m < 1.0:
                    g = lr * y
                    w[xi] += (g / scale) * xv
                    b += g
    if scale != 1.0:
        w *= scale
    return b


def holdout_split(samples: list[LabeledSample]):
    """Last 20% held out for validation; small sets keep everything for both."""
    n_hold = len(samples) // 5
    if n_hold == 0:
        return samples, samples
    return samples[:-n_hold], samples[-n_hold:]


def train(samples: list[LabeledSample], kind: str, hyper: Hyper = Hyper(),
          dim: int = DEFAULT_DIM, window: int = 0) -> LinearModel:
    """Train a fresh model of the given kind on one window's samples."""
    if kind not in KINDS:
        raise ValueError(f"unknown learner kind: {kind}")
    labels = {s.label for s in samples}
    if labels != {0, 1}:
        raise ValueError("training data must contain both classes")
    fit_part, hold_part = holdout_split(samples)
    w = np.zeros(dim, dtype=np.float64)
    rng = Xoshiro256StarStar(hyper.seed)
    bias = _fit(w, 0.0, prepare(fit_part), rng, hyper.lr, hyper.l2,
                hyper.epochs, kind)
    model = LinearModel(kind, dim, w, bias, hyper, window, [])
    model.val_history.append((window, evaluate(model, hold_part).f1))
    return model


def update(model: LinearModel, samples: list[LabeledSample],
           window: int) -> LinearModel:
    """Continue training on a copy; the input model is never modified.

    Empty sample lists advance the window and carry the last validation score
    forward unchanged.
    """
    w = model.weights.copy()
    hyper = model.hyper
    history = list(model.val_history)
    if not samples:
        last_f = history[-1][1] if history else 0.0
        new = LinearModel(model.kind, model.dim, w, model.bias, hyper, window,
                          history)
        new.val_history.append((window, last_f))
        return new
    fit_part, hold_part = holdout_split(samples)
    rng = Xoshiro256StarStar(derive_seed(hyper.seed, window))
    bias = _fit(w, model.bias, prepare(fit_part), rng, hyper.update_lr,
                hyper.l2, hyper.update_epochs, model.kind)
    new = LinearModel(model.kind, model.dim, w, bias, hyper, window, history)
    new.val_history.append((window, evaluate(new, hold_part).f1))
    return new


def update_with_prepared(model: LinearModel, prepared: _Prepared,
                         hold_part: list[LabeledSample],
                         window: int) -> LinearModel:
    """update() variant for the pipeline's bulk copy-update, where one
    window's prepared arrays are shared across every stored model."""
    w = model.weights.copy()
    hyper = model.hyper
    rng = Xoshiro256StarStar(derive_seed(hyper.seed, window))
    bias = _fit(w, model.bias, prepared, rng, hyper.update_lr, hyper.l2,
                hyper.update_epochs, model.kind)
    new = LinearModel(model.kind, model.dim, w, bias, hyper, window,
                      list(model.val_history))
    new.val_history.append((window, evaluate(new, hold_part).f1))
    return new


def _sigmoid(m: float) -> float:
    if m >= 0.0:
        return 1.0 / (1.0 + math.exp(-m))
    e = math.exp(m)
    return e / (1.0 + e)


def predict(model: LinearModel, x: SparseVector) -> Prediction:
    """Label, confidence score in [0, 1], and raw margin for one vector."""
    m = float(model.weights[x.indices] @ x.values) + model.bias
    if model.kind == "logreg":
        score = _sigmoid(m)
    else:
        score = min(max((m + 1.0) / 2.0, 0.0), 1.0)
    return Prediction(1 if score >= 0.5 else 0, score, m)


def evaluate(model: LinearModel, samples: list[LabeledSample]) -> Metrics:
    tp = fp = fn = tn = 0
    w = model.weights
    bias = model.bias
    for s in samples:
        f = s.features
        m = float(w[f.indices] @ f.values) + bias
        # label = [score >= 0.5] reduces to margin >= 0 for both kinds
        pred = 1 if m >= 0.0 else 0
        if s.label == 1:
            if pred == 1:
                tp += 1
            else:
                fn += 1
        else:
            if pred == 1:
                fp += 1
            else:
                tn += 1
    return Metrics.from_counts(tp, fp, fn, tn)


def clone_hyper(hyper: Hyper, seed: int) -> Hyper:
    return replace(hyper, seed=seed)
