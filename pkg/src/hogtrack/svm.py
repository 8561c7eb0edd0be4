"""Soft-margin linear SVM trained by stochastic subgradient descent.

Minimizes lam/2 * |w|^2 + mean hinge loss with the classic 1/(lam*t) step
schedule. The bias rides along as an always-1 feature component and is
regularized with the rest. Training keeps a checkpoint after every epoch
(plus the zero model) and returns the one with the lowest full objective,
which makes the optimizer's result testable despite its stochastic path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from .errors import ConfigError, DataError, FormatError, ShapeError

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LabeledSample:
    features: np.ndarray
    label: int  # +1 or -1

    def __post_init__(self):
        if self.label not in (1, -1):
            raise DataError(f"label must be +1 or -1, got {self.label}")


@dataclass(frozen=True)
class TrainParams:
    lam: float = 1e-4
    epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("lam must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")


@dataclass(frozen=True)
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    threshold: float
    dim: int
    trained_on: int
    lam: float
    seed: int

    def __post_init__(self):
        if self.weights.shape != (self.dim,):
            raise ShapeError(f"weights length {self.weights.shape} != dim {self.dim}")
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)
                and np.isfinite(self.threshold)):
            raise DataError("model weights, bias, and threshold must be finite")

    def with_threshold(self, threshold: float) -> "LinearSvmModel":
        return LinearSvmModel(self.weights, self.bias, float(threshold),
                              self.dim, self.trained_on, self.lam, self.seed)


def _stack_samples(samples: Sequence[LabeledSample]):
    if not samples:
        raise DataError("training requires at least one sample")
    dim = samples[0].features.shape
    if len(dim) != 1:
        raise ShapeError("sample features must be 1-D vectors")
    for s in samples:
        if s.features.shape != dim:
            raise ShapeError(f"inconsistent feature lengths: {s.features.shape} vs {dim}")
    x = np.stack([np.asarray(s.features, dtype=np.float64) for s in samples])
    y = np.array([float(s.label) for s in samples])
    return x, y


def _objective_aug(w_aug: np.ndarray, x_aug: np.ndarray, y: np.ndarray, lam: float) -> float:
    margins = y * (x_aug @ w_aug)
    hinge = np.maximum(0.0, 1.0 - margins).mean()
    return 0.5 * lam * float(np.dot(w_aug, w_aug)) + float(hinge)


def objective(model: LinearSvmModel, samples: Sequence[LabeledSample]) -> float:
    """Full regularized hinge objective of a model on a sample set."""
    x, y = _stack_samples(samples)
    w_aug = np.concatenate([model.weights, [model.bias]])
    x_aug = np.hstack([x, np.ones((len(x), 1))])
    return _objective_aug(w_aug, x_aug, y, model.lam)


def train(samples: Sequence[LabeledSample], params: TrainParams = TrainParams()) -> LinearSvmModel:
    """Train on +1/-1 labeled feature vectors.

    Requires at least one sample of each class. Deterministic: the epoch
    shuffles come from a generator seeded with params.seed, so identical
    inputs yield bitwise-identical models.
    """
    x, y = _stack_samples(samples)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DataError("training requires at least one sample of each class")
    n, d = x.shape
    x_aug = np.hstack([x, np.ones((n, 1))])

    rng = np.random.default_rng(params.seed)
    w = np.zeros(d + 1)
    best_w = w.copy()
    best_obj = _objective_aug(w, x_aug, y, params.lam)  # zero model: exactly 1.0
    radius = 1.0 / np.sqrt(params.lam)

    t = 0
    for _ in range(params.epochs):
        for i in rng.permutation(n):
            t += 1
            hinge_active = y[i] * np.dot(w, x_aug[i]) < 1.0
            w *= 1.0 - 1.0 / t  # equals 1 - eta*lam with eta = 1/(lam*t)
            if hinge_active:
                w += (y[i] / (params.lam * t)) * x_aug[i]
            # projection onto the 1/sqrt(lam) ball; tames the early huge steps
            norm = np.sqrt(np.dot(w, w))
            if norm > radius:
                w *= radius / norm
        obj = _objective_aug(w, x_aug, y, params.lam)
        if obj < best_obj:
            best_obj = obj
            best_w = w.copy()

    return LinearSvmModel(weights=best_w[:d].copy(), bias=float(best_w[d]),
                          threshold=0.0, dim=d, trained_on=n,
                          lam=params.lam, seed=params.seed)


def score(model: LinearSvmModel, features: np.ndarray) -> float:
    """Raw margin w . x + b (not a probability)."""
    f = np.asarray(features, dtype=np.float64)
    if f.shape != (model.dim,):
        raise ShapeError(f"feature length {f.shape} != model dim {model.dim}")
    return float(np.dot(model.weights, f) + model.bias)


def classify(model: LinearSvmModel, features: np.ndarray) -> bool:
    """True iff the raw score strictly exceeds the model threshold."""
    return score(model, features) > model.threshold


def training_accuracy(model: LinearSvmModel, samples: Sequence[LabeledSample]) -> float:
    if not samples:
        raise DataError("accuracy is undefined on an empty sample list")
    hits = sum(1 for s in samples if classify(model, s.features) == (s.label == 1))
    return hits / len(samples)


def save_model(model: LinearSvmModel, path) -> None:
    """Versioned JSON document; floats use shortest round-trip decimals."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "dim": model.dim,
        "lambda": model.lam,
        "seed": model.seed,
        "threshold": model.threshold,
        "bias": model.bias,
        "weights": [float(v) for v in model.weights],
    }
    Path(path).write_text(json.dumps(doc, allow_nan=False) + "\n")


def load_model(path) -> LinearSvmModel:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"model file is not valid JSON: {e.msg}", offset=e.pos) from e
    if not isinstance(doc, dict):
        raise FormatError("model file must contain a JSON object")
    for key in ("format_version", "dim", "lambda", "seed", "threshold", "bias", "weights"):
        if key not in doc:
            raise FormatError(f"model file is missing field '{key}'")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise FormatError(f"unknown model format_version {doc['format_version']!r}")
    weights = np.asarray(doc["weights"], dtype=np.float64)
    if weights.shape != (doc["dim"],):
        raise FormatError(f"weights length {weights.size} != dim {doc['dim']}")
    return LinearSvmModel(weights=weights, bias=float(doc["bias"]),
                          threshold=float(doc["threshold"]), dim=int(doc["dim"]),
                          trained_on=0, lam=float(doc["lambda"]), seed=int(doc["seed"]))
