"""Trainable local workload: multinomial logistic regression on Gaussian blobs.

The learning problem is a desk-scale stand-in for an image-classification
CNN: real gradients, real convergence, no heavyweight dependencies.  The
byte size of a transmitted update assumes 32-bit little-endian
serialization of weights then bias, so payload accounting is
host-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .errors import EmptyClientData

FLOAT32_BYTES = 4


@dataclass(frozen=True)
class ModelParams:
    weights: np.ndarray  # [num_classes, num_features]
    bias: np.ndarray  # [num_classes]

    def __post_init__(self):
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("model parameters must be finite")

    @classmethod
    def zeros(cls, num_classes: int, num_features: int) -> "ModelParams":
        return cls(np.zeros((num_classes, num_features)), np.zeros(num_classes))


@dataclass(frozen=True)
class SyntheticDataset:
    features: np.ndarray  # [n, num_features]
    labels: np.ndarray  # [n]
    num_classes: int

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray) -> "SyntheticDataset":
        return SyntheticDataset(self.features[indices], self.labels[indices], self.num_classes)


@dataclass(frozen=True)
class TrainConfig:
    local_epochs: int = 10
    batch_size: int = 600
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be >= 0")
        if self.local_epochs < 0:
            raise ValueError("local_epochs must be >= 0")


def make_blobs(
    num_classes: int = 10,
    num_features: int = 90,
    samples_per_class: int = 6000,
    separation: float = 5.0,
    seed: int = 0,
) -> SyntheticDataset:
    """Unit-variance Gaussian blobs with minimum class-mean separation.

    Means are drawn isotropically and rescaled so the minimum pairwise
    distance equals `separation`; labels are the block-ordered class ids.
    """
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(num_classes, num_features))
    if num_classes > 1:
        dists = np.linalg.norm(means[:, None, :] - means[None, :, :], axis=-1)
        min_dist = dists[~np.eye(num_classes, dtype=bool)].min()
        means *= separation / min_dist
    features = np.concatenate(
        [means[c] + rng.normal(size=(samples_per_class, num_features)) for c in range(num_classes)]
    )
    labels = np.repeat(np.arange(num_classes, dtype=np.int64), samples_per_class)
    return SyntheticDataset(features, labels, num_classes)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def loss_and_grad(params: ModelParams, features: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy and its analytic gradient."""
    n = features.shape[0]
    probs = softmax(features @ params.weights.T + params.bias)
    loss = -np.mean(np.log(probs[np.arange(n), labels] + 1e-300))
    probs[np.arange(n), labels] -= 1.0
    grad_w = probs.T @ features / n
    grad_b = probs.mean(axis=0)
    return loss, grad_w, grad_b


def steps_per_round(n: int, cfg: TrainConfig) -> int:
    return cfg.local_epochs * ceil(n / cfg.batch_size)


def local_train(params: ModelParams, data: SyntheticDataset, cfg: TrainConfig):
    """Mini-batch SGD; returns (updated params, steps taken).

    Shuffling comes solely from `cfg.seed`, so fixed seeds give
    bit-identical trained parameters.
    """
    if data.num_samples == 0:
        raise EmptyClientData("cannot train on empty client data")
    rng = np.random.default_rng(cfg.seed)
    weights = params.weights.copy()
    bias = params.bias.copy()
    n = data.num_samples
    steps = 0
    for _ in range(cfg.local_epochs):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            batch = order[lo : lo + cfg.batch_size]
            _, grad_w, grad_b = loss_and_grad(
                ModelParams(weights, bias), data.features[batch], data.labels[batch]
            )
            weights -= cfg.learning_rate * grad_w
            bias -= cfg.learning_rate * grad_b
            steps += 1
    return ModelParams(weights, bias), steps


def evaluate(params: ModelParams, data: SyntheticDataset) -> float:
    """Fraction of argmax-correct predictions."""
    if data.num_samples == 0:
        raise EmptyClientData("cannot evaluate on empty client data")
    predictions = np.argmax(data.features @ params.weights.T + params.bias, axis=1)
    return float(np.mean(predictions == data.labels))


def update_payload_bytes(params: ModelParams) -> int:
    """Bytes of one transmitted update under 32-bit serialization."""
    return (params.weights.size + params.bias.size) * FLOAT32_BYTES
