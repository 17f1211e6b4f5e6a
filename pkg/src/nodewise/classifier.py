"""Softmax regression head trained by full-batch gradient descent."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class LinearModel:
    weight: np.ndarray
    bias: np.ndarray
    hyper: dict = field(default_factory=dict)
    best_epoch: int | None = None
    losses: list[float] = field(default_factory=list, repr=False)

    @property
    def num_classes(self) -> int:
        return int(self.bias.shape[0])

    def scores(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.ndim != 2 or z.shape[1] != self.weight.shape[0]:
            raise ValueError(f"embedding width {z.shape[-1]} does not match model width {self.weight.shape[0]}")
        return z @ self.weight + self.bias

    def to_dict(self) -> dict:
        return {
            "weight": self.weight.tolist(),
            "bias": self.bias.tolist(),
            "hyper": self.hyper,
            "best_epoch": self.best_epoch,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(
            weight=np.asarray(d["weight"], dtype=np.float64),
            bias=np.asarray(d["bias"], dtype=np.float64),
            hyper=d.get("hyper", {}),
            best_epoch=d.get("best_epoch"),
        )


def _softmax(s: np.ndarray) -> np.ndarray:
    s = s - s.max(axis=1, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=1, keepdims=True)


def _loss(z, y_onehot, W, b, l2):
    p = _softmax(z @ W + b)
    ce = -np.mean(np.sum(y_onehot * np.log(np.clip(p, 1e-300, None)), axis=1))
    return ce + 0.5 * l2 * np.sum(W * W), p


def train(
    z_train,
    labels,
    lr: float = 0.1,
    epochs: int = 300,
    l2: float = 5e-4,
    num_classes: int | None = None,
    z_val=None,
    labels_val=None,
    seed: int = 0,
) -> LinearModel:
    """Fit weights from zero init.

    With a validation set the parameters of the best validation micro-F1
    epoch are returned (earliest epoch on ties).
    """
    z = np.asarray(z_train, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if z.ndim != 2 or z.shape[0] != y.shape[0]:
        raise ValueError("embedding rows and labels differ in length")
    if y.size and y.min() < 0:
        raise ValueError("labels must be non-negative")
    c = int(num_classes if num_classes is not None else y.max() + 1)
    if np.unique(y).size < 2:
        raise ValueError("training labels contain a single class")
    if z.shape[0] < c:
        raise ValueError("fewer training rows than classes")

    onehot = np.eye(c)[y]
    W = np.zeros((z.shape[1], c))
    b = np.zeros(c)
    hyper = {"lr": lr, "epochs": epochs, "l2": l2, "seed": seed}
    losses = []
    best = None
    for epoch in range(epochs):
        loss, p = _loss(z, onehot, W, b, l2)
        losses.append(float(loss))
        if z_val is not None:
            f1 = micro_f1(predict_scores(np.asarray(z_val) @ W + b), labels_val)
            if best is None or f1 > best[0]:
                best = (f1, epoch, W.copy(), b.copy())
        grad = (p - onehot) / z.shape[0]
        W -= lr * (z.T @ grad + l2 * W)
        b -= lr * grad.sum(axis=0)
    final_loss, _ = _loss(z, onehot, W, b, l2)
    losses.append(float(final_loss))
    if z_val is not None:
        f1 = micro_f1(predict_scores(np.asarray(z_val) @ W + b), labels_val)
        if f1 > best[0]:
            best = (f1, epochs, W.copy(), b.copy())
        return LinearModel(best[2], best[3], hyper, best_epoch=best[1], losses=losses)
    return LinearModel(W, b, hyper, best_epoch=epochs, losses=losses)


def predict_scores(scores) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest class index on ties.
    return np.argmax(np.asarray(scores), axis=1)


def predict(model: LinearModel, z) -> np.ndarray:
    return predict_scores(model.scores(z))


def micro_f1(pred, truth) -> float:
    """Micro-averaged F1, equal to accuracy for single-label predictions."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("prediction and truth lengths differ")
    if pred.size == 0:
        raise ValueError("empty label lists")
    return float(np.mean(pred == truth))
