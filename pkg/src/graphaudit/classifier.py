"""Base node classifier producing the softmax prediction matrix P.

Either ingest an externally computed softmax file, or train the built-in
propagated-features linear classifier so the toolkit works stand-alone. Any
row-stochastic P is acceptable downstream; the built-in model exists for
convenience, not accuracy records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParseError
from .graph import Graph, normalized_adjacency, one_hot

ROW_SUM_TOL = 1e-4

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class LinearModel:
    """Multinomial logistic regression over k-hop smoothed features."""

    weights: np.ndarray  # (d, c)
    bias: np.ndarray  # (c,)
    k_base: int
    config: dict = field(default_factory=dict)

    def predict_proba(self, x_smooth: np.ndarray) -> np.ndarray:
        return _softmax(x_smooth @ self.weights + self.bias)

    def save(self, path) -> None:
        blob = {
            "version": CHECKPOINT_VERSION,
            "kind": "linear",
            "k_base": self.k_base,
            "shape": list(self.weights.shape),
            "weights": self.weights.ravel().tolist(),
            "bias": self.bias.tolist(),
            "config": self.config,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(blob, fh)

    @classmethod
    def load(cls, path) -> "LinearModel":
        with open(path, "r", encoding="utf-8") as fh:
            blob = json.load(fh)
        if blob.get("version") != CHECKPOINT_VERSION or blob.get("kind") != "linear":
            raise DataError(f"unsupported model checkpoint in {path}")
        d, c = blob["shape"]
        return cls(weights=np.asarray(blob["weights"]).reshape(d, c),
                   bias=np.asarray(blob["bias"], dtype=np.float64),
                   k_base=int(blob["k_base"]), config=blob.get("config", {}))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def load_softmax(path, n: int, c: int) -> np.ndarray:
    """Read an n x c CSV of class probabilities, enforcing row-stochasticity.

    Rows whose sum deviates from 1 by at most 1e-4 are renormalized; larger
    deviations or negative entries are rejected.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != c:
                raise ParseError(path, lineno, f"expected {c} columns, got {len(parts)}")
            try:
                row = np.asarray([float(p) for p in parts])
            except ValueError:
                raise ParseError(path, lineno, "non-numeric probability")
            if np.any(row < 0) or np.any(row > 1):
                raise ParseError(path, lineno, "probability outside [0, 1]")
            total = row.sum()
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise ParseError(path, lineno, f"row sums to {total:.6f}, not 1")
            rows.append(row / total)
    if len(rows) != n:
        raise ParseError(path, len(rows) + 1, f"expected {n} rows, got {len(rows)}")
    return np.asarray(rows)


def smooth_features(g: Graph, k_base: int) -> np.ndarray:
    """X' = A_norm^k_base X. The diagonal is kept: self-features are inputs."""
    if g.features is None:
        raise DataError("graph has no feature matrix")
    a = normalized_adjacency(g)
    x = g.features
    for _ in range(k_base):
        x = a @ x
    return x


def train_base(g: Graph, k_base: int = 2, epochs: int = 300, step: float = 0.1,
               seed: int = 0) -> tuple[LinearModel, np.ndarray]:
    """Fit the built-in classifier on the train split; return (model, P).

    Full-batch gradient descent with momentum 0.9 on the multinomial
    cross-entropy, parameters initialized at zero. Validation and test nodes
    never enter the loss. Deterministic for identical inputs.
    """
    if g.features is None:
        raise DataError("graph has no feature matrix")
    train = g.train_nodes
    if train.size == 0:
        raise DataError("training split is empty")
    x = smooth_features(g, k_base)
    y = one_hot(g.labels, g.c)
    d, c = x.shape[1], g.c
    w = np.zeros((d, c))
    b = np.zeros(c)
    vw = np.zeros_like(w)
    vb = np.zeros_like(b)
    momentum = 0.9
    xt, yt = x[train], y[train]
    m = train.size
    for _ in range(epochs):
        p = _softmax(xt @ w + b)
        grad = (p - yt) / m
        gw = xt.T @ grad
        gb = grad.sum(axis=0)
        vw = momentum * vw - step * gw
        vb = momentum * vb - step * gb
        w = w + vw
        b = b + vb
    probs = _softmax(x @ w + b)
    train_acc = float(np.mean(probs[train].argmax(axis=1) == g.labels[train]))
    model = LinearModel(weights=w, bias=b, k_base=k_base,
                        config={"epochs": epochs, "step": step,
                                "momentum": momentum, "seed": seed,
                                "train_accuracy": train_acc})
    return model, probs


def cross_entropy(w: np.ndarray, b: np.ndarray, x: np.ndarray,
                  labels: np.ndarray) -> float:
    """Mean negative log-likelihood; used by the gradient-check oracle."""
    p = _softmax(x @ w + b)
    return float(-np.mean(np.log(p[np.arange(len(labels)), labels])))
