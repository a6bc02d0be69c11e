"""Binary MLP that scores nodes by probability of being mislabelled.

Trained on validation-split agreement features against synthetic flip flags
with an L1 objective; scores feed a threshold policy (fixed, prior-adjusted
or conformal) to produce flags plus suggested corrections.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

HIDDEN = (32, 32)
DEFAULT_THRESHOLD = 0.97
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class DetectorModel:
    """Fully connected scorer: input -> 32 -> 32 -> 1, sigmoid output."""

    weights: list  # list of (fan_in, fan_out) ndarrays
    biases: list  # list of (fan_out,) ndarrays
    seed: int
    config: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def save(self, path) -> None:
        blob = {
            "version": CHECKPOINT_VERSION,
            "kind": "mlp",
            "sizes": [self.input_dim] + [w.shape[1] for w in self.weights],
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "seed": self.seed,
            "config": self.config,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(blob, fh)

    @classmethod
    def load(cls, path) -> "DetectorModel":
        with open(path, "r", encoding="utf-8") as fh:
            blob = json.load(fh)
        if blob.get("version") != CHECKPOINT_VERSION or blob.get("kind") != "mlp":
            raise DataError(f"unsupported detector checkpoint in {path}")
        sizes = blob["sizes"]
        weights = [np.asarray(w).reshape(sizes[i], sizes[i + 1])
                   for i, w in enumerate(blob["weights"])]
        biases = [np.asarray(b, dtype=np.float64) for b in blob["biases"]]
        return cls(weights=weights, biases=biases, seed=int(blob["seed"]),
                   config=blob.get("config", {}))


@dataclass(frozen=True)
class MislabelScores:
    scores: np.ndarray  # (n,) in [0, 1]
    threshold: float
    flags: np.ndarray  # (n,) bool, scores > threshold
    suggested: np.ndarray  # (n,) int64, -1 where unflagged

    def __post_init__(self):
        if np.any(self.flags != (self.scores > self.threshold)):
            raise DataError("flags inconsistent with threshold")
        if np.any((self.suggested >= 0) != self.flags):
            raise DataError("suggestions must exist exactly at flagged nodes")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _forward(weights, biases, z):
    """Return (activations per layer, final sigmoid output)."""
    acts = [z]
    h = z
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = h @ w + b
        if i < last:
            h = np.maximum(h, 0.0)
        acts.append(h)
    return acts, _sigmoid(acts[-1][:, 0])


def l1_loss(weights, biases, z, targets) -> float:
    _, out = _forward(weights, biases, z)
    return float(np.mean(np.abs(out - targets)))


def _l1_gradients(weights, biases, z, targets):
    """Backprop of mean |sigmoid(logit) - target| through the net."""
    acts, out = _forward(weights, biases, z)
    m = z.shape[0]
    # d/dlogit |sigmoid - y| = sign(sigmoid - y) * sigmoid'(logit)
    delta = (np.sign(out - targets) * out * (1.0 - out) / m)[:, None]
    gw = [None] * len(weights)
    gb = [None] * len(biases)
    for i in range(len(weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (acts[i] > 0)
    return gw, gb


def train_detector(z_val: np.ndarray, flipped: np.ndarray, seed: int = 0,
                   epochs: int = 500, step: float = 0.05,
                   patience: int = 25) -> DetectorModel:
    """Train the detector on validation-split features and flip flags.

    Full-batch gradient descent with momentum 0.9 on the L1 objective, an
    internal deterministic 90/10 split for early stopping (patience on the
    held-out MAE), best-seen parameters restored at the end.
    """
    z_val = np.asarray(z_val, dtype=np.float64)
    targets = np.asarray(flipped, dtype=np.float64)
    if z_val.ndim != 2 or z_val.shape[0] != targets.shape[0]:
        raise DataError("features and flags differ in length")
    m = z_val.shape[0]
    if m < 20:
        raise DataError(f"need at least 20 training rows, got {m}")
    if targets.min() == targets.max():
        raise DataError("all flip flags equal; detector target is degenerate")

    rng = np.random.Generator(np.random.Philox(seed))
    sizes = [z_val.shape[1], *HIDDEN, 1]
    weights = [rng.normal(0.0, np.sqrt(2.0 / sizes[i]), size=(sizes[i], sizes[i + 1]))
               for i in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]

    perm = rng.permutation(m)
    n_hold = max(1, m // 10)
    hold, fit = perm[:n_hold], perm[n_hold:]
    z_fit, y_fit = z_val[fit], targets[fit]
    z_hold, y_hold = z_val[hold], targets[hold]

    vw = [np.zeros_like(w) for w in weights]
    vb = [np.zeros_like(b) for b in biases]
    momentum = 0.9
    best = (np.inf, [w.copy() for w in weights], [b.copy() for b in biases])
    stale = 0
    for _ in range(epochs):
        gw, gb = _l1_gradients(weights, biases, z_fit, y_fit)
        for i in range(len(weights)):
            vw[i] = momentum * vw[i] - step * gw[i]
            vb[i] = momentum * vb[i] - step * gb[i]
            weights[i] = weights[i] + vw[i]
            biases[i] = biases[i] + vb[i]
        hold_mae = l1_loss(weights, biases, z_hold, y_hold)
        if hold_mae < best[0] - 1e-12:
            best = (hold_mae, [w.copy() for w in weights], [b.copy() for b in biases])
            stale = 0
        else:
            stale += 1
            if stale > patience:
                break
    _, weights, biases = best
    return DetectorModel(weights=weights, biases=biases, seed=seed,
                         config={"epochs": epochs, "step": step,
                                 "momentum": momentum, "patience": patience,
                                 "holdout_mae": best[0]})


def score(model: DetectorModel, z: np.ndarray) -> np.ndarray:
    """Forward pass: per-row mislabel score in [0, 1]."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != model.input_dim:
        raise DataError(f"features must be (n, {model.input_dim})")
    _, out = _forward(model.weights, model.biases, z)
    return out


def bayes_threshold(expected_rate: float) -> float:
    """Threshold from the prior-ratio rule: flag iff s > 1 - expected_rate.

    With a balanced detector training set, a score s flags a node exactly
    when s * p_prior > (1 - s) * (1 - p_prior), which simplifies to
    s > 1 - p_prior for the deployment prior p_prior of mislabels.
    """
    if not 0.0 < expected_rate < 1.0:
        raise DataError(f"expected mislabel rate {expected_rate} outside (0, 1)")
    return 1.0 - expected_rate


def classify(scores: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Flag nodes with score strictly above the threshold."""
    return np.asarray(scores) > threshold


def suggest_corrections(flags: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Argmax-of-P suggestion at flagged nodes, -1 elsewhere (ties: lowest id)."""
    flags = np.asarray(flags, dtype=bool)
    probs = np.asarray(probs, dtype=np.float64)
    if flags.shape[0] != probs.shape[0]:
        raise DataError("flags and probability rows differ in length")
    suggested = np.full(flags.shape[0], -1, dtype=np.int64)
    suggested[flags] = probs[flags].argmax(axis=1)
    return suggested


def score_and_classify(model: DetectorModel, z: np.ndarray, probs: np.ndarray,
                       threshold: float = DEFAULT_THRESHOLD) -> MislabelScores:
    s = score(model, z)
    flags = classify(s, threshold)
    return MislabelScores(scores=s, threshold=threshold, flags=flags,
                          suggested=suggest_corrections(flags, probs))
