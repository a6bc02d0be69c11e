"""Synthetic mislabel injection with ground-truth flip flags.

Three injectors: transition-driven flips for detector training, and
symmetric / asymmetric corruption for harness evaluation. All of them are
pure functions of (inputs, seed) via a counter-based random stream.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError

# Off-diagonal column mass below this is treated as "no usable flip
# distribution" and replaced with a uniform draw over the other classes.
MIN_OFFDIAG_MASS = 1e-12


@dataclass(frozen=True)
class CorruptedLabels:
    """Per-node labels after corruption, with the ground-truth flip mask."""

    labels_c: np.ndarray  # (n,) int64
    flipped: np.ndarray  # (n,) bool
    original: np.ndarray  # (n,) int64
    seed: int

    def __post_init__(self):
        if np.any(self.flipped != (self.labels_c != self.original)):
            raise DataError("flip mask inconsistent with label change")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node_id", "original", "corrupted", "flipped"])
            for v in range(len(self.labels_c)):
                writer.writerow([v, int(self.original[v]),
                                 int(self.labels_c[v]), int(self.flipped[v])])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _start(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    original = np.asarray(labels, dtype=np.int64).copy()
    return original, original.copy()


def sample_synthetic_set(val_nodes: np.ndarray, ratio: float, seed: int) -> np.ndarray:
    """Uniform sample without replacement of floor(ratio * |val_nodes|) nodes."""
    val_nodes = np.asarray(val_nodes, dtype=np.int64)
    if val_nodes.size == 0:
        raise DataError("validation node set is empty")
    if not 0.0 < ratio <= 1.0:
        raise DataError(f"ratio {ratio} outside (0, 1]")
    count = int(ratio * val_nodes.size)
    picked = _rng(seed).choice(val_nodes, size=count, replace=False)
    return np.sort(picked)


def flip_by_transition(labels: np.ndarray, node_set: np.ndarray,
                       conditional: np.ndarray, seed: int) -> CorruptedLabels:
    """Flip every node in node_set per the conditional transition matrix.

    A node with label j receives a new label i != j with probability
    proportional to conditional[i][j]; the diagonal is excluded and the
    column renormalized, so every node in node_set ends up flipped. Columns
    with negligible off-diagonal mass fall back to a uniform draw.
    """
    original, labels_c = _start(labels)
    conditional = np.asarray(conditional, dtype=np.float64)
    c = conditional.shape[0]
    if c < 2:
        raise DataError("need at least 2 classes to flip labels")
    if conditional.shape != (c, c):
        raise DataError("conditional transition must be square")
    node_set = np.asarray(node_set, dtype=np.int64)
    rng = _rng(seed)
    # Per-class off-diagonal flip distributions, computed once.
    flip_probs = np.empty((c, c))
    for j in range(c):
        col = conditional[:, j].copy()
        col[j] = 0.0
        mass = col.sum()
        if mass < MIN_OFFDIAG_MASS:
            col = np.full(c, 1.0 / (c - 1))
            col[j] = 0.0
        else:
            col /= mass
        flip_probs[:, j] = col
    for v in node_set:
        j = original[v]
        labels_c[v] = rng.choice(c, p=flip_probs[:, j])
    flipped = labels_c != original
    return CorruptedLabels(labels_c=labels_c, flipped=flipped,
                           original=original, seed=seed)


def inject_symmetric(labels: np.ndarray, node_set: np.ndarray, eps: float,
                     seed: int, num_classes: int | None = None) -> CorruptedLabels:
    """Reassign a uniform eps-fraction of node_set uniformly among other classes."""
    original, labels_c = _start(labels)
    c = int(original.max()) + 1 if num_classes is None else num_classes
    if c < 2:
        raise DataError("need at least 2 classes to flip labels")
    if not 0.0 <= eps <= 1.0:
        raise DataError(f"eps {eps} outside [0, 1]")
    node_set = np.asarray(node_set, dtype=np.int64)
    rng = _rng(seed)
    count = int(eps * node_set.size)
    picked = rng.choice(node_set, size=count, replace=False) if count else np.empty(0, np.int64)
    for v in picked:
        # uniform over the c-1 classes other than the current one
        offset = rng.integers(1, c)
        labels_c[v] = (original[v] + offset) % c
    flipped = labels_c != original
    return CorruptedLabels(labels_c=labels_c, flipped=flipped,
                           original=original, seed=seed)


def inject_asymmetric(labels: np.ndarray, node_set: np.ndarray, eps: float,
                      seed: int, num_classes: int | None = None) -> CorruptedLabels:
    """Relabel exactly floor(eps * n_i) class-i nodes of node_set to (i+1) mod c."""
    original, labels_c = _start(labels)
    c = int(original.max()) + 1 if num_classes is None else num_classes
    if c < 2:
        raise DataError("need at least 2 classes to flip labels")
    if not 0.0 <= eps <= 1.0:
        raise DataError(f"eps {eps} outside [0, 1]")
    node_set = np.asarray(node_set, dtype=np.int64)
    rng = _rng(seed)
    for i in range(c):
        members = node_set[original[node_set] == i]
        count = int(eps * members.size)
        if count == 0:
            continue
        picked = rng.choice(members, size=count, replace=False)
        labels_c[picked] = (i + 1) % c
    flipped = labels_c != original
    return CorruptedLabels(labels_c=labels_c, flipped=flipped,
                           original=original, seed=seed)
