"""Planted-partition graph generator for desk-scale experiments.

Nodes get round-robin class assignments, edges appear independently with
probability p_in inside a class and p_out across classes, and features are
unit-variance Gaussians whose class means sit `signal` apart along the
coordinate axes. Splits are stratified per class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .graph import Graph


@dataclass(frozen=True)
class SbmConfig:
    n: int
    c: int
    p_in: float
    p_out: float
    d: int = 0  # 0: use one dimension per class
    signal: float = 1.5
    fractions: tuple = (0.4, 0.3, 0.3)  # train, val, test
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_out < self.p_in <= 1.0:
            raise DataError("need 0 <= p_out < p_in <= 1 (homophily)")
        if self.n < 1 or self.c < 1:
            raise DataError("n and c must be positive")
        if abs(sum(self.fractions) - 1.0) > 1e-9 or len(self.fractions) != 3:
            raise DataError("split fractions must be three values summing to 1")

    @property
    def feature_dim(self) -> int:
        return self.d if self.d > 0 else self.c


def _block_edges(rng: np.random.Generator, ids_a: np.ndarray,
                 ids_b: np.ndarray | None, prob: float) -> list:
    """Sample a Bernoulli(prob) edge set over a block of candidate pairs.

    Draws the edge count from the exact binomial, then picks that many
    distinct pairs uniformly (rejection on duplicates), which matches the
    per-pair independent model without enumerating all pairs.
    """
    if prob <= 0.0:
        return []
    if ids_b is None:
        s = ids_a.size
        total = s * (s - 1) // 2
    else:
        total = ids_a.size * ids_b.size
    count = int(rng.binomial(total, prob))
    chosen: set = set()
    while len(chosen) < count:
        draw = max(16, 2 * (count - len(chosen)))
        if ids_b is None:
            u = rng.integers(0, ids_a.size, draw)
            v = rng.integers(0, ids_a.size, draw)
            keep = u != v
            a, b = ids_a[u[keep]], ids_a[v[keep]]
        else:
            a = ids_a[rng.integers(0, ids_a.size, draw)]
            b = ids_b[rng.integers(0, ids_b.size, draw)]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        for key in zip(lo.tolist(), hi.tolist()):
            if len(chosen) == count:
                break
            chosen.add(key)
    return sorted(chosen)


def stratified_splits(labels: np.ndarray, fractions, rng: np.random.Generator) -> np.ndarray:
    """Assign train/val/test tags class by class at the given fractions."""
    n = labels.shape[0]
    splits = np.empty(n, dtype="<U8")
    for cls in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == cls))
        n_train = int(fractions[0] * members.size)
        n_val = int(fractions[1] * members.size)
        splits[members[:n_train]] = "train"
        splits[members[n_train:n_train + n_val]] = "val"
        splits[members[n_train + n_val:]] = "test"
    return splits


def gen_sbm(cfg: SbmConfig) -> Graph:
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    labels = np.arange(cfg.n, dtype=np.int64) % cfg.c
    class_ids = [np.flatnonzero(labels == i) for i in range(cfg.c)]

    edge_rows: list = []
    for i in range(cfg.c):
        edge_rows += _block_edges(rng, class_ids[i], None, cfg.p_in)
        for j in range(i + 1, cfg.c):
            edge_rows += _block_edges(rng, class_ids[i], class_ids[j], cfg.p_out)
    edges = (np.asarray(sorted(edge_rows), dtype=np.int64) if edge_rows
             else np.empty((0, 2), dtype=np.int64))

    d = cfg.feature_dim
    means = np.zeros((cfg.c, d))
    means[np.arange(cfg.c), np.arange(cfg.c) % d] = cfg.signal
    features = rng.standard_normal((cfg.n, d)) + means[labels]

    splits = stratified_splits(labels, cfg.fractions, rng)
    g = Graph(n=cfg.n, c=cfg.c, edges=edges, labels=labels, splits=splits,
              features=features)
    g.validate()
    return g
