"""Neighborhood-agreement feature construction.

Each node gets 2K+1 agreement scores: its (possibly corrupted) label
against its own predicted distribution, against propagated predictions at
hops 1..K, and against propagated original labels at hops 1..K. The
propagation operator excludes the node itself, so a node's own label never
contributes to its neighborhood columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DataError
from .graph import power_diagonal


@dataclass(frozen=True)
class AgreementFeatures:
    z: np.ndarray  # (n, 2K+1)
    k_hops: int

    def __post_init__(self):
        if self.z.shape[1] != 2 * self.k_hops + 1:
            raise DataError("feature width inconsistent with hop count")

    def to_csv(self, path) -> None:
        n, width = self.z.shape
        header = "node_id," + ",".join(f"f{j}" for j in range(width))
        body = np.column_stack([np.arange(n), self.z])
        fmt = ["%d"] + ["%.17g"] * width
        np.savetxt(path, body, delimiter=",", header=header, comments="", fmt=fmt)


def rowwise_dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Per-row inner product of two equally shaped matrices."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DataError(f"shape mismatch: {u.shape} vs {v.shape}")
    return np.einsum("ij,ij->i", u, v)


def build_features(a_norm: sparse.csr_array, y: np.ndarray, y_c: np.ndarray,
                   p: np.ndarray, k_max: int) -> AgreementFeatures:
    """Assemble Z = [Y_c(.)P, Y_c(.)P^(1..K), Y_c(.)Y^(1..K)].

    P^(k) and Y^(k) are the k-hop self-excluded propagations of the
    predictions and of the ORIGINAL labels; only the per-node self term uses
    the corrupted labels. At inference time callers pass y_c == y.
    """
    y = np.asarray(y, dtype=np.float64)
    y_c = np.asarray(y_c, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if not (y.shape == y_c.shape == p.shape):
        raise DataError("label and prediction matrices must share a shape")
    if y.shape[0] != a_norm.shape[0]:
        raise DataError("matrix rows differ from node count")
    if k_max < 1:
        raise DataError("k_max must be >= 1")
    n = y.shape[0]
    z = np.empty((n, 2 * k_max + 1))
    z[:, 0] = rowwise_dot(y_c, p)
    p_pow, y_pow = p, y
    for k in range(1, k_max + 1):
        # raw k-th power applied to the signals; the self contribution
        # diag(A^k) * signal is removed before taking agreements
        p_pow = a_norm @ p_pow
        y_pow = a_norm @ y_pow
        diag = power_diagonal(a_norm, k)[:, None]
        z[:, k] = rowwise_dot(y_c, p_pow - diag * p)
        z[:, k_max + k] = rowwise_dot(y_c, y_pow - diag * y)
    return AgreementFeatures(z=z, k_hops=k_max)
