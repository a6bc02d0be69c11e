"""Label-noise transition estimation from out-of-sample class probabilities.

Given predicted probabilities and observed labels, estimate the joint
distribution between observed and latent true labels via per-class
self-confidence thresholds, then derive the column-conditional transition
matrix used to drive synthetic noise injection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


def _check_inputs(probs: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2:
        raise DataError("probabilities must be a 2-d array")
    if probs.shape[0] != labels.shape[0]:
        raise DataError("probability rows and labels differ in length")
    c = probs.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise DataError("label outside [0, c)")
    return probs, labels


def class_thresholds(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """t_j: mean predicted probability of class j over nodes labelled j.

    Classes with no observed examples get an infinite threshold so that no
    node can be confidently assigned to them.
    """
    probs, labels = _check_inputs(probs, labels)
    c = probs.shape[1]
    t = np.full(c, np.inf)
    for j in range(c):
        mask = labels == j
        if mask.any():
            t[j] = probs[mask, j].mean()
    return t


def confident_joint(probs: np.ndarray, labels: np.ndarray,
                    thresholds: np.ndarray | None = None,
                    ) -> tuple[np.ndarray, int]:
    """Count matrix C[i, j]: nodes observed as i whose confident class is j.

    A node's confident class is the argmax of its predicted probability over
    the classes whose threshold it clears; probability ties go to the lowest
    class index. Nodes clearing no threshold are left out of C; the second
    return value counts them.
    """
    probs, labels = _check_inputs(probs, labels)
    c = probs.shape[1]
    t = class_thresholds(probs, labels) if thresholds is None else np.asarray(thresholds)
    if t.shape != (c,):
        raise DataError("thresholds length differs from class count")
    qualifies = probs >= t[None, :]
    masked = np.where(qualifies, probs, -np.inf)
    suggested = masked.argmax(axis=1)
    counted = qualifies.any(axis=1)
    cj = np.zeros((c, c), dtype=np.int64)
    np.add.at(cj, (labels[counted], suggested[counted]), 1)
    return cj, int(np.sum(~counted))


def joint_distribution(cj: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Calibrate the confident joint into an estimated joint distribution.

    Rows are rescaled so each observed class keeps its empirical share of
    the data, then the whole matrix is normalized to sum to one. All-zero
    rows of C stay zero.
    """
    cj = np.asarray(cj, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    c = cj.shape[0]
    if cj.shape != (c, c):
        raise DataError("confident joint must be square")
    if cj.sum() == 0:
        raise DataError("confident joint is all zero; nothing was counted")
    class_counts = np.bincount(labels, minlength=c).astype(np.float64)
    row_sums = cj.sum(axis=1)
    scaled = np.zeros_like(cj)
    nz = row_sums > 0
    scaled[nz] = cj[nz] / row_sums[nz, None] * class_counts[nz, None]
    return scaled / scaled.sum()


def conditional_transition(joint: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Column-normalize the joint into p(observed = i | true = j).

    Columns with zero mass (a true class the estimate never produced) fall
    back to the uniform distribution; their indices are returned so callers
    can surface the degradation.
    """
    joint = np.asarray(joint, dtype=np.float64)
    c = joint.shape[0]
    col_sums = joint.sum(axis=0)
    out = np.zeros_like(joint)
    fallback = []
    for j in range(c):
        if col_sums[j] > 0:
            out[:, j] = joint[:, j] / col_sums[j]
        else:
            out[:, j] = 1.0 / c
            fallback.append(j)
    return out, fallback


def noise_rate(joint: np.ndarray) -> float:
    """Estimated fraction of mislabelled nodes: the off-diagonal joint mass."""
    joint = np.asarray(joint, dtype=np.float64)
    return float(1.0 - np.trace(joint))


@dataclass(frozen=True)
class TransitionEstimate:
    thresholds: np.ndarray
    confident_joint: np.ndarray
    uncounted: int
    joint: np.ndarray
    conditional: np.ndarray
    fallback_columns: list[int] = field(default_factory=list)

    @property
    def noise_rate(self) -> float:
        return noise_rate(self.joint)


def estimate_transition(probs: np.ndarray, labels: np.ndarray) -> TransitionEstimate:
    """Full pipeline: thresholds, confident joint, joint, conditional."""
    t = class_thresholds(probs, labels)
    cj, uncounted = confident_joint(probs, labels, t)
    joint = joint_distribution(cj, labels)
    cond, fallback = conditional_transition(joint)
    return TransitionEstimate(thresholds=t, confident_joint=cj,
                              uncounted=uncounted, joint=joint,
                              conditional=cond, fallback_columns=fallback)
