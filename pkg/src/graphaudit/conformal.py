"""Conformal threshold selection with false-positive / false-negative control.

Given N exchangeable calibration scores containing an (unknown which) p
fraction of mislabelled samples, pick the order statistic whose index makes
the chosen error rate at most alpha for a fresh exchangeable sample. No
distributional assumptions beyond exchangeability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, GuaranteeError

FALSE_POSITIVE = "false_positive"
FALSE_NEGATIVE = "false_negative"


@dataclass(frozen=True)
class ConformalThreshold:
    mode: str
    alpha: float
    p: float
    n_total: int
    b_index: int  # 1-based order-statistic index
    lam: float

    def to_json(self) -> dict:
        return {"mode": self.mode, "alpha": self.alpha, "p": self.p,
                "N": self.n_total, "B": self.b_index, "lambda": self.lam}


def _ceil(x: float) -> int:
    # tolerant ceiling: float noise just above an integer must not bump the
    # order-statistic index (which would silently shift the guarantee)
    return math.ceil(x - 1e-9)


def _validate(scores: np.ndarray, p: float, alpha: float) -> int:
    n = scores.shape[0]
    if n == 0:
        raise DataError("empty calibration score set")
    if not 0.0 <= p < 1.0:
        raise DataError(f"mislabel fraction {p} outside [0, 1)")
    if not 1.0 / (n + 1) < alpha < 1.0:
        raise DataError(f"alpha {alpha} outside (1/(N+1), 1) for N={n}")
    return n


def fp_b_index(n: int, p: float, alpha: float) -> int:
    return _ceil((n * (1.0 - p) + 1.0) * (1.0 - alpha) + n * p)


def fn_b_index(n: int, p: float, alpha: float) -> int:
    return _ceil((n * p + 1.0) * (1.0 - alpha) + n * (1.0 - p))


def fp_threshold(scores: np.ndarray, p: float, alpha: float) -> ConformalThreshold:
    """Threshold such that a fresh correctly-labelled sample exceeds it with
    probability at most alpha.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = _validate(scores, p, alpha)
    b = fp_b_index(n, p, alpha)
    if b > n:
        raise GuaranteeError(FALSE_POSITIVE, alpha, p, n, b)
    lam = float(np.sort(scores)[b - 1])
    return ConformalThreshold(mode=FALSE_POSITIVE, alpha=alpha, p=p,
                              n_total=n, b_index=b, lam=lam)


def modified_scores(scores: np.ndarray) -> np.ndarray:
    """s' = (1 - s) where s > 0.5, else 0: small when a mislabel is obvious."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.where(scores > 0.5, 1.0 - scores, 0.0)


def fn_threshold(scores: np.ndarray, p: float, alpha: float) -> ConformalThreshold:
    """Threshold on modified scores such that a fresh mislabelled sample's
    modified score exceeds it with probability at most alpha.

    A node is then kept flagged when (1 - s) * 1{s > 0.5} <= lambda and
    s > 0.5, i.e. s >= 1 - lambda; callers translate lambda into the score
    cutoff 1 - lambda.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = _validate(scores, p, alpha)
    b = fn_b_index(n, p, alpha)
    if b > n:
        raise GuaranteeError(FALSE_NEGATIVE, alpha, p, n, b)
    lam = float(np.sort(modified_scores(scores))[b - 1])
    return ConformalThreshold(mode=FALSE_NEGATIVE, alpha=alpha, p=p,
                              n_total=n, b_index=b, lam=lam)
