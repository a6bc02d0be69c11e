"""End-to-end audit pipeline: estimate noise, train the detector, score.

The sequence mirrors the two-step recipe the package is built around:
corrupt a slice of the validation split with estimated transition noise to
get labelled detector training data, then score every node's actual label
with the trained detector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import conformal, detector, noise
from .errors import DataError
from .features import build_features
from .graph import Graph, normalized_adjacency, one_hot
from .transition import TransitionEstimate, estimate_transition

DEFAULT_K = 2
DEFAULT_SYNTH_RATIO = 0.5
DEFAULT_POLICY = "fixed:0.97"


def derive_seed(seed: int, stage: int) -> int:
    """Stable per-stage stream from the single user-facing seed."""
    return int(np.random.SeedSequence((seed, stage)).generate_state(1)[0])


@dataclass(frozen=True)
class ThresholdPolicy:
    """Parsed flag policy: fixed cutoff, prior-adjusted, or conformal."""

    kind: str  # fixed | bayes | conformal-fp | conformal-fn
    params: tuple

    @classmethod
    def parse(cls, text: str) -> "ThresholdPolicy":
        kind, _, arg = text.partition(":")
        try:
            if kind == "fixed":
                value = float(arg) if arg else detector.DEFAULT_THRESHOLD
                if not 0.0 <= value <= 1.0:
                    raise ValueError
                return cls("fixed", (value,))
            if kind == "bayes":
                return cls("bayes", (float(arg),))
            if kind in ("conformal-fp", "conformal-fn"):
                alpha_text, _, p_text = arg.partition(",")
                if not p_text:
                    raise ValueError
                return cls(kind, (float(alpha_text), float(p_text)))
        except ValueError:
            raise DataError(f"malformed threshold policy {text!r}")
        raise DataError(f"unknown threshold policy kind {kind!r}")

    def resolve(self, calibration_scores: np.ndarray) -> tuple[float, dict | None]:
        """Turn the policy into a score cutoff; conformal modes calibrate on
        the supplied exchangeable score set and report their order statistic.
        """
        if self.kind == "fixed":
            return self.params[0], None
        if self.kind == "bayes":
            return detector.bayes_threshold(self.params[0]), None
        alpha, p = self.params
        if self.kind == "conformal-fp":
            ct = conformal.fp_threshold(calibration_scores, p, alpha)
            return ct.lam, ct.to_json()
        ct = conformal.fn_threshold(calibration_scores, p, alpha)
        # lambda bounds the modified score (1 - s) of flagged mislabels, so
        # the equivalent cutoff on raw scores is 1 - lambda
        return 1.0 - ct.lam, ct.to_json()


@dataclass(frozen=True)
class AuditResult:
    scores: np.ndarray
    threshold: float
    flags: np.ndarray
    suggested: np.ndarray
    transition: TransitionEstimate
    model: detector.DetectorModel
    k_hops: int
    seed: int
    synth_ratio: float
    policy: str
    conformal_info: dict | None = None
    synthetic: noise.CorruptedLabels | None = field(default=None, repr=False)


def run_audit(g: Graph, probs: np.ndarray, k_hops: int = DEFAULT_K,
              policy: str = DEFAULT_POLICY, seed: int = 0,
              synth_ratio: float = DEFAULT_SYNTH_RATIO) -> AuditResult:
    """Score every node's label and flag suspects under the given policy.

    Transition estimation, synthetic corruption, and detector training all
    happen on the validation split; scoring covers the whole graph.
    """
    if g.c < 2:
        raise DataError("auditing needs at least 2 classes")
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (g.n, g.c):
        raise DataError(f"softmax matrix must be ({g.n}, {g.c})")
    parsed = ThresholdPolicy.parse(policy)
    val = g.val_nodes
    if val.size == 0:
        raise DataError("validation split is empty")

    est = estimate_transition(probs[val], g.labels[val])
    v_synth = noise.sample_synthetic_set(val, synth_ratio, derive_seed(seed, 1))
    synthetic = noise.flip_by_transition(g.labels, v_synth, est.conditional,
                                         derive_seed(seed, 2))

    a = normalized_adjacency(g)
    y = one_hot(g.labels, g.c)
    y_c = one_hot(synthetic.labels_c, g.c)
    z_train = build_features(a, y, y_c, probs, k_hops)
    model = detector.train_detector(z_train.z[val], synthetic.flipped[val],
                                    seed=derive_seed(seed, 3))

    z_inf = build_features(a, y, y, probs, k_hops)
    scores = detector.score(model, z_inf.z)
    threshold, conformal_info = parsed.resolve(scores[val])
    flags = detector.classify(scores, threshold)
    suggested = detector.suggest_corrections(flags, probs)
    return AuditResult(scores=scores, threshold=threshold, flags=flags,
                       suggested=suggested, transition=est, model=model,
                       k_hops=k_hops, seed=seed, synth_ratio=synth_ratio,
                       policy=policy, conformal_info=conformal_info,
                       synthetic=synthetic)
