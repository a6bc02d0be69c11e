"""Label-noise auditing for node-classification graphs.

Find mislabelled nodes by training a small detector on neighborhood
agreement features over synthetically corrupted labels, then flag suspects
under fixed, prior-adjusted, or conformal thresholds.
"""

from .audit import AuditResult, ThresholdPolicy, run_audit
from .classifier import LinearModel, load_softmax, train_base
from .conformal import (ConformalThreshold, fn_threshold, fp_threshold,
                        modified_scores)
from .detector import (DetectorModel, MislabelScores, bayes_threshold,
                       classify, score, suggest_corrections, train_detector)
from .errors import AuditError, DataError, GuaranteeError, ParseError
from .features import AgreementFeatures, build_features, rowwise_dot
from .graph import (Graph, load_graph, normalized_adjacency, one_hot,
                    propagate, propagation_matrix)
from .metrics import argmax_disagreement, f1_score, mcc, precision_at
from .noise import (CorruptedLabels, flip_by_transition, inject_asymmetric,
                    inject_symmetric, sample_synthetic_set)
from .sbm import SbmConfig, gen_sbm
from .transition import (TransitionEstimate, class_thresholds, confident_joint,
                         conditional_transition, estimate_transition,
                         joint_distribution)

__version__ = "0.1.0"

__all__ = [
    "AgreementFeatures", "AuditError", "AuditResult", "ConformalThreshold",
    "CorruptedLabels", "DataError", "DetectorModel", "Graph", "GuaranteeError",
    "LinearModel", "MislabelScores", "ParseError", "SbmConfig",
    "ThresholdPolicy", "TransitionEstimate", "argmax_disagreement",
    "bayes_threshold", "build_features", "class_thresholds", "classify",
    "conditional_transition", "confident_joint", "estimate_transition",
    "f1_score", "flip_by_transition", "fn_threshold", "fp_threshold",
    "gen_sbm", "inject_asymmetric", "inject_symmetric", "joint_distribution",
    "load_graph", "load_softmax", "mcc", "modified_scores",
    "normalized_adjacency", "one_hot", "precision_at", "propagate",
    "propagation_matrix", "rowwise_dot", "sample_synthetic_set", "score",
    "suggest_corrections", "train_base", "train_detector", "run_audit",
    "__version__",
]
