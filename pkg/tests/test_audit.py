"""End-to-end audit pipeline and threshold-policy tests.

Oracles: the conformal module's own order statistics for policy resolution,
a planted-noise generated graph for end-to-end ranking quality, and bitwise
comparison for determinism.
"""

import dataclasses

import numpy as np
import pytest

from graphaudit.audit import ThresholdPolicy, derive_seed, run_audit
from graphaudit.classifier import train_base
from graphaudit.conformal import fp_b_index
from graphaudit.errors import DataError
from graphaudit.metrics import f1_score
from graphaudit.noise import inject_symmetric
from graphaudit.sbm import SbmConfig, gen_sbm


def corrupted_case(eps=0.1, seed=0, n=400, c=3):
    g_clean = gen_sbm(SbmConfig(n=n, c=c, p_in=0.05, p_out=0.005, seed=seed))
    corrupted = inject_symmetric(g_clean.labels, np.arange(n), eps, seed + 1, c)
    g = dataclasses.replace(g_clean, labels=corrupted.labels_c)
    _, probs = train_base(g, seed=seed)
    return g, probs, corrupted


def test_derive_seed_stable_and_stage_separated():
    assert derive_seed(7, 1) == derive_seed(7, 1)
    assert derive_seed(7, 1) != derive_seed(7, 2)
    assert derive_seed(7, 1) != derive_seed(8, 1)
    assert 0 <= derive_seed(0, 0) < 2 ** 32


def test_policy_parse_fixed():
    assert ThresholdPolicy.parse("fixed:0.9") == ThresholdPolicy("fixed", (0.9,))
    assert ThresholdPolicy.parse("fixed") == ThresholdPolicy("fixed", (0.97,))


def test_policy_parse_bayes_and_conformal():
    assert ThresholdPolicy.parse("bayes:0.034") == ThresholdPolicy("bayes", (0.034,))
    assert (ThresholdPolicy.parse("conformal-fp:0.1,0.2")
            == ThresholdPolicy("conformal-fp", (0.1, 0.2)))
    assert (ThresholdPolicy.parse("conformal-fn:0.05,0.1")
            == ThresholdPolicy("conformal-fn", (0.05, 0.1)))


def test_policy_parse_rejects_malformed():
    for text in ("fixed:abc", "fixed:1.5", "bayes:", "conformal-fp:0.1",
                 "conformal-fn:", "quantile:0.5", ""):
        with pytest.raises(DataError):
            ThresholdPolicy.parse(text)


def test_policy_resolve_fixed_and_bayes():
    scores = np.linspace(0.0, 1.0, 11)
    assert ThresholdPolicy.parse("fixed:0.8").resolve(scores) == (0.8, None)
    cutoff, info = ThresholdPolicy.parse("bayes:0.1").resolve(scores)
    assert cutoff == pytest.approx(0.9, abs=1e-12)
    assert info is None


def test_policy_resolve_conformal_fp():
    scores = np.asarray([0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75,
                         0.85, 0.95])
    cutoff, info = ThresholdPolicy.parse("conformal-fp:0.5,0.2").resolve(scores)
    b = fp_b_index(10, 0.2, 0.5)
    assert info["B"] == b == 7
    assert cutoff == 0.65  # 7th smallest score


def test_policy_resolve_conformal_fn_translates_cutoff():
    scores = np.asarray([0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75,
                         0.85, 0.95])
    cutoff, info = ThresholdPolicy.parse("conformal-fn:0.5,0.2").resolve(scores)
    # lambda is the largest modified score fl(1 - 0.55); flagging condition
    # s' <= lambda with s > 0.5 becomes s >= 1 - lambda
    assert info["mode"] == "false_negative"
    assert cutoff == pytest.approx(0.55, abs=1e-12)
    assert cutoff == 1.0 - info["lambda"]


def test_run_audit_shapes_and_consistency():
    g, probs, _ = corrupted_case()
    result = run_audit(g, probs, seed=3)
    assert result.scores.shape == (g.n,)
    assert result.scores.min() >= 0.0 and result.scores.max() <= 1.0
    np.testing.assert_array_equal(result.flags, result.scores > result.threshold)
    np.testing.assert_array_equal(result.suggested >= 0, result.flags)
    flagged = np.flatnonzero(result.flags)
    np.testing.assert_array_equal(result.suggested[flagged],
                                  probs[flagged].argmax(axis=1))
    assert result.policy == "fixed:0.97"
    assert result.conformal_info is None
    assert result.transition.conditional.shape == (g.c, g.c)


def test_run_audit_detects_planted_noise():
    g, probs, corrupted = corrupted_case(seed=4)
    result = run_audit(g, probs, policy="bayes:0.1", seed=4)
    test = g.test_nodes
    f1, degenerate = f1_score(result.flags[test], corrupted.flipped[test])
    assert not degenerate
    assert f1 >= 0.5  # planted flips must dominate the flag set


def test_run_audit_deterministic():
    g, probs, _ = corrupted_case(seed=5)
    r_a = run_audit(g, probs, seed=9)
    r_b = run_audit(g, probs, seed=9)
    np.testing.assert_array_equal(r_a.scores, r_b.scores)
    np.testing.assert_array_equal(r_a.flags, r_b.flags)
    assert r_a.threshold == r_b.threshold


def test_run_audit_seed_changes_scores():
    g, probs, _ = corrupted_case(seed=6)
    r_a = run_audit(g, probs, seed=0)
    r_b = run_audit(g, probs, seed=1)
    assert (r_a.scores != r_b.scores).any()


def test_run_audit_conformal_policy_reports_order_statistic():
    g, probs, _ = corrupted_case(seed=7)
    result = run_audit(g, probs, policy="conformal-fp:0.2,0.1", seed=7)
    info = result.conformal_info
    assert info is not None
    assert info["mode"] == "false_positive"
    assert info["N"] == g.val_nodes.size
    assert result.threshold == info["lambda"]


def test_run_audit_rejects_bad_probs_shape():
    g, probs, _ = corrupted_case(seed=8, n=200)
    with pytest.raises(DataError):
        run_audit(g, probs[:-1], seed=0)
    with pytest.raises(DataError):
        run_audit(g, probs[:, :-1], seed=0)


def test_run_audit_rejects_empty_validation_split():
    g, probs, _ = corrupted_case(seed=9, n=200)
    g = dataclasses.replace(
        g, splits=np.where(g.splits == "val", "train", g.splits).astype("<U8"))
    with pytest.raises(DataError):
        run_audit(g, probs, seed=0)
