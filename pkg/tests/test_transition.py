"""Transition estimation tests.

The central oracle is a 4-sample, 2-class hand trace: thresholds are class
means of self-confidence, each sample lands in the confident joint at the
argmax of the classes whose threshold it clears, and the joint/conditional
follow by row scaling and column normalization.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphaudit.errors import DataError
from graphaudit.transition import (class_thresholds, conditional_transition,
                                   confident_joint, estimate_transition,
                                   joint_distribution, noise_rate)

FIXTURE_PROBS = np.asarray([[0.9, 0.1], [0.2, 0.8], [0.4, 0.6], [0.1, 0.9]])
FIXTURE_LABELS = np.asarray([0, 0, 1, 1])


def test_fixture_thresholds():
    # oracle: t_0 = (0.9+0.2)/2, t_1 = (0.6+0.9)/2 by hand
    t = class_thresholds(FIXTURE_PROBS, FIXTURE_LABELS)
    np.testing.assert_allclose(t, [0.55, 0.75], atol=1e-9)


def test_fixture_confident_joint():
    # oracle hand trace: sample 0 -> C[0,0]; sample 1 clears only class 1;
    # sample 2 clears neither threshold (uncounted); sample 3 -> C[1,1]
    cj, uncounted = confident_joint(FIXTURE_PROBS, FIXTURE_LABELS)
    np.testing.assert_array_equal(cj, [[1, 1], [0, 1]])
    assert uncounted == 1


def test_fixture_joint_and_conditional():
    # oracle: rows of C scaled to observed counts (2,2) then normalized:
    # [[1,1],[0,2]]/4; columns normalized: col0 -> (1,0), col1 -> (1/3,2/3)
    est = estimate_transition(FIXTURE_PROBS, FIXTURE_LABELS)
    np.testing.assert_allclose(est.joint, [[0.25, 0.25], [0.0, 0.5]], atol=1e-9)
    np.testing.assert_allclose(est.conditional,
                               [[1.0, 1.0 / 3.0], [0.0, 2.0 / 3.0]], atol=1e-9)
    assert est.fallback_columns == []
    assert noise_rate(est.joint) == pytest.approx(0.25, abs=1e-9)


def test_perfect_one_hot_probabilities():
    labels = np.asarray([0, 1, 2, 0, 1, 2])
    probs = np.eye(3)[labels]
    cj, uncounted = confident_joint(probs, labels)
    np.testing.assert_array_equal(cj, 2 * np.eye(3, dtype=np.int64))
    assert uncounted == 0


def test_uniform_probabilities_tie_break_to_class_zero():
    # every threshold is 1/c and every sample qualifies everywhere; the
    # documented tie-break sends all counts to column 0
    labels = np.asarray([0, 1, 1, 2])
    probs = np.full((4, 3), 1.0 / 3.0)
    cj, uncounted = confident_joint(probs, labels)
    assert uncounted == 0
    assert cj[:, 1:].sum() == 0
    np.testing.assert_array_equal(cj[:, 0], [1, 2, 1])


def test_empty_class_gets_sentinel_threshold():
    labels = np.asarray([0, 0])
    probs = np.asarray([[0.7, 0.3], [0.8, 0.2]])
    t = class_thresholds(probs, labels)
    assert t[0] == pytest.approx(0.75)
    assert np.isinf(t[1])
    cj, _ = confident_joint(probs, labels)
    assert cj[:, 1].sum() == 0  # nothing can clear an infinite threshold


def test_single_member_class_threshold():
    t = class_thresholds(np.asarray([[1.0, 0.0]]), np.asarray([0]))
    assert t[0] == 1.0


def test_joint_zero_row_stays_zero():
    cj = np.asarray([[3, 1], [0, 0]])
    labels = np.asarray([0, 0, 0, 0, 1, 1])
    joint = joint_distribution(cj, labels)
    assert joint[1].sum() == 0.0
    assert joint.sum() == pytest.approx(1.0, abs=1e-12)


def test_joint_all_zero_counts_error():
    with pytest.raises(DataError):
        joint_distribution(np.zeros((2, 2)), np.asarray([0, 1]))


def test_conditional_identity_and_fallback():
    diag = np.diag([0.6, 0.4])
    cond, fallback = conditional_transition(diag)
    np.testing.assert_allclose(cond, np.eye(2), atol=1e-12)
    assert fallback == []

    joint = np.asarray([[0.5, 0.0], [0.5, 0.0]])
    cond, fallback = conditional_transition(joint)
    np.testing.assert_allclose(cond[:, 1], [0.5, 0.5])
    assert fallback == [1]


@st.composite
def probs_and_labels(draw):
    n = draw(st.integers(2, 40))
    c = draw(st.integers(2, 5))
    raw = draw(st.lists(st.floats(0.01, 1.0), min_size=n * c, max_size=n * c))
    probs = np.asarray(raw).reshape(n, c)
    probs /= probs.sum(axis=1, keepdims=True)
    labels = np.asarray(draw(st.lists(st.integers(0, c - 1), min_size=n,
                                      max_size=n)))
    return probs, labels


@settings(derandomize=True, max_examples=60, deadline=None)
@given(probs_and_labels())
def test_invariants_random(data):
    probs, labels = data
    t = class_thresholds(probs, labels)
    cj, uncounted = confident_joint(probs, labels, t)
    # counted mass balances: sum C == n - uncounted
    assert cj.sum() == len(labels) - uncounted
    if cj.sum() == 0:
        return
    joint = joint_distribution(cj, labels)
    assert joint.min() >= 0
    assert abs(joint.sum() - 1.0) < 1e-9
    cond, fallback = conditional_transition(joint)
    for j in range(cond.shape[1]):
        if j in fallback:
            np.testing.assert_array_equal(cond[:, j], 1.0 / cond.shape[0])
        else:
            assert abs(cond[:, j].sum() - 1.0) < 1e-9


def test_input_validation():
    with pytest.raises(DataError):
        class_thresholds(np.ones((2, 2)), np.asarray([0]))
    with pytest.raises(DataError):
        class_thresholds(np.ones((2, 2)), np.asarray([0, 5]))
    with pytest.raises(DataError):
        confident_joint(FIXTURE_PROBS, FIXTURE_LABELS, np.asarray([0.5]))
