"""Synthetic planted-partition generator tests.

Oracles: exact pair-count combinatorics for degenerate probabilities, a
binomial three-sigma band for edge counts, and per-class arithmetic for the
stratified split sizes.
"""

import numpy as np
import pytest

from graphaudit.errors import DataError
from graphaudit.sbm import SbmConfig, gen_sbm, stratified_splits


def test_deterministic_per_seed():
    cfg = SbmConfig(n=120, c=3, p_in=0.1, p_out=0.01, seed=17)
    g_a, g_b = gen_sbm(cfg), gen_sbm(cfg)
    np.testing.assert_array_equal(g_a.edges, g_b.edges)
    np.testing.assert_array_equal(g_a.labels, g_b.labels)
    np.testing.assert_array_equal(g_a.splits, g_b.splits)
    np.testing.assert_array_equal(g_a.features, g_b.features)


def test_seed_changes_edges():
    g_a = gen_sbm(SbmConfig(n=120, c=3, p_in=0.1, p_out=0.01, seed=0))
    g_b = gen_sbm(SbmConfig(n=120, c=3, p_in=0.1, p_out=0.01, seed=1))
    assert g_a.edges.shape != g_b.edges.shape or (g_a.edges != g_b.edges).any()


def test_round_robin_labels():
    g = gen_sbm(SbmConfig(n=10, c=3, p_in=0.5, p_out=0.0, seed=2))
    np.testing.assert_array_equal(g.labels, np.arange(10) % 3)


def test_no_cross_edges_when_p_out_zero():
    g = gen_sbm(SbmConfig(n=150, c=3, p_in=0.2, p_out=0.0, seed=3))
    assert g.edges.size > 0
    assert np.all(g.labels[g.edges[:, 0]] == g.labels[g.edges[:, 1]])


def test_full_within_class_cliques_when_p_in_one():
    g = gen_sbm(SbmConfig(n=30, c=3, p_in=1.0, p_out=0.0, seed=4))
    # each class has 10 members: exactly 3 * C(10, 2) edges, all sorted u < v
    assert g.edges.shape == (3 * 45, 2)
    assert np.all(g.edges[:, 0] < g.edges[:, 1])
    order = np.lexsort((g.edges[:, 1], g.edges[:, 0]))
    np.testing.assert_array_equal(order, np.arange(g.edges.shape[0]))


def test_edge_counts_within_three_sigma():
    # oracle: within- and cross-class edge counts are binomial with known
    # pair totals; check both stay inside a three-sigma band
    n, c, p_in, p_out = 600, 3, 0.05, 0.01
    g = gen_sbm(SbmConfig(n=n, c=c, p_in=p_in, p_out=p_out, seed=5))
    same = g.labels[g.edges[:, 0]] == g.labels[g.edges[:, 1]]
    per_class = n // c
    pairs_in = c * per_class * (per_class - 1) // 2
    pairs_out = (c * (c - 1) // 2) * per_class * per_class
    mean_in, sd_in = pairs_in * p_in, np.sqrt(pairs_in * p_in * (1 - p_in))
    mean_out, sd_out = pairs_out * p_out, np.sqrt(pairs_out * p_out * (1 - p_out))
    assert abs(int(same.sum()) - mean_in) <= 3 * sd_in
    assert abs(int((~same).sum()) - mean_out) <= 3 * sd_out


def test_stratified_split_sizes():
    rng = np.random.Generator(np.random.Philox(6))
    labels = np.arange(100) % 4  # 25 per class
    splits = stratified_splits(labels, (0.4, 0.3, 0.3), rng)
    for cls in range(4):
        members = splits[labels == cls]
        assert int((members == "train").sum()) == 10  # floor(0.4 * 25)
        assert int((members == "val").sum()) == 7  # floor(0.3 * 25)
        assert int((members == "test").sum()) == 8  # remainder
    assert set(np.unique(splits)) == {"train", "val", "test"}


def test_feature_means_sit_on_class_axes():
    # law of large numbers: with 3000 nodes per class the sample mean of each
    # class must land within 5 sigma/sqrt(m) of the planted mean
    cfg = SbmConfig(n=9000, c=3, p_in=0.002, p_out=0.0005, signal=1.5, seed=7)
    g = gen_sbm(cfg)
    assert g.features.shape == (9000, 3)
    for cls in range(3):
        mean = g.features[g.labels == cls].mean(axis=0)
        expected = np.zeros(3)
        expected[cls] = 1.5
        np.testing.assert_allclose(mean, expected, rtol=0,
                                   atol=5.0 / np.sqrt(3000))


def test_explicit_feature_dim_wraps_classes():
    cfg = SbmConfig(n=400, c=4, p_in=0.1, p_out=0.01, d=2, signal=2.0, seed=8)
    g = gen_sbm(cfg)
    assert g.features.shape == (400, 2)
    # classes 0 and 2 share axis 0; classes 1 and 3 share axis 1
    m0 = g.features[g.labels == 0].mean(axis=0)
    m2 = g.features[g.labels == 2].mean(axis=0)
    assert abs(m0[0] - 2.0) < 0.5 and abs(m2[0] - 2.0) < 0.5


def test_config_rejects_inverted_probabilities():
    with pytest.raises(DataError):
        SbmConfig(n=10, c=2, p_in=0.01, p_out=0.1)
    with pytest.raises(DataError):
        SbmConfig(n=10, c=2, p_in=0.1, p_out=0.1)


def test_config_rejects_bad_fractions():
    with pytest.raises(DataError):
        SbmConfig(n=10, c=2, p_in=0.1, p_out=0.01, fractions=(0.5, 0.5, 0.5))


def test_config_rejects_nonpositive_sizes():
    with pytest.raises(DataError):
        SbmConfig(n=0, c=2, p_in=0.1, p_out=0.01)
    with pytest.raises(DataError):
        SbmConfig(n=10, c=0, p_in=0.1, p_out=0.01)


def test_generated_graph_validates():
    g = gen_sbm(SbmConfig(n=50, c=2, p_in=0.3, p_out=0.05, seed=9))
    g.validate()  # no duplicate edges, labels in range, splits tagged
    pairs = {tuple(e) for e in g.edges.tolist()}
    assert len(pairs) == g.edges.shape[0]
