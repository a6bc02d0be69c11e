"""Shared fixtures: tiny deterministic graphs and dataset file writers."""

import numpy as np
import pytest

from graphaudit.graph import Graph


def random_graph(rng: np.random.Generator, n_max: int = 12,
                 edge_prob: float = 0.35, c: int = 3) -> Graph:
    """Small random graph with labels and splits, for property tests."""
    n = int(rng.integers(2, n_max + 1))
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.random() < edge_prob]
    edges_arr = (np.asarray(edges, dtype=np.int64) if edges
                 else np.empty((0, 2), dtype=np.int64))
    labels = rng.integers(0, c, n).astype(np.int64)
    splits = np.asarray(rng.choice(["train", "val", "test"], n), dtype="<U8")
    return Graph(n=n, c=c, edges=edges_arr, labels=labels, splits=splits)


@pytest.fixture
def path_graph() -> Graph:
    """0 - 1 - 2 with degrees (1, 2, 1)."""
    return Graph(n=3, c=2,
                 edges=np.asarray([[0, 1], [1, 2]], dtype=np.int64),
                 labels=np.asarray([0, 1, 0], dtype=np.int64),
                 splits=np.asarray(["train", "val", "test"], dtype="<U8"))


def write_dataset(tmpdir, g: Graph, features: bool = False) -> dict:
    """Write a Graph to loader-format files; return the path map."""
    paths = {
        "edges": tmpdir / "edges.txt",
        "labels": tmpdir / "labels.csv",
        "splits": tmpdir / "splits.csv",
    }
    with open(paths["edges"], "w") as fh:
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")
    with open(paths["labels"], "w") as fh:
        fh.write("node_id,label\n")
        for v in range(g.n):
            value = "excluded" if g.labels[v] < 0 else int(g.labels[v])
            fh.write(f"{v},{value}\n")
    with open(paths["splits"], "w") as fh:
        fh.write("node_id,split\n")
        for v in range(g.n):
            if g.splits[v] != "excluded":
                fh.write(f"{v},{g.splits[v]}\n")
    if features:
        assert g.features is not None
        paths["features"] = tmpdir / "features.csv"
        np.savetxt(paths["features"], g.features, delimiter=",", fmt="%.17g")
    return paths
