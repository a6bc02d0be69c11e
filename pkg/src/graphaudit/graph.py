"""Graph loading, symmetric adjacency normalization and k-hop propagation.

The propagation operator used throughout is S_k, the k-th power of the
degree-normalized adjacency with its diagonal zeroed so that a node's own
signal never feeds back into its neighborhood aggregate.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import DataError, ParseError

log = logging.getLogger(__name__)

SPLIT_TAGS = ("train", "val", "test")

# Label marker for nodes whose label has been disavowed by a reviewer.
# Such nodes stay in the graph but belong to no split.
EXCLUDED = "excluded"


@dataclass(eq=False)
class Graph:
    """Undirected graph with per-node labels and split assignments.

    ``labels[v] == -1`` marks an excluded node (no usable label); excluded
    nodes carry the ``"excluded"`` split tag and belong to no train/val/test
    mask. All other labels lie in ``[0, c)``.
    """

    n: int
    c: int
    edges: np.ndarray  # (m, 2) int64, each row (u, v) with u < v
    labels: np.ndarray  # (n,) int64, -1 for excluded
    splits: np.ndarray  # (n,) unicode tags
    features: np.ndarray | None = None  # (n, d) float64
    dropped_edges: int = 0  # self-loops and duplicates dropped on load

    def split_nodes(self, tag: str) -> np.ndarray:
        return np.flatnonzero(self.splits == tag)

    @property
    def train_nodes(self) -> np.ndarray:
        return self.split_nodes("train")

    @property
    def val_nodes(self) -> np.ndarray:
        return self.split_nodes("val")

    @property
    def test_nodes(self) -> np.ndarray:
        return self.split_nodes("test")

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edges.size:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def validate(self) -> None:
        if self.edges.size:
            if self.edges.min() < 0 or self.edges.max() >= self.n:
                raise DataError("edge endpoint outside [0, n)")
            if np.any(self.edges[:, 0] == self.edges[:, 1]):
                raise DataError("self-loop present")
            pairs = {(int(u), int(v)) for u, v in self.edges}
            if len(pairs) != self.edges.shape[0]:
                raise DataError("duplicate edge present")
        excluded = self.labels == -1
        bad = ~excluded & ((self.labels < 0) | (self.labels >= self.c))
        if np.any(bad):
            raise DataError("label outside [0, c)")
        known = set(SPLIT_TAGS) | {EXCLUDED}
        if not set(np.unique(self.splits)) <= known:
            raise DataError("unknown split tag")
        if np.any(excluded != (self.splits == EXCLUDED)):
            raise DataError("excluded labels and excluded splits disagree")


def one_hot(labels: np.ndarray, c: int) -> np.ndarray:
    """One-hot encode labels into an (n, c) float matrix.

    Excluded nodes (label -1) get all-zero rows.
    """
    out = np.zeros((len(labels), c), dtype=np.float64)
    valid = labels >= 0
    out[np.flatnonzero(valid), labels[valid]] = 1.0
    return out


def _read_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise ParseError(path, 0, f"cannot read file: {exc}") from exc


def _parse_label_field(text: str, path, lineno: int, c: int | None) -> int:
    if text == EXCLUDED:
        return -1
    try:
        label = int(text)
    except ValueError:
        raise ParseError(path, lineno, f"label {text!r} is not an integer")
    if label < 0:
        raise ParseError(path, lineno, f"label {label} is negative")
    if c is not None and label >= c:
        raise ParseError(path, lineno, f"label {label} >= class count {c}")
    return label


def _parse_id_csv(path, value_name: str):
    """Parse a two-column CSV with header ``node_id,<value_name>``."""
    lines = _read_lines(path)
    if not lines:
        raise ParseError(path, 1, "empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if header != ["node_id", value_name]:
        raise ParseError(path, 1, f"expected header 'node_id,{value_name}', got {lines[0]!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = next(csv.reader([line]))
        if len(parts) != 2:
            raise ParseError(path, lineno, f"expected 2 columns, got {len(parts)}")
        try:
            node_id = int(parts[0])
        except ValueError:
            raise ParseError(path, lineno, f"node_id {parts[0]!r} is not an integer")
        if node_id < 0:
            raise ParseError(path, lineno, f"node_id {node_id} is negative")
        rows.append((lineno, node_id, parts[1].strip()))
    return rows


def load_graph(edge_path, label_path, split_path, feature_path=None,
               num_classes: int | None = None) -> Graph:
    """Load a graph from an edge list plus label/split (and feature) CSVs.

    Directed input edges are symmetrized; self-loops and duplicate edges are
    dropped and counted in ``Graph.dropped_edges``. Nodes labelled with the
    ``excluded`` marker may be absent from the split file (they get the
    ``excluded`` tag), which lets cleaned exports re-ingest directly.
    """
    label_rows = _parse_id_csv(label_path, "label")
    if not label_rows:
        raise ParseError(label_path, 1, "no label rows")
    n = len(label_rows)
    labels = np.full(n, -2, dtype=np.int64)
    for lineno, node_id, text in label_rows:
        if node_id >= n:
            raise ParseError(label_path, lineno,
                             f"node_id {node_id} >= node count {n}")
        if labels[node_id] != -2:
            raise ParseError(label_path, lineno, f"duplicate node_id {node_id}")
        labels[node_id] = _parse_label_field(text, label_path, lineno, num_classes)
    if num_classes is None:
        if labels.max() < 0:
            raise DataError("all nodes excluded; class count unknown")
        c = int(labels.max()) + 1
    else:
        c = num_classes

    splits = np.full(n, "", dtype="<U8")
    for lineno, node_id, tag in _parse_id_csv(split_path, "split"):
        if node_id >= n:
            raise ParseError(split_path, lineno,
                             f"node_id {node_id} >= node count {n}")
        if tag not in SPLIT_TAGS:
            raise ParseError(split_path, lineno, f"unknown split tag {tag!r}")
        if splits[node_id]:
            raise ParseError(split_path, lineno, f"duplicate node_id {node_id}")
        splits[node_id] = tag
    for v in np.flatnonzero(splits == ""):
        if labels[v] == -1:
            splits[v] = EXCLUDED
        else:
            raise ParseError(split_path, 1, f"node {v} missing from split file")
    # An excluded label always implies the excluded split, even if the input
    # split file still listed the node.
    splits[labels == -1] = EXCLUDED

    features = None
    if feature_path is not None:
        lines = _read_lines(feature_path)
        rows, width = [], None
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(feature_path, lineno,
                                 f"expected {width} columns, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ParseError(feature_path, lineno, "non-numeric feature value")
        if len(rows) != n:
            raise ParseError(feature_path, len(lines),
                             f"expected {n} feature rows, got {len(rows)}")
        features = np.asarray(rows, dtype=np.float64)

    seen: set[tuple[int, int]] = set()
    edge_list: list[tuple[int, int]] = []
    dropped = 0
    for lineno, line in enumerate(_read_lines(edge_path), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ParseError(edge_path, lineno,
                             f"expected 2 node ids, got {len(parts)}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(edge_path, lineno, "non-integer node id")
        if u < 0 or v < 0:
            raise ParseError(edge_path, lineno, "negative node id")
        if u >= n or v >= n:
            raise ParseError(edge_path, lineno,
                             f"node id {max(u, v)} >= node count {n}")
        if u == v:
            dropped += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            dropped += 1
            continue
        seen.add(key)
        edge_list.append(key)
    if dropped:
        log.warning("%s: dropped %d self-loop/duplicate edges", edge_path, dropped)

    edges = (np.asarray(edge_list, dtype=np.int64) if edge_list
             else np.empty((0, 2), dtype=np.int64))
    g = Graph(n=n, c=c, edges=edges, labels=labels, splits=splits,
              features=features, dropped_edges=dropped)
    g.validate()
    return g


def normalized_adjacency(g: Graph) -> sparse.csr_array:
    """Return D^{-1/2} A D^{-1/2} as a symmetric sparse matrix.

    Rows of degree-0 nodes are all zero (the 0/0 entries are defined as 0).
    """
    deg = g.degrees().astype(np.float64)
    inv_sqrt = np.zeros(g.n)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    if g.num_edges == 0:
        return sparse.csr_array((g.n, g.n), dtype=np.float64)
    u, v = g.edges[:, 0], g.edges[:, 1]
    w = inv_sqrt[u] * inv_sqrt[v]
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    data = np.concatenate([w, w])  # same value both ways: exact symmetry
    a = sparse.csr_array((data, (rows, cols)), shape=(g.n, g.n))
    a.sum_duplicates()
    return a


def _sparse_power(a: sparse.csr_array, k: int) -> sparse.csr_array:
    out = a
    for _ in range(k - 1):
        out = out @ a
    return out


def power_diagonal(a_norm: sparse.csr_array, k: int) -> np.ndarray:
    """diag(a_norm^k) without materializing the full dense power.

    For k >= 3 the diagonal entries are the row-by-column inner products of
    the half powers a^ceil(k/2) and a^floor(k/2), keeping memory at the
    footprint of the half power.
    """
    if k < 1:
        raise DataError("k must be >= 1")
    if k == 1:
        return a_norm.diagonal()
    left = _sparse_power(a_norm, math.ceil(k / 2))
    right = left if k % 2 == 0 else _sparse_power(a_norm, k // 2)
    return np.asarray(left.multiply(right.T).sum(axis=1)).ravel()


def propagation_matrix(a_norm: sparse.csr_array, k: int) -> sparse.csr_array:
    """S_k: the k-th power of the normalized adjacency with zeroed diagonal."""
    if k < 1:
        raise DataError("k must be >= 1")
    s = _sparse_power(a_norm, k)
    s = sparse.csr_array(s)
    s.setdiag(0.0)
    s.eliminate_zeros()
    return s


def propagate(a_norm: sparse.csr_array, signal: np.ndarray, k: int) -> np.ndarray:
    """Compute S_k @ signal without materializing the dense k-th power.

    Iterates sparse-times-dense k times and then removes the self-signal
    contribution diag(a_norm^k) * signal.
    """
    if k < 1:
        raise DataError("k must be >= 1")
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim == 1:
        signal = signal[:, None]
    if signal.shape[0] != a_norm.shape[0]:
        raise DataError(
            f"signal has {signal.shape[0]} rows, adjacency is {a_norm.shape[0]}x{a_norm.shape[1]}"
        )
    out = signal
    for _ in range(k):
        out = a_norm @ out
    diag = power_diagonal(a_norm, k)
    return out - diag[:, None] * signal
