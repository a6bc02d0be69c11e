"""Audit report serialization, reviewer verdicts, and cleaned-label export.

The report is a schema-versioned JSON document with per-node records sorted
by descending mislabel score. Verdicts live in an append-only JSON-lines
log; a node's effective verdict is its latest entry. Export merges the two
into label/split CSVs in the loader's own input format.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .audit import AuditResult
from .errors import DataError, ParseError
from .graph import EXCLUDED, Graph

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

VERDICT_CLASSES = ("clear_mislabel", "likely_mislabel", "ambiguous",
                   "likely_ok", "clear_ok")
MISLABEL_VERDICTS = ("clear_mislabel", "likely_mislabel")
OK_VERDICTS = ("likely_ok", "clear_ok")


def _transition_json(est) -> dict:
    thresholds = [t if np.isfinite(t) else None for t in est.thresholds.tolist()]
    return {
        "thresholds": thresholds,
        "confident_joint": est.confident_joint.tolist(),
        "uncounted": est.uncounted,
        "joint": est.joint.tolist(),
        "conditional": est.conditional.tolist(),
        "fallback_columns": list(est.fallback_columns),
        "noise_rate": est.noise_rate,
    }


def build_report(dataset: str, g: Graph, result: AuditResult) -> dict:
    """Assemble the JSON-ready audit report for a finished run."""
    records = []
    for v in np.flatnonzero(g.labels >= 0):
        rec = {
            "node_id": int(v),
            "given_label": int(g.labels[v]),
            "mislabel_score": float(result.scores[v]),
            "flagged": bool(result.flags[v]),
        }
        if result.flags[v]:
            rec["suggested_label"] = int(result.suggested[v])
        records.append(rec)
    records.sort(key=lambda r: (-r["mislabel_score"], r["node_id"]))
    config = {
        "k_hops": result.k_hops,
        "threshold_policy": result.policy,
        "threshold": result.threshold,
        "seed": result.seed,
        "synth_ratio": result.synth_ratio,
        "num_classes": g.c,
    }
    if result.conformal_info is not None:
        config["conformal"] = result.conformal_info
    return {
        "schema": SCHEMA_VERSION,
        "dataset": dataset,
        "config": config,
        "transition": _transition_json(result.transition),
        "records": records,
    }


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")


def load_report(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            report = json.load(fh)
    except OSError as exc:
        raise ParseError(path, 0, f"cannot read report: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from exc
    if report.get("schema") != SCHEMA_VERSION:
        raise DataError(f"unsupported report schema {report.get('schema')!r}")
    return report


def _parse_timestamp(text: str) -> datetime:
    # RFC3339 'Z' suffix predates fromisoformat support on 3.10
    return datetime.fromisoformat(text.replace("Z", "+00:00"))


@dataclass(frozen=True)
class Verdict:
    node_id: int
    verdict: str
    corrected_label: int | None
    reviewer: str
    timestamp: str
    order: int = 0  # file position, breaks timestamp ties (later wins)

    @property
    def when(self) -> datetime:
        return _parse_timestamp(self.timestamp)

    def to_json(self) -> dict:
        out = {"node_id": self.node_id, "verdict": self.verdict,
               "reviewer": self.reviewer, "timestamp": self.timestamp}
        if self.corrected_label is not None:
            out["corrected_label"] = self.corrected_label
        return out


def validate_verdict(obj: dict, num_classes: int | None = None,
                     num_nodes: int | None = None) -> Verdict:
    """Check one verdict object; raise DataError naming the bad field."""
    if not isinstance(obj, dict):
        raise DataError("verdict must be a JSON object")
    node_id = obj.get("node_id")
    if not isinstance(node_id, int) or isinstance(node_id, bool) or node_id < 0:
        raise DataError("node_id: must be a non-negative integer")
    if num_nodes is not None and node_id >= num_nodes:
        raise DataError(f"node_id: {node_id} outside [0, {num_nodes})")
    verdict = obj.get("verdict")
    if verdict not in VERDICT_CLASSES:
        raise DataError(f"verdict: must be one of {', '.join(VERDICT_CLASSES)}")
    corrected = obj.get("corrected_label")
    if corrected is not None:
        if not isinstance(corrected, int) or isinstance(corrected, bool) or corrected < 0:
            raise DataError("corrected_label: must be a non-negative integer")
        if num_classes is not None and corrected >= num_classes:
            raise DataError(f"corrected_label: {corrected} outside [0, {num_classes})")
    reviewer = obj.get("reviewer")
    if not isinstance(reviewer, str) or not reviewer:
        raise DataError("reviewer: must be a non-empty string")
    timestamp = obj.get("timestamp")
    if not isinstance(timestamp, str):
        raise DataError("timestamp: must be an RFC3339 string")
    try:
        _parse_timestamp(timestamp)
    except ValueError:
        raise DataError(f"timestamp: {timestamp!r} is not RFC3339")
    unknown = set(obj) - {"node_id", "verdict", "corrected_label",
                          "reviewer", "timestamp"}
    if unknown:
        raise DataError(f"unknown field(s): {', '.join(sorted(unknown))}")
    return Verdict(node_id=node_id, verdict=verdict, corrected_label=corrected,
                   reviewer=reviewer, timestamp=timestamp)


def load_verdicts(path, num_classes: int | None = None,
                  num_nodes: int | None = None) -> list[Verdict]:
    """Read the JSON-lines verdict log; a missing file is an empty log."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        return []
    except OSError as exc:
        raise ParseError(path, 0, f"cannot read verdict log: {exc}") from exc
    out = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, lineno, f"invalid JSON: {exc.msg}")
        try:
            v = validate_verdict(obj, num_classes, num_nodes)
        except DataError as exc:
            raise ParseError(path, lineno, str(exc))
        out.append(Verdict(v.node_id, v.verdict, v.corrected_label,
                           v.reviewer, v.timestamp, order=lineno))
    return out


def effective_verdicts(verdicts: list[Verdict]) -> dict[int, Verdict]:
    """Latest timestamp wins per node; file order breaks exact ties."""
    best: dict[int, Verdict] = {}
    for v in verdicts:
        cur = best.get(v.node_id)
        if cur is None:
            best[v.node_id] = v
            continue
        log.info("conflicting verdicts for node %d (%s vs %s)",
                 v.node_id, cur.verdict, v.verdict)
        if (v.when, v.order) >= (cur.when, cur.order):
            best[v.node_id] = v
    return best


def verdict_counts(effective: dict[int, Verdict]) -> dict[str, int]:
    counts = {name: 0 for name in VERDICT_CLASSES}
    for v in effective.values():
        counts[v.verdict] += 1
    return counts


def append_verdict(path, verdict: Verdict) -> None:
    """Append one verdict as a single line, durably."""
    line = json.dumps(verdict.to_json(), sort_keys=True)
    if "\n" in line:
        raise DataError("verdict serialization spans lines")
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def labels_csv(labels: np.ndarray) -> str:
    rows = ["node_id,label"]
    for v in range(len(labels)):
        value = EXCLUDED if labels[v] < 0 else str(int(labels[v]))
        rows.append(f"{v},{value}")
    return "\n".join(rows) + "\n"


def splits_csv(splits: np.ndarray) -> str:
    rows = ["node_id,split"]
    for v in range(len(splits)):
        if splits[v] != EXCLUDED:
            rows.append(f"{v},{splits[v]}")
    return "\n".join(rows) + "\n"


def export_clean(g: Graph, effective: dict[int, Verdict]) -> tuple[str, str]:
    """Apply verdicts to the graph's labels/splits; return (label, split) CSVs.

    Mislabel verdicts with a corrected label replace the label; mislabel
    verdicts without one, and ambiguous verdicts, exclude the node (label
    marker, dropped from splits). Ok verdicts and unreviewed nodes keep
    their data untouched.
    """
    labels = g.labels.copy()
    splits = g.splits.copy()
    for node_id, v in effective.items():
        if node_id >= g.n:
            raise DataError(f"verdict for unknown node {node_id}")
        if v.verdict in MISLABEL_VERDICTS and v.corrected_label is not None:
            if v.corrected_label >= g.c:
                raise DataError(
                    f"corrected label {v.corrected_label} outside [0, {g.c})")
            labels[node_id] = v.corrected_label
        elif v.verdict in MISLABEL_VERDICTS or v.verdict == "ambiguous":
            labels[node_id] = -1
            splits[node_id] = EXCLUDED
        # ok verdicts: keep as-is
    return labels_csv(labels), splits_csv(splits)
