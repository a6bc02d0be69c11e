"""Local HTTP JSON API over an audit report for human triage.

Serves ranked records, per-node neighborhood context, verdict submission
into an append-only JSON-lines log, progress counts, and cleaned-label
export. Loopback-only by design; persistence is the log file itself.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import report as report_mod
from .errors import DataError
from .graph import Graph

log = logging.getLogger(__name__)

DEFAULT_LIMIT = 50


class ReviewSession:
    """Shared state for one served report: records, graph context, verdicts."""

    def __init__(self, report: dict, graph: Graph, log_path,
                 probs: np.ndarray | None = None):
        self.report = report
        self.graph = graph
        self.log_path = log_path
        self.probs = probs
        self.records = report["records"]
        self.k_hops = int(report["config"].get("k_hops", 1))
        self.record_index = {r["node_id"]: r for r in self.records}
        self.write_lock = threading.Lock()
        self.adjacency = [[] for _ in range(graph.n)]
        for u, v in graph.edges:
            self.adjacency[u].append(int(v))
            self.adjacency[v].append(int(u))

    # -- reads ------------------------------------------------------------

    def _effective(self) -> dict[int, report_mod.Verdict]:
        verdicts = report_mod.load_verdicts(self.log_path,
                                            num_classes=self.graph.c,
                                            num_nodes=self.graph.n)
        return report_mod.effective_verdicts(verdicts)

    def ranked(self, offset: int, limit: int) -> dict:
        effective = self._effective()
        window = self.records[offset:offset + limit]
        out = []
        for rec in window:
            item = dict(rec)
            v = effective.get(rec["node_id"])
            item["verdict"] = v.verdict if v else None
            out.append(item)
        return {"schema": report_mod.SCHEMA_VERSION, "dataset": self.report["dataset"],
                "total": len(self.records), "offset": offset, "limit": limit,
                "num_classes": self.graph.c, "records": out}

    def _hop_sets(self, start: int) -> list[list[int]]:
        seen = {start}
        frontier = [start]
        hops = []
        for _ in range(self.k_hops):
            nxt = sorted({w for u in frontier for w in self.adjacency[u]} - seen)
            seen.update(nxt)
            hops.append(nxt)
            frontier = nxt
        return hops

    def node_detail(self, node_id: int) -> dict:
        rec = self.record_index.get(node_id)
        if rec is None:
            raise KeyError(node_id)
        effective = self._effective()

        def describe(v: int) -> dict:
            info = {"node_id": v, "label": int(self.graph.labels[v]),
                    "split": str(self.graph.splits[v])}
            if self.probs is not None:
                info["p_row"] = [float(x) for x in self.probs[v]]
            r = self.record_index.get(v)
            if r is not None:
                info["mislabel_score"] = r["mislabel_score"]
            return info

        neighbors = [{"hop": k + 1, "nodes": [describe(v) for v in hop]}
                     for k, hop in enumerate(self._hop_sets(node_id))]
        v = effective.get(node_id)
        detail = {"record": dict(rec), "neighbors": neighbors,
                  "verdict": v.to_json() if v else None}
        if self.probs is not None:
            detail["p_row"] = [float(x) for x in self.probs[node_id]]
        return detail

    def progress(self) -> dict:
        effective = self._effective()
        counts = report_mod.verdict_counts(effective)
        return {"counts": counts, "reviewed": len(effective),
                "total": len(self.records),
                "flagged": sum(1 for r in self.records if r["flagged"])}

    def export(self) -> dict:
        label_csv, split_csv = report_mod.export_clean(self.graph, self._effective())
        return {"label_csv": label_csv, "split_csv": split_csv}

    # -- writes -----------------------------------------------------------

    def submit(self, obj: dict) -> dict:
        if isinstance(obj, dict) and "timestamp" not in obj:
            obj = dict(obj)
            obj["timestamp"] = (datetime.now(timezone.utc)
                                .isoformat(timespec="seconds")
                                .replace("+00:00", "Z"))
        verdict = report_mod.validate_verdict(obj, num_classes=self.graph.c)
        if verdict.node_id not in self.record_index:
            raise KeyError(verdict.node_id)
        with self.write_lock:
            report_mod.append_verdict(self.log_path, verdict)
        return verdict.to_json()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    session: ReviewSession = None
    ui_dir: Path | None = None

    # -- plumbing ----------------------------------------------------------

    def log_message(self, fmt, *args):
        log.debug("%s " + fmt, self.address_string(), *args)

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _query_int(self, qs: dict, name: str, default: int, minimum: int = 0) -> int:
        raw = qs.get(name, [None])[0]
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise DataError(f"{name}: must be an integer")
        if value < minimum:
            raise DataError(f"{name}: must be >= {minimum}")
        return value

    # -- routes -----------------------------------------------------------

    def do_GET(self):
        try:
            url = urlparse(self.path)
            path = url.path
            qs = parse_qs(url.query)
            if path == "/api/report":
                offset = self._query_int(qs, "offset", 0)
                limit = self._query_int(qs, "limit", DEFAULT_LIMIT, minimum=1)
                self._send_json(200, self.session.ranked(offset, limit))
            elif path.startswith("/api/node/"):
                raw = path[len("/api/node/"):]
                try:
                    node_id = int(raw)
                except ValueError:
                    self._send_error_json(404, f"not a node id: {raw!r}")
                    return
                try:
                    self._send_json(200, self.session.node_detail(node_id))
                except KeyError:
                    self._send_error_json(404, f"node {node_id} has no audit record")
            elif path == "/api/progress":
                self._send_json(200, self.session.progress())
            elif path == "/api/export":
                self._send_json(200, self.session.export())
            elif self.ui_dir is not None:
                self._serve_static(path)
            else:
                self._send_error_json(404, f"unknown endpoint {path}")
        except DataError as exc:
            self._send_error_json(400, str(exc))
        except Exception:
            log.exception("GET %s failed", self.path)
            self._send_error_json(500, "internal error")

    def do_POST(self):
        try:
            if urlparse(self.path).path != "/api/verdict":
                self._send_error_json(404, f"unknown endpoint {self.path}")
                return
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length)
            try:
                obj = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                self._send_error_json(400, "body is not valid JSON")
                return
            try:
                stored = self.session.submit(obj)
            except KeyError as exc:
                self._send_error_json(404, f"node {exc.args[0]} has no audit record")
                return
            except DataError as exc:
                self._send_error_json(400, str(exc))
                return
            except OSError as exc:
                log.error("verdict append failed: %s", exc)
                self._send_error_json(500, "could not persist verdict")
                return
            self._send_json(200, {"ok": True, "verdict": stored})
        except Exception:
            log.exception("POST %s failed", self.path)
            self._send_error_json(500, "internal error")

    def _serve_static(self, path: str) -> None:
        name = "index.html" if path == "/" else path.lstrip("/")
        target = (self.ui_dir / name).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            self._send_error_json(404, f"no such file {path}")
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def build_server(report: dict, graph: Graph, log_path, port: int = 0,
                 host: str = "127.0.0.1", probs: np.ndarray | None = None,
                 ui_dir=None) -> ThreadingHTTPServer:
    """Construct the HTTP server; caller runs serve_forever (or a thread)."""
    session = ReviewSession(report, graph, log_path, probs=probs)
    handler = type("BoundHandler", (_Handler,), {
        "session": session,
        "ui_dir": Path(ui_dir) if ui_dir else None,
    })
    return ThreadingHTTPServer((host, port), handler)


def serve(report: dict, graph: Graph, log_path, port: int,
          host: str = "127.0.0.1", probs: np.ndarray | None = None,
          ui_dir=None) -> None:
    server = build_server(report, graph, log_path, port=port, host=host,
                          probs=probs, ui_dir=ui_dir)
    addr = server.server_address
    print(f"serving audit review on http://{addr[0]}:{addr[1]}/ "
          f"(verdict log: {log_path})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
