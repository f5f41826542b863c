"""HTTP labeling server (protocol version "cac/1").

Runs the active loop on the main thread and pauses at every oracle
query; a small JSON-over-HTTP protocol exposes run state so a browser
console (or a scripted client) can watch progress and answer the
pending query.  The loop thread is the only writer of clustering state:
request handlers read a snapshot under a lock and push answers through
a single-consumer queue, so there is no concurrent mutation.

Endpoints::

    GET  /api/state                  phase, level, counts, pending query
    GET  /api/points?page=&fields=   paginated point records
    POST /api/label {point_id,label} answer the pending query
    GET  /api/report                 current (partial) run report

Submitting a label for anything but the pending point is rejected with
a 409-style response and leaves state unchanged; re-sending the answer
that was just accepted is idempotent.
"""
from __future__ import annotations

import json
import queue
import sys
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np

from .active import (BudgetExhausted, CallbackOracle, default_eta_constant,
                     eta_for, run)
from .data import pca_fit_transform
from .errors import ProtocolError

PROTOCOL_VERSION = "cac/1"
_POINT_FIELDS = ("coords", "pred", "confident", "component", "projection_2d")


class LabelServer:
    """Shared state between the loop thread and HTTP handlers."""

    def __init__(self, points, projection, schedule, eta_constant,
                 dataset_name: str):
        self._lock = threading.Lock()
        self._answers: queue.Queue = queue.Queue()
        self.points = np.asarray(points, dtype=float)
        self.projection = projection          # (M, 2) when q > 2, else None
        self.dataset_name = dataset_name
        M = self.points.shape[0]
        self._phase = "computing"
        self._level = {"n": schedule.n_start, "theta": schedule.theta_init,
                       "eta": eta_for(schedule.n_start, schedule.theta_init,
                                      eta_constant)}
        self._confident_count = 0
        self._queried = 0
        self._pending = None
        self._pending_consumed = False
        self._last_answer = None
        self._state = None                    # live ActiveState after level 1
        self._pred = np.zeros(M, dtype=int)
        self._conf_mask = np.zeros(M, dtype=bool)
        self._component = np.full(M, -1, dtype=int)
        self._queries: list = []
        self._report = {"complete": False, "dataset": dataset_name,
                        "levels": [], "assignments": self._pred.tolist(),
                        "confident": [], "query_total": 0, "queries": [],
                        "degraded": False}
        self.report_seen = threading.Event()

    # -- loop-thread side ---------------------------------------------------

    def ask(self, index: int) -> int:
        """Oracle callback: publish the pending query, block until a label
        arrives, then resume the loop.  Runs on the loop thread, so the
        active state is quiescent while we hold the floor."""
        index = int(index)
        with self._lock:
            st = self._state
            if st is not None:
                self._level = {"n": float(st.n), "theta": float(st.theta),
                               "eta": float(st.eta)}
                self._confident_count = int(st.confident.size)
            pend = {"point_id": index,
                    "coords": [float(v) for v in self.points[index]]}
            pend["projection_2d"] = self._project(index)
            self._pending = pend
            self._pending_consumed = False
            self._phase = "awaiting_label"
        label = int(self._answers.get())
        with self._lock:
            self._phase = "computing"
            self._pending = None
            self._last_answer = (index, label)
            self._queried += 1
            self._queries.append({"index": index, "label": label})
            self._report["query_total"] = self._queried
            self._report["queries"] = list(self._queries)
        return label

    def on_level(self, state) -> None:
        """Level hook: copy the quiescent state into the snapshot."""
        with self._lock:
            self._state = state
            self._level = {"n": float(state.n), "theta": float(state.theta),
                           "eta": float(state.eta)}
            self._confident_count = int(state.confident.size)
            self._pred = state.predicted.copy()
            mask = np.zeros(self.points.shape[0], dtype=bool)
            mask[state.confident] = True
            self._conf_mask = mask
            self._component = state.component_of.copy()
            self._report["levels"] = json.loads(json.dumps(state.history))
            self._report["assignments"] = [int(v) for v in state.predicted]
            self._report["confident"] = [int(v) for v in state.confident]
            self._report["degraded"] = bool(state.degraded)

    def finish(self, report) -> None:
        """Publish the final (or budget-truncated partial) report."""
        with self._lock:
            self._phase = "done"
            self._pending = None
            self._report = report.to_payload()
            self._pred = report.predicted.copy()
            self._conf_mask = report.confident_mask.copy()
            self._confident_count = int(report.confident_mask.sum())
            self._queried = report.query_total

    def _project(self, index: int):
        if self.projection is not None:
            return [float(v) for v in self.projection[index]]
        row = self.points[index]
        if row.size >= 2:
            return [float(row[0]), float(row[1])]
        return [float(row[0]), 0.0]

    # -- handler side ---------------------------------------------------------

    def state_payload(self) -> dict:
        with self._lock:
            return {"version": PROTOCOL_VERSION, "phase": self._phase,
                    "level": dict(self._level),
                    "counts": {"points": int(self.points.shape[0]),
                               "confident": self._confident_count,
                               "queried": self._queried},
                    "pending_query":
                        dict(self._pending) if self._pending else None}

    def points_payload(self, page: int, page_size: int, fields) -> dict:
        M = self.points.shape[0]
        lo = page * page_size
        hi = min(lo + page_size, M)
        with self._lock:
            pred = self._pred
            conf = self._conf_mask
            comp = self._component
            records = []
            for i in range(lo, hi):
                rec = {"id": i}
                if "coords" in fields:
                    rec["coords"] = [float(v) for v in self.points[i]]
                if "pred" in fields:
                    rec["pred"] = int(pred[i])
                if "confident" in fields:
                    rec["confident"] = bool(conf[i])
                if "component" in fields:
                    rec["component"] = int(comp[i])
                if "projection_2d" in fields:
                    rec["projection_2d"] = self._project(i)
                records.append(rec)
        return {"version": PROTOCOL_VERSION, "page": page,
                "page_size": page_size, "total": M, "points": records}

    def submit(self, point_id, label):
        """Validate and accept/reject a label; returns (status, payload)."""
        if (not isinstance(point_id, int) or isinstance(point_id, bool)
                or not isinstance(label, int) or isinstance(label, bool)):
            return 400, {"accepted": False,
                         "reason": "point_id and label must be integers"}
        if label < 1:
            return 400, {"accepted": False, "reason": "labels start at 1"}
        with self._lock:
            pending = self._pending
            if (pending is not None and not self._pending_consumed
                    and pending["point_id"] == point_id):
                self._pending_consumed = True
                self._answers.put(label)
                return 200, {"accepted": True}
            if self._last_answer == (point_id, label):
                # idempotent: a retry of the answer that was just accepted
                return 200, {"accepted": True, "reason": "duplicate"}
            if pending is None:
                reason = "no query is pending"
            else:
                reason = (f"pending query is point "
                          f"{pending['point_id']}, not {point_id}")
        return 409, {"accepted": False, "reason": reason}

    def report_payload(self) -> dict:
        with self._lock:
            payload = dict(self._report)
            payload["version"] = PROTOCOL_VERSION
            if self._phase == "done":
                self.report_seen.set()
        return payload


class _Handler(BaseHTTPRequestHandler):
    server_version = "cac/1"

    @property
    def ctx(self) -> LabelServer:
        return self.server.ctx          # type: ignore[attr-defined]

    def log_message(self, fmt, *args):   # quiet; the CLI owns stdout
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/api/state":
            self._send(200, self.ctx.state_payload())
        elif url.path == "/api/points":
            try:
                page, page_size, fields = self._points_params(url.query)
            except ValueError as exc:
                self._send(400, {"version": PROTOCOL_VERSION,
                                 "error": str(exc)})
                return
            self._send(200, self.ctx.points_payload(page, page_size, fields))
        elif url.path == "/api/report":
            self._send(200, self.ctx.report_payload())
        else:
            self._send(404, {"version": PROTOCOL_VERSION,
                             "error": "unknown endpoint"})

    def _points_params(self, query: str):
        qs = parse_qs(query)
        try:
            page = int(qs.get("page", ["0"])[0])
            page_size = int(qs.get("page_size", ["500"])[0])
        except ValueError:
            raise ValueError("page and page_size must be integers")
        if page < 0 or not 1 <= page_size <= 5000:
            raise ValueError("page must be >= 0, page_size in 1..5000")
        if "fields" in qs:
            fields = tuple(f for f in qs["fields"][0].split(",") if f)
            bad = [f for f in fields if f not in _POINT_FIELDS]
            if bad:
                raise ValueError(f"unknown fields: {', '.join(bad)}")
        else:
            fields = ("coords", "pred", "confident", "component")
            if self.ctx.projection is not None:
                fields += ("projection_2d",)
        return page, page_size, fields

    def do_POST(self):
        url = urlparse(self.path)
        if url.path != "/api/label":
            self._send(404, {"version": PROTOCOL_VERSION,
                             "error": "unknown endpoint"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"{}")
            if not isinstance(body, dict):
                raise ValueError
        except (ValueError, json.JSONDecodeError):
            self._send(400, {"version": PROTOCOL_VERSION, "accepted": False,
                             "reason": "body must be a JSON object"})
            return
        status, payload = self.ctx.submit(body.get("point_id"),
                                          body.get("label"))
        payload["version"] = PROTOCOL_VERSION
        self._send(status, payload)


def serve_run(cfg, ds, pts, config) -> int:
    """Run the active loop behind the labeling protocol.  Blocks until the
    run finishes (with ``--exit-when-done``) or until interrupted."""
    from .cli import EXIT_BUDGET, EXIT_OK, write_artifacts

    schedule = cfg.schedule()
    eta_constant = (schedule.eta_constant if schedule.eta_constant is not None
                    else default_eta_constant(pts, schedule))
    projection = None
    if pts.shape[1] > 2:
        _, projection = pca_fit_transform(pts, 2)
    ctx = LabelServer(pts, projection, schedule, eta_constant, ds.name)
    try:
        httpd = ThreadingHTTPServer(("127.0.0.1", cfg.port), _Handler)
    except OSError as exc:
        raise ProtocolError(f"cannot bind port {cfg.port}: {exc}") from exc
    httpd.ctx = ctx                      # type: ignore[attr-defined]
    httpd.daemon_threads = True
    port = httpd.server_address[1]
    print(f"serving on http://127.0.0.1:{port}", flush=True)
    worker = threading.Thread(target=httpd.serve_forever, daemon=True)
    worker.start()

    oracle = CallbackOracle(ctx.ask, budget=cfg.query_budget)
    code = EXIT_OK
    try:
        report, _ = run(pts, oracle, schedule, config, truth=ds.labels,
                        dataset_name=ds.name, level_hook=ctx.on_level)
    except BudgetExhausted as exc:
        report = exc.report
        code = EXIT_BUDGET
        print(f"error: {exc}", file=sys.stderr)
    write_artifacts(cfg.out_dir, report)
    ctx.finish(report)
    print(f"done: {report.query_total} queries; artifacts in {cfg.out_dir}",
          flush=True)
    if cfg.exit_when_done:
        # hold the final report up long enough for the client's last poll
        ctx.report_seen.wait(timeout=60.0)
    else:
        try:
            while True:
                time.sleep(3600.0)
        except KeyboardInterrupt:
            pass
    httpd.shutdown()
    return code
