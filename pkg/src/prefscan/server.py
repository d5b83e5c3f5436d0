"""HTTP + WebSocket service exposing a live experiment to the human expert.

The experiment loop runs on a background thread; when it needs judgments it
parks on a condition variable while the endpoints collect them.  Judgments
are consumed exactly once (resubmissions replay the original ack), events
carry monotone sequence numbers so clients can deduplicate, and state reads
come from published snapshots rather than live loop internals.

Endpoints:
    GET  /api/sessions
    GET  /api/session/{sid}/pending
    POST /api/session/{sid}/judgment
    GET  /api/session/{sid}/state?downsample=k
    WS   /api/session/{sid}/events
"""

from __future__ import annotations

import asyncio
import base64
import io
import threading
import time
import traceback

import numpy as np
from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .dataset import Dataset, PayloadKind, extract_patch, grid_range
from .errors import StateError
from .judgments import Confidence, Judgment, Outcome, Source
from .session import (
    ExperimentConfig,
    SessionState,
    TraceExporter,
    initialize_session,
    run_step,
)
from .errors import CandidatesExhausted


def _png_b64(values: np.ndarray) -> str:
    from PIL import Image
    img = Image.fromarray((np.clip(values, 0, 1) * 255).astype(np.uint8),
                          mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class HumanJudge:
    """Blocking judge backed by the service's pending-comparison queue."""

    def __init__(self, live: "LiveSession"):
        self.live = live

    def judge(self, requests):
        return self.live.collect_judgments(requests)


class LiveSession:
    """One experiment session bridged between the loop thread and the API."""

    def __init__(self, session_id: str, cfg: ExperimentConfig,
                 dataset: Dataset, out_dir=None):
        self.id = session_id
        self.cfg = cfg
        self.dataset = dataset
        self.out_dir = out_dir
        self.lock = threading.Lock()
        self.cond = threading.Condition(self.lock)
        self.pending: dict = {}          # comparison_id -> view dict
        self.answered: dict = {}         # comparison_id -> (Judgment, ack)
        self.next_comparison_id = 1
        self.events: list = []
        self.error: str | None = None
        self.stopping = False
        self.published = {
            "step": 0, "measured": [], "mean": None, "var": None,
            "best": None, "beta": None, "finished": False, "initialized": False,
        }
        self._vmin, self._vmax = grid_range(dataset.structure)
        self.thread = threading.Thread(target=self._run, daemon=True,
                                       name=f"prefscan-{session_id}")

    def start(self):
        self.thread.start()

    def stop(self):
        with self.cond:
            self.stopping = True
            self.cond.notify_all()

    # -- loop thread ------------------------------------------------------

    def _run(self):
        judge = HumanJudge(self)
        exporter = (TraceExporter(self.out_dir, self.cfg)
                    if self.out_dir else None)
        try:
            session = initialize_session(self.cfg, self.dataset, judge)
            if exporter:
                exporter.write_init(session)
            self._publish(session)
            self._emit("map_updated", {"step": 0})
            while session.step < self.cfg.n_steps:
                try:
                    trace = run_step(session, judge)
                except CandidatesExhausted:
                    break
                if exporter:
                    exporter.append_step(session, trace)
                self._publish(session)
                self._emit("step_completed", {"step": trace.step})
                self._emit("map_updated", {"step": trace.step})
            session.finished = True
            self._publish(session)
            if exporter:
                exporter.finalize(session)
        except StateError:
            pass            # session stopped while waiting for judgments
        except Exception:
            with self.cond:
                self.error = traceback.format_exc()

    def _publish(self, session: SessionState):
        h, w = self.dataset.shape
        best = session.current_best_id() if session.measured else None
        try:
            beta = self.cfg.acquisition.beta_for_step(session.step + 1)
        except Exception:
            beta = self.cfg.acquisition.beta_schedule[-1].beta
        with self.cond:
            self.published = {
                "step": session.step,
                "measured": [int(i) for i in session.measured],
                "mean": session.mean_map.reshape(h, w).copy(),
                "var": session.var_map.reshape(h, w).copy(),
                "best": best,
                "beta": beta,
                "finished": session.finished,
                "initialized": True,
            }

    def _emit(self, etype: str, data: dict):
        with self.cond:
            self.events.append({"seq": len(self.events) + 1,
                                "type": etype, "data": data})
            self.cond.notify_all()

    # -- judge bridge ------------------------------------------------------

    def _candidate_view(self, cid: int) -> dict:
        ds = self.dataset
        r, c = ds.pixel_of(cid)
        patch = extract_patch(ds.structure, (r, c), self.cfg.window,
                              self._vmin, self._vmax)
        view = {
            "candidate_id": int(cid),
            "row": r, "col": c,
            "patch_png": _png_b64(patch.values),
            "patch": [[float(v) for v in row] for row in patch.values],
            "payload_kind": ds.payload_kind.value,
        }
        if ds.payload_kind is PayloadKind.SPECTRAL:
            view["payload"] = {
                "voltage": [float(v) for v in ds.voltage],
                "response": [float(v) for v in ds.spectral[r, c]],
            }
        else:
            half = self.cfg.window // 2
            r0, r1 = max(0, r - half), min(ds.shape[0], r + half + 1)
            c0, c1 = max(0, c - half), min(ds.shape[1], c + half + 1)
            view["payload"] = {
                "origin": [int(r0), int(c0)],
                "vectors": [[[float(x) for x in vec] for vec in row]
                            for row in ds.vectors[r0:r1, c0:c1]],
            }
        return view

    def collect_judgments(self, requests):
        with self.cond:
            ids = []
            for a, b in requests:
                cid = self.next_comparison_id
                self.next_comparison_id += 1
                self.pending[cid] = {
                    "comparison_id": cid,
                    "a": self._candidate_view(a),
                    "b": self._candidate_view(b),
                    "issued_at": time.time(),
                }
                ids.append(cid)
            self.events.append({"seq": len(self.events) + 1,
                                "type": "new_pending",
                                "data": {"count": len(ids),
                                         "comparison_ids": ids}})
            self.cond.notify_all()
            while any(cid not in self.answered for cid in ids):
                if self.stopping:
                    raise StateError("session stopped")
                self.cond.wait(timeout=0.2)
            out = [self.answered[cid][0] for cid in ids]
            for cid in ids:
                self.pending.pop(cid, None)
            return out

    # -- endpoint-side operations -----------------------------------------

    def pending_list(self):
        with self.cond:
            return sorted((p for cid, p in self.pending.items()
                           if cid not in self.answered),
                          key=lambda p: p["comparison_id"])

    def submit(self, comparison_id: int, outcome: str, confidence: str):
        try:
            out = Outcome(outcome)
            conf = Confidence(confidence)
        except ValueError:
            raise HTTPException(422, f"invalid outcome/confidence "
                                     f"({outcome!r}, {confidence!r})")
        if out is Outcome.TIE and not self.cfg.likelihood.tie_support_enabled:
            raise HTTPException(
                422, "TIE judgments are rejected: tie_support_enabled is "
                     "false for this session")
        with self.cond:
            if comparison_id in self.answered:
                _, ack = self.answered[comparison_id]
                replay = dict(ack)
                replay["replayed"] = True
                return replay
            if comparison_id not in self.pending:
                raise HTTPException(404, f"unknown comparison id {comparison_id}")
            item = self.pending[comparison_id]
            j = Judgment(item["a"]["candidate_id"], item["b"]["candidate_id"],
                         out, conf, Source.HUMAN)
            remaining = sum(1 for cid in self.pending
                            if cid not in self.answered) - 1
            ack = {"accepted": True, "comparison_id": comparison_id,
                   "remaining": remaining, "replayed": False}
            self.answered[comparison_id] = (j, ack)
            self.cond.notify_all()
            return dict(ack)

    def state_snapshot(self, downsample: int = 1):
        with self.cond:
            pub = dict(self.published)
            error = self.error
        h, w = self.dataset.shape
        k = max(1, int(downsample))
        snap = {
            "session": self.id,
            "step": pub["step"],
            "finished": pub["finished"],
            "initialized": pub["initialized"],
            "height": h, "width": w,
            "payload_kind": self.dataset.payload_kind.value,
            "tie_support_enabled": self.cfg.likelihood.tie_support_enabled,
            "n_steps": self.cfg.n_steps,
            "beta": pub["beta"],
            "current_best": pub["best"],
            "measured": [
                {"id": i, "row": i // w, "col": i % w}
                for i in pub["measured"]
            ],
            "error": error,
        }
        if pub["mean"] is not None:
            snap["utility_mean"] = pub["mean"][::k, ::k].tolist()
            snap["utility_variance"] = pub["var"][::k, ::k].tolist()
        return snap

    def events_since(self, since: int):
        with self.cond:
            return [e for e in self.events if e["seq"] > since]


class JudgmentBody(BaseModel):
    comparison_id: int
    outcome: str
    confidence: str


class SessionRegistry:
    def __init__(self):
        self.sessions: dict[str, LiveSession] = {}

    def add(self, live: LiveSession, start: bool = True):
        self.sessions[live.id] = live
        if start:
            live.start()
        return live

    def get(self, sid: str) -> LiveSession:
        if sid not in self.sessions:
            raise HTTPException(404, f"unknown session {sid!r}")
        return self.sessions[sid]

    def shutdown(self):
        for live in self.sessions.values():
            live.stop()


def create_app(registry: SessionRegistry) -> FastAPI:
    app = FastAPI(title="prefscan feedback service")
    app.state.registry = registry

    @app.get("/api/sessions")
    def list_sessions():
        return [{"id": live.id,
                 "step": live.published["step"],
                 "finished": live.published["finished"]}
                for live in registry.sessions.values()]

    @app.get("/api/session/{sid}/pending")
    def get_pending(sid: str):
        live = registry.get(sid)
        return {"session": sid, "pending": live.pending_list()}

    @app.post("/api/session/{sid}/judgment")
    def submit_judgment(sid: str, body: JudgmentBody):
        live = registry.get(sid)
        return live.submit(body.comparison_id, body.outcome, body.confidence)

    @app.get("/api/session/{sid}/state")
    def get_state(sid: str, downsample: int = Query(1, ge=1)):
        live = registry.get(sid)
        return live.state_snapshot(downsample)

    @app.websocket("/api/session/{sid}/events")
    async def events(ws: WebSocket, sid: str, since: int = Query(0, ge=0)):
        if sid not in registry.sessions:
            await ws.close(code=4404)
            return
        live = registry.sessions[sid]
        await ws.accept()
        cursor = since
        try:
            while True:
                batch = live.events_since(cursor)
                for event in batch:
                    await ws.send_json(event)
                    cursor = event["seq"]
                if not batch:
                    await asyncio.sleep(0.05)
        except (WebSocketDisconnect, RuntimeError):
            return

    return app


def serve(cfg: ExperimentConfig, dataset: Dataset, port: int = 8765,
          host: str = "127.0.0.1", out_dir=None, session_id: str = "default"):
    """Start the feedback service for one HUMAN-mode session (blocking)."""
    import uvicorn

    registry = SessionRegistry()
    registry.add(LiveSession(session_id, cfg, dataset, out_dir=out_dir))
    app = create_app(registry)
    uvicorn.run(app, host=host, port=port, log_level="warning")
