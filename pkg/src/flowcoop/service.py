"""Live cooperation sessions over HTTP and a streaming socket.

A session ingests time-stamped hand positions, keeps the growing prefix, and
re-plans on a fixed cadence of stream time (default every 2 s of motion).
Planning runs on a background thread against an immutable snapshot of the
prefix, so pushing points never blocks on an in-flight plan; reads return
the latest completed plan plus a descriptor computed from the full prefix.

Endpoints:
    POST   /session                     open (body: obstacles, replan_period_s, q_now)
    POST   /session/{id}/points         batch of {"t": s, "x": [x, y, z]}
    GET    /session/{id}/state          latest snapshot
    POST   /session/{id}/obstacles      replace the obstacle list
    DELETE /session/{id}
    WS     /session/{id}/stream         pushes the state JSON after each re-plan

State message: {"type": "state", "p": [...], "path": [[...]], "joints":
[[...]], "clearance_mm": n | null, "seq": int}.
"""

from __future__ import annotations

import asyncio
import itertools
import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .errors import ValidationError
from .flow import describe
from .pipeline import TrainedModels, load_artifact
from .planner import Obstacle
from .trajectories import Trajectory

DEFAULT_REPLAN_PERIOD_S = 2.0


class Session:
    """One live cooperation session; a single writer feeds points."""

    def __init__(self, models: TrainedModels,
                 obstacles: list[Obstacle] | None = None,
                 replan_period_s: float = DEFAULT_REPLAN_PERIOD_S,
                 q_now: np.ndarray | None = None,
                 n_samples: int | None = None, seed: int = 0):
        if replan_period_s <= 0:
            raise ValidationError("replan_period_s must be positive")
        self.id = uuid.uuid4().hex
        self.models = models
        self.planner = models.planner()
        self.arm = models.arm
        self.obstacles = list(obstacles or [])
        self.replan_period_s = float(replan_period_s)
        self.q_now = (self.arm.q_home if q_now is None
                      else self.arm.check_limits(q_now))
        self.n_samples = n_samples
        self.seed = seed

        self._lock = threading.Lock()
        self._times: list[float] = []
        self._points: list[np.ndarray] = []
        self._seq = 0
        self._plan_counter = itertools.count()
        self._last_plan: dict | None = None
        self._last_plan_stream_t: float | None = None
        self._planning = False
        self._worker: threading.Thread | None = None

    # -- ingestion ---------------------------------------------------------

    def push_point(self, t: float, x) -> dict:
        """Append one observed point; may kick off an asynchronous re-plan."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if not np.all(np.isfinite(x)) or not np.isfinite(t):
            raise ValidationError("point must be finite")
        with self._lock:
            if self._times and t <= self._times[-1]:
                raise ValidationError(
                    f"non-monotone timestamp {t} (last {self._times[-1]})")
            if self._points and x.shape[0] != self._points[0].shape[0]:
                raise ValidationError("point dimension changed mid-stream")
            self._times.append(float(t))
            self._points.append(x)
            should_plan = (
                len(self._points) >= 2
                and not self._planning
                and (self._last_plan_stream_t is None
                     or t - self._last_plan_stream_t >= self.replan_period_s)
            )
            if should_plan:
                self._planning = True
                self._last_plan_stream_t = float(t)
                snapshot = (np.array(self._times), np.vstack(self._points))
        if should_plan:
            self._worker = threading.Thread(
                target=self._replan, args=snapshot, daemon=True)
            self._worker.start()
        return {"ok": True, "count": len(self._points)}

    def _observed(self) -> Trajectory | None:
        with self._lock:
            if len(self._points) < 2:
                return None
            return Trajectory.from_points(np.array(self._times),
                                          np.vstack(self._points))

    def _replan(self, times: np.ndarray, points: np.ndarray) -> None:
        try:
            xi = Trajectory.from_points(times, points)
            with self._lock:
                obstacles = list(self.obstacles)
            plan_seed = self.seed + next(self._plan_counter)
            result = self.planner.plan(xi, self.q_now,
                                       n_samples=self.n_samples,
                                       seed=plan_seed,
                                       obstacles=obstacles or None)
            with self._lock:
                self._seq += 1
                self._last_plan = {
                    "path": result.ee_path.tolist(),
                    "joints": result.joint_path.tolist(),
                    "weights": result.weights.tolist(),
                    "clearance_mm": result.clearance_mm,
                    "p": result.descriptor.tolist(),
                    "seq": self._seq,
                }
        finally:
            with self._lock:
                self._planning = False

    def wait_idle(self, timeout: float = 10.0) -> None:
        """Block until no plan is in flight (test convenience)."""
        worker = self._worker
        if worker is not None and worker.is_alive():
            worker.join(timeout)

    # -- reads -------------------------------------------------------------

    def descriptor(self) -> np.ndarray | None:
        xi = self._observed()
        if xi is None:
            return None
        return describe(xi, self.models.bank, self.models.spatial_weight)

    def get_state(self) -> dict:
        """Immutable snapshot: latest plan plus a fresh full-prefix descriptor."""
        p = self.descriptor()
        with self._lock:
            plan = dict(self._last_plan) if self._last_plan else None
            seq = self._seq
            n_points = len(self._points)
        if plan is None:
            return {"type": "state", "status": "warming_up",
                    "p": None if p is None else p.tolist(),
                    "path": None, "joints": None, "clearance_mm": None,
                    "seq": seq, "n_points": n_points}
        plan.update({"type": "state", "status": "ok",
                     "p": p.tolist() if p is not None else plan["p"],
                     "seq": seq, "n_points": n_points})
        return plan

    def set_obstacles(self, obstacles: list[Obstacle]) -> None:
        with self._lock:
            self.obstacles = list(obstacles)

    @property
    def seq(self) -> int:
        with self._lock:
            return self._seq


class SessionManager:
    """Open/lookup/close sessions; each is fully independent."""

    def __init__(self, models: TrainedModels):
        self.models = models
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def open_session(self, obstacles: list[Obstacle] | None = None,
                     replan_period_s: float = DEFAULT_REPLAN_PERIOD_S,
                     q_now=None, n_samples: int | None = None,
                     seed: int = 0) -> Session:
        session = Session(self.models, obstacles, replan_period_s, q_now,
                          n_samples, seed)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise KeyError(session_id) from None

    def close(self, session_id: str) -> None:
        with self._lock:
            self._sessions.pop(session_id, None)

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


def open_session(manager: SessionManager, **kwargs) -> Session:
    return manager.open_session(**kwargs)


def push_point(session: Session, t: float, x) -> dict:
    return session.push_point(t, x)


def get_state(session: Session) -> dict:
    return session.get_state()


# ---------------------------------------------------------------------------
# HTTP / websocket layer


def create_app(models: TrainedModels) -> FastAPI:
    """FastAPI app bound to one loaded model artifact."""
    app = FastAPI(title="flowcoop session service")
    manager = SessionManager(models)
    app.state.manager = manager

    def _session_or_404(session_id: str) -> Session:
        try:
            return manager.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.get("/healthz")
    def healthz():
        return {"ok": True, "k": len(models.bank)}

    @app.post("/session")
    def open_(body: dict | None = None):
        body = body or {}
        obstacles = [Obstacle.from_dict(o) for o in body.get("obstacles", [])]
        session = manager.open_session(
            obstacles=obstacles,
            replan_period_s=float(body.get("replan_period_s",
                                           DEFAULT_REPLAN_PERIOD_S)),
            q_now=body.get("q_now"),
            n_samples=body.get("n_samples"),
            seed=int(body.get("seed", 0)))
        return {"id": session.id, "k": len(models.bank)}

    @app.post("/session/{session_id}/points")
    def push(session_id: str, body: dict):
        session = _session_or_404(session_id)
        points = body.get("points", [])
        accepted = 0
        for rec in points:
            t, x = (rec["t"], rec["x"]) if isinstance(rec, dict) else (rec[0], rec[1])
            try:
                session.push_point(float(t), x)
            except ValidationError as exc:
                raise HTTPException(
                    status_code=409,
                    detail={"error": str(exc), "accepted": accepted})
            accepted += 1
        return {"ok": True, "accepted": accepted,
                "count": len(session._points)}

    @app.get("/session/{session_id}/state")
    def state(session_id: str):
        return _session_or_404(session_id).get_state()

    @app.post("/session/{session_id}/obstacles")
    def set_obstacles(session_id: str, body: dict):
        session = _session_or_404(session_id)
        session.set_obstacles([Obstacle.from_dict(o)
                               for o in body.get("obstacles", [])])
        return {"ok": True}

    @app.delete("/session/{session_id}")
    def close(session_id: str):
        _session_or_404(session_id)
        manager.close(session_id)
        return {"ok": True}

    @app.websocket("/session/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        try:
            session = manager.get(session_id)
        except KeyError:
            await ws.close(code=4404)
            return
        await ws.accept()
        last_seq = -1
        try:
            while True:
                seq = session.seq
                if seq != last_seq:
                    last_seq = seq
                    await ws.send_json(session.get_state())
                await asyncio.sleep(0.05)
        except (WebSocketDisconnect, RuntimeError):
            return

    return app


def create_app_from_artifact(path):
    return create_app(load_artifact(path))
