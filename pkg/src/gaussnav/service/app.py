"""Engine service: batch endpoints (eval, surface, learn, replay) and
session endpoints exposing reset/step episode contexts to external clients.

The service host owns the filesystem: batch endpoints write their output
files relative to the server's working directory and return the paths.
Sessions hold one live episode context each; concurrent requests against the
same session serialize on a per-session lock.
"""
from __future__ import annotations

import math
import threading
from dataclasses import replace

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..harness import emit_reward_surface, replay_records, run_eval, run_learning_campaign
from ..metrics import table_header
from ..simulator import (
    ConfigError,
    CrowdSim,
    EpisodeOver,
    OBS_LAYOUT_VERSION,
    OUTCOME_TIMEOUT,
    SimulationError,
    config_dict,
    flatten_observation,
    observation_layout,
)
from .schemas import (
    EvalRequest,
    EvalResponse,
    HealthResponse,
    LearnRequest,
    LearnResponse,
    MetricsModel,
    PolicyParamsModel,
    ReplayRequest,
    ResetRequest,
    ResetResponse,
    SessionCreateRequest,
    SessionCreateResponse,
    StepRequest,
    StepResponse,
    SurfaceRequest,
    SurfaceResponse,
)

__all__ = ["create_app"]


class _Session:
    def __init__(self, session_id: str, sim: CrowdSim):
        self.id = session_id
        self.sim = sim
        self.lock = threading.Lock()
        self.started = False


class _SessionManager:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, _Session] = {}
        self._counter = 0

    def create(self, sim: CrowdSim) -> _Session:
        with self._lock:
            self._counter += 1
            session = _Session(f"session-{self._counter:06d}", sim)
            self._sessions[session.id] = session
            return session

    def get(self, session_id: str) -> _Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def delete(self, session_id: str) -> None:
        with self._lock:
            if self._sessions.pop(session_id, None) is None:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    def count(self) -> int:
        with self._lock:
            return len(self._sessions)


def _clean_info(info: dict) -> dict:
    out = dict(info)
    d_min = out.get("d_min")
    if isinstance(d_min, float) and not math.isfinite(d_min):
        out["d_min"] = None
    out.pop("applied_velocity", None)
    return out


def create_app() -> FastAPI:
    app = FastAPI(title="gaussnav engine", version=__version__)
    sessions = _SessionManager()
    app.state.sessions = sessions

    @app.exception_handler(ConfigError)
    async def _config_error(request, exc):  # pragma: no cover - thin adapter
        raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok", version=__version__, layout_version=OBS_LAYOUT_VERSION
        )

    @app.post("/eval", response_model=EvalResponse)
    def eval_endpoint(request: EvalRequest) -> EvalResponse:
        try:
            cfg = request.config.to_experiment()
            ov = request.overrides
            if ov.episodes is not None:
                cfg = replace(cfg, episodes=ov.episodes)
            if ov.seed_base is not None:
                cfg = replace(cfg, seed_base=ov.seed_base)
            out_dir = ov.out_dir if ov.out_dir is not None else request.config.out_dir
            result = run_eval(cfg, out_dir=out_dir)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return EvalResponse(
            report=MetricsModel.from_report(result.report),
            table_header=table_header(),
            table=result.table,
            files=result.files,
        )

    @app.post("/surface", response_model=SurfaceResponse)
    def surface_endpoint(request: SurfaceRequest) -> SurfaceResponse:
        try:
            reward = request.config.reward.to_core()
            grid = request.config.surface.to_core()
            out_dir = (
                request.overrides.out_dir
                if request.overrides.out_dir is not None
                else request.config.out_dir
            )
            out_path = None if out_dir is None else f"{out_dir.rstrip('/')}/surface.csv"
            rows, path = emit_reward_surface(reward, grid, out_path)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return SurfaceResponse(path=path, n_points=len(rows), extent=grid.extent, step=grid.step)

    @app.post("/learn", response_model=LearnResponse)
    def learn_endpoint(request: LearnRequest) -> LearnResponse:
        try:
            world = request.config.world.to_core()
            reward = request.config.reward.to_core()
            campaign = request.config.to_campaign()
            out_dir = (
                request.overrides.out_dir
                if request.overrides.out_dir is not None
                else request.config.out_dir
            )
            result = run_learning_campaign(
                world, reward, campaign, predictor=request.config.predictor, out_dir=out_dir
            )
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return LearnResponse(
            crossing_iteration=result.crossing_iteration,
            iterations_run=len(result.curve),
            best_params=PolicyParamsModel(**result.best_params.__dict__),
            final_mean_params=PolicyParamsModel(**result.final_mean_params.__dict__),
            curve=result.curve,
            files=result.files,
        )

    @app.post("/replay", response_model=MetricsModel)
    def replay_endpoint(request: ReplayRequest) -> MetricsModel:
        try:
            report = replay_records(request.records_path)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return MetricsModel.from_report(report)

    @app.post("/sessions", response_model=SessionCreateResponse)
    def create_session(request: SessionCreateRequest) -> SessionCreateResponse:
        try:
            world = request.world.to_core()
            sim = CrowdSim(world, request.reward.to_core(), request.predictor)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session = sessions.create(sim)
        return SessionCreateResponse(
            session_id=session.id,
            layout=observation_layout(world),
            config={
                "world": config_dict(world),
                "reward": config_dict(sim.reward_config),
                "predictor": request.predictor,
            },
        )

    @app.post("/sessions/{session_id}/reset", response_model=ResetResponse)
    def reset_session(session_id: str, request: ResetRequest) -> ResetResponse:
        session = sessions.get(session_id)
        with session.lock:
            try:
                obs = session.sim.reset(request.seed)
            except (ConfigError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            session.started = True
            flat = flatten_observation(obs, session.sim.world.n_humans)
        return ResetResponse(
            observation=flat,
            info={"time": obs.time, "n_visible": len(obs.visible_ids)},
        )

    @app.post("/sessions/{session_id}/step", response_model=StepResponse)
    def step_session(session_id: str, request: StepRequest) -> StepResponse:
        session = sessions.get(session_id)
        with session.lock:
            if not session.started:
                raise HTTPException(status_code=409, detail="session has not been reset")
            try:
                obs, reward, done, info = session.sim.step(request.action)
            except EpisodeOver as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except SimulationError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            flat = flatten_observation(obs, session.sim.world.n_humans)
        outcome = info["outcome"]
        return StepResponse(
            observation=flat,
            reward=reward,
            terminated=done and outcome != OUTCOME_TIMEOUT,
            truncated=done and outcome == OUTCOME_TIMEOUT,
            info=_clean_info(info),
        )

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str) -> dict:
        sessions.delete(session_id)
        return {"deleted": session_id}

    return app
