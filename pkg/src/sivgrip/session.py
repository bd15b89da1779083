"""Live human-in-the-loop mode.

One WebSocket client per session drives gestures and reward pushes; the
server runs the agent and environment at a fixed 100 ms tick, broadcasts
state after every step, and appends every inbound event plus one step
record per tick to a replayable newline-delimited JSON log. A client
disconnect freezes the environment; the session resumes if the client
returns within a minute and otherwise aborts with a summary.
"""

from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .agent import AgentConfig, SarsaAgent
from .driver import TickDriver, step_record
from .env import VARIANTS, EnvConfig, available_actions, feature_space
from .errors import ConfigurationError
from .experiment import derive_seed
from .feedback import (
    HandSample,
    LiveGestureSource,
    PushChannel,
    PushEvent,
    ReplayLogWriter,
    gesture_record,
    push_record,
    sample_at_tick,
)
from .user import preference_grasp_rule, validate_preferences

TICK_PERIOD_S = 0.1
HEARTBEAT_PERIOD_S = 1.0
RECONNECT_GRACE_S = 60.0
LOG_VERSION = 1

CLIENT_TAGS = ("start", "gesture", "push", "stop")


@dataclass(frozen=True)
class SessionConfig:
    variant: str = "siv"
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    preferences: dict = field(default_factory=lambda: {0.15: 0, 0.95: 3})
    seed: int = 0
    episode_cap: int = 1000
    object_size_visible: bool = True
    show_variant: bool = False
    show_q: bool = False

    def validate(self) -> None:
        problems = []
        if self.variant not in VARIANTS:
            problems.append(f"unknown variant {self.variant!r}")
        for part in (self.env, self.agent):
            try:
                part.validate()
            except ConfigurationError as err:
                problems.extend(err.violations)
        try:
            validate_preferences(self.preferences, self.env)
        except ConfigurationError as err:
            problems.extend(err.violations)
        if self.episode_cap < 1:
            problems.append("episode_cap must be >= 1")
        if problems:
            raise ConfigurationError(problems)

    def to_payload(self) -> dict:
        return {
            "variant": self.variant,
            "env": {
                "grip_sizes": list(self.env.grip_sizes),
                "object_sizes": list(self.env.object_sizes),
                "travel_steps": self.env.travel_steps,
                "push_reward": self.env.push_reward,
                "tick_ms": self.env.tick_ms,
            },
            "agent": {
                "step_size": self.agent.step_size,
                "discount": self.agent.discount,
                "trace_decay": self.agent.trace_decay,
                "epsilon": self.agent.epsilon,
                "strategy": self.agent.strategy,
                "temperature": self.agent.temperature,
                "initial_value": self.agent.initial_value,
                "seed": self.agent.seed,
            },
            "preferences": [[size, grip] for size, grip in sorted(self.preferences.items())],
            "seed": self.seed,
            "episode_cap": self.episode_cap,
            "object_size_visible": self.object_size_visible,
            "show_variant": self.show_variant,
            "show_q": self.show_q,
        }

    @classmethod
    def from_payload(cls, data: dict) -> "SessionConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("session config must be an object")
        defaults = cls()
        env_data = dict(data.get("env", {}))
        for key in ("grip_sizes", "object_sizes"):
            if key in env_data:
                env_data[key] = tuple(env_data[key])
        preferences = defaults.preferences
        if "preferences" in data:
            preferences = {float(s): int(g) for s, g in data["preferences"]}
        config = cls(
            variant=data.get("variant", defaults.variant),
            env=EnvConfig(**{**defaults.env.__dict__, **env_data}),
            agent=AgentConfig(**{**defaults.agent.__dict__, **data.get("agent", {})}),
            preferences=preferences,
            seed=int(data.get("seed", defaults.seed)),
            episode_cap=int(data.get("episode_cap", defaults.episode_cap)),
            object_size_visible=bool(data.get("object_size_visible", defaults.object_size_visible)),
            show_variant=bool(data.get("show_variant", defaults.show_variant)),
            show_q=bool(data.get("show_q", defaults.show_q)),
        )
        config.validate()
        return config


def build_session_agent(config: SessionConfig) -> SarsaAgent:
    coder = feature_space(config.variant)
    seed = derive_seed(config.seed, "agent", config.variant, 0)
    return SarsaAgent(coder, config.env.n_actions, replace(config.agent, seed=seed))


class Session:
    """Tick loop, transport bookkeeping, and log writer for one client."""

    def __init__(self, session_id: str, config: SessionConfig, log_path: Path):
        self.id = session_id
        self.config = config
        self.agent = build_session_agent(config)
        rule = preference_grasp_rule(config.preferences)
        self.driver = TickDriver(config.env, rule, config.variant, self.agent)
        self.env_rng = np.random.default_rng(derive_seed(config.seed, "env"))
        self.source = LiveGestureSource()
        self.pushes = PushChannel()
        self.log = ReplayLogWriter(log_path)
        self.log.write({
            "session": session_id,
            "version": LOG_VERSION,
            "config": config.to_payload(),
        })

        self.websocket: WebSocket | None = None
        self.seq_out = 0
        self.last_seq_in: int | None = None
        self.started_monotonic = time.monotonic()
        self.disconnected_at: float | None = None
        self.closed = False

        self.tick_index = 0
        self.episode = 0
        self.episode_steps = 0
        self.completed_episodes = 0
        self.total_steps = 0
        self.total_pushes = 0
        self.total_reward = 0.0
        self._need_reset = True
        self._last_result = None
        self._tasks: list[asyncio.Task] = []

    # --- timing -----------------------------------------------------------

    def now_ms(self) -> int:
        return int((time.monotonic() - self.started_monotonic) * 1000)

    # --- outbound frames -----------------------------------------------------

    def _frame(self, tag: str, payload) -> dict:
        self.seq_out += 1
        return {"session": self.id, "seq": self.seq_out, tag: payload}

    async def send(self, tag: str, payload) -> None:
        if self.websocket is None:
            return
        try:
            await self.websocket.send_json(self._frame(tag, payload))
        except Exception:
            self._on_disconnect()

    def state_payload(self, last_reward: float, terminal: bool) -> dict:
        state = self.driver.state
        mask = [] if state.terminal else [
            self.config.env.action_name(a)
            for a in np.flatnonzero(available_actions(state, self.config.env))
        ]
        payload = {
            "tick": self.tick_index,
            "episode": self.episode,
            "step": self.episode_steps,
            "p": state.position,
            "travel_steps": self.config.env.travel_steps,
            "grip": state.grip,
            "grip_size": self.config.env.grip_sizes[state.grip],
            "object_size_visible": self.config.object_size_visible,
            "object_size": state.object_size if self.config.object_size_visible else None,
            "retreat": state.retreat,
            "terminal": terminal,
            "last_reward": last_reward,
            "mask": mask,
        }
        if self.config.show_variant:
            payload["variant"] = self.config.variant
        if self.config.show_q and self._last_result is not None:
            payload["q"] = [
                float(v) for v in self.agent.action_values(self._last_result.phi)
            ]
        return payload

    # --- lifecycle ----------------------------------------------------------

    def start_tasks(self) -> None:
        self._tasks = [
            asyncio.create_task(self._tick_loop()),
            asyncio.create_task(self._heartbeat_loop()),
        ]

    def _on_disconnect(self) -> None:
        self.websocket = None
        if self.disconnected_at is None:
            self.disconnected_at = time.monotonic()

    def attach(self, websocket: WebSocket) -> bool:
        if self.websocket is not None:
            return False
        self.websocket = websocket
        self.disconnected_at = None
        return True

    async def finish(self, reason: str) -> None:
        if self.closed:
            return
        self.closed = True
        summary = {
            "reason": reason,
            "episodes_completed": self.completed_episodes,
            "total_steps": self.total_steps,
            "total_pushes": self.total_pushes,
            "total_reward": self.total_reward,
            "ticks": self.tick_index,
            "final_weights": self.agent.snapshot(),
        }
        self.log.write({"t_ms": self.now_ms(), "session_summary": summary})
        self.log.close()
        await self.send("session_summary", summary)
        websocket = self.websocket
        self.websocket = None
        if websocket is not None:
            try:
                await websocket.close()
            except Exception:
                pass
        for task in self._tasks:
            if task is not asyncio.current_task():
                task.cancel()

    # --- inbound ----------------------------------------------------------

    async def handle(self, message: dict) -> None:
        if message.get("session") != self.id:
            await self.send("error", "frame carries a different session id")
            return
        seq = message.get("seq")
        if not isinstance(seq, int) or (self.last_seq_in is not None and seq <= self.last_seq_in):
            await self.send("error", "sequence number must be a monotone integer")
            return
        self.last_seq_in = seq
        tags = [t for t in CLIENT_TAGS if t in message]
        if len(tags) != 1:
            await self.send("error", "frame must carry exactly one known tag")
            return
        tag = tags[0]
        if tag == "start":
            await self.send("error", "session already started")
        elif tag == "gesture":
            payload = message["gesture"]
            try:
                sample = HandSample(
                    roll_deg=float(payload["roll_deg"]),
                    present=bool(payload.get("present", True)),
                    t_ms=self.now_ms(),
                )
            except (TypeError, KeyError, ValueError):
                await self.send("error", "gesture frame needs roll_deg and present")
                return
            self.source.push(sample)
            self.log.write(gesture_record(sample))
        elif tag == "push":
            event = PushEvent(t_ms=self.now_ms())
            self.pushes.push(event)
            self.log.write(push_record(event))
        elif tag == "stop":
            await self.finish("stopped")

    # --- tick machinery ---------------------------------------------------------

    def _run_one_tick(self) -> None:
        t_ms = self.now_ms()
        if self._need_reset:
            self.driver.begin_episode(self.env_rng)
            self.episode_steps = 0
            self._need_reset = False
        hand = sample_at_tick(self.source, t_ms)
        push = self.pushes.drain(t_ms) is not None
        result = self.driver.tick(self.tick_index, t_ms, hand, push)
        self.tick_index += 1
        self.episode_steps += 1
        self.total_steps += 1
        self.total_reward += result.reward
        if push:
            self.total_pushes += 1
        self.log.write(step_record(result, self.episode, self.config.env))
        self._last_result = result

    async def _tick_loop(self) -> None:
        loop = asyncio.get_running_loop()
        deadline = loop.time() + TICK_PERIOD_S
        while not self.closed:
            await asyncio.sleep(max(0.0, deadline - loop.time()))
            deadline += TICK_PERIOD_S
            if self.closed:
                break
            if self.websocket is None:
                if (
                    self.disconnected_at is not None
                    and time.monotonic() - self.disconnected_at > RECONNECT_GRACE_S
                ):
                    await self.finish("client never reconnected")
                    break
                continue  # paused: environment frozen
            self._run_one_tick()
            result = self._last_result
            await self.send("state", self.state_payload(result.reward, result.terminal))
            if result.terminal or self.episode_steps >= self.config.episode_cap:
                tally = self.driver.tally
                await self.send("episode_end", {
                    "episode": self.episode,
                    "steps": tally.steps,
                    "pushes": tally.pushes,
                    "reward": tally.reward,
                    "truncated": not result.terminal,
                })
                if result.terminal:
                    self.completed_episodes += 1
                self.episode += 1
                self._need_reset = True

    async def _heartbeat_loop(self) -> None:
        while not self.closed:
            await asyncio.sleep(HEARTBEAT_PERIOD_S)
            if self.closed:
                break
            await self.send("heartbeat", {"tick": self.tick_index, "t_ms": self.now_ms()})


class SessionManager:
    def __init__(self, log_dir: Path):
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}

    def log_path(self, session_id: str) -> Path:
        return self.log_dir / f"{session_id}.ndjson"

    def create(self, session_id: str, config: SessionConfig) -> Session:
        session = Session(session_id, config, self.log_path(session_id))
        self.sessions[session_id] = session
        session.start_tasks()
        return session

    def drop(self, session_id: str) -> None:
        self.sessions.pop(session_id, None)


def create_app(log_dir: Path | str = "sessions") -> FastAPI:
    app = FastAPI(title="sivgrip session service")
    manager = SessionManager(Path(log_dir))
    app.state.manager = manager

    @app.get("/health")
    async def health() -> dict:
        return {"ok": True, "sessions": sorted(manager.sessions)}

    @app.websocket("/ws/{session_id}")
    async def websocket_endpoint(websocket: WebSocket, session_id: str):
        await websocket.accept()
        session = manager.sessions.get(session_id)
        if session is not None and session.closed:
            manager.drop(session_id)
            session = None

        if session is None:
            # fresh session: the first frame must be {start: config}
            try:
                raw = await websocket.receive_text()
            except WebSocketDisconnect:
                return
            try:
                message = json.loads(raw)
            except json.JSONDecodeError:
                await websocket.send_json({"session": session_id, "seq": 1,
                                           "error": "malformed JSON frame"})
                await websocket.close()
                return
            if "start" not in message:
                await websocket.send_json({"session": session_id, "seq": 1,
                                           "error": "first frame must carry start"})
                await websocket.close()
                return
            try:
                config = SessionConfig.from_payload(message["start"])
            except ConfigurationError as err:
                await websocket.send_json({"session": session_id, "seq": 1,
                                           "error": f"invalid config: {err}"})
                await websocket.close()
                return
            session = manager.create(session_id, config)
            session.last_seq_in = message.get("seq") if isinstance(message.get("seq"), int) else 0
            session.attach(websocket)
            await session.send("state", session_payload_on_attach(session))
        else:
            if not session.attach(websocket):
                await websocket.send_json({"session": session_id, "seq": 0,
                                           "error": "session already has a client"})
                await websocket.close()
                return
            await session.send("state", session_payload_on_attach(session))

        try:
            while not session.closed:
                raw = await websocket.receive_text()
                try:
                    message = json.loads(raw)
                except json.JSONDecodeError:
                    await session.send("error", "malformed JSON frame")
                    continue
                await session.handle(message)
        except WebSocketDisconnect:
            session._on_disconnect()
            return
        finally:
            if session.closed:
                manager.drop(session_id)
                try:
                    await websocket.close()
                except Exception:
                    pass

    return app


def session_payload_on_attach(session: Session) -> dict:
    if session._need_reset:
        # no tick has run yet: synthesize the pre-episode view
        session.driver.begin_episode(session.env_rng)
        session.episode_steps = 0
        session._need_reset = False
    return session.state_payload(0.0, False)


def serve(host: str = "127.0.0.1", port: int = 8736, log_dir: str = "sessions") -> None:
    """Run the service until interrupted; raises on bind failure."""
    import uvicorn

    uvicorn.run(create_app(log_dir), host=host, port=port, log_level="warning")
