"""Headless re-execution of recorded session logs.

A session log contains everything a rerun needs: the config header with
its seeds, every inbound gesture and push with arrival timestamps, one
step record per executed tick, and a summary with the final weight
snapshot. Replaying feeds the recorded events through the same tick
driver and checks that every step and the final weights come out
bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .driver import TickDriver, step_record
from .errors import ConfigurationError
from .experiment import derive_seed
from .feedback import PushChannel, ReplayGestureSource, load_replay_log, sample_at_tick
from .session import SessionConfig, build_session_agent
from .user import preference_grasp_rule

STEP_KEYS = ("p", "grip", "object", "action", "reward")


@dataclass(frozen=True)
class ReplayReport:
    ticks: int
    episodes: int
    matches: bool
    divergences: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.matches


def split_session_log(log) -> tuple[dict, list[dict], dict | None]:
    """Separate header, ordered step records, and summary from a parsed log."""
    header = None
    steps = []
    summary = None
    for record in log.records:
        if "config" in record:
            header = record
        elif "action" in record:
            steps.append(record)
        elif "session_summary" in record:
            summary = record["session_summary"]
    if header is None:
        raise ConfigurationError("log has no session header record")
    steps.sort(key=lambda r: r["tick"])
    return header, steps, summary


def replay_session_log(path) -> ReplayReport:
    log = load_replay_log(path)
    header, steps, summary = split_session_log(log)
    config = SessionConfig.from_payload(header["config"])

    agent = build_session_agent(config)
    rule = preference_grasp_rule(config.preferences)
    driver = TickDriver(config.env, rule, config.variant, agent)
    env_rng = np.random.default_rng(derive_seed(config.seed, "env"))

    source = ReplayGestureSource(log.samples, end_ms=log.end_ms)
    pushes = PushChannel()
    for event in log.pushes:
        pushes.push(event)

    divergences = []
    episode = None
    episodes_seen = 0
    for recorded in steps:
        if recorded["episode"] != episode:
            episode = recorded["episode"]
            episodes_seen += 1
            driver.begin_episode(env_rng)
        t_ms = recorded["t_ms"]
        hand = sample_at_tick(source, t_ms)
        push = pushes.drain(t_ms) is not None
        result = driver.tick(recorded["tick"], t_ms, hand, push)
        rerun = step_record(result, episode, config.env)
        for key in STEP_KEYS:
            if rerun[key] != recorded[key]:
                divergences.append(
                    f"tick {recorded['tick']}: {key} {rerun[key]!r} != recorded {recorded[key]!r}"
                )
        if divergences and len(divergences) >= 5:
            break

    if summary is not None and not divergences:
        recorded_weights = summary["final_weights"]["weights"]
        rerun_weights = agent.snapshot()["weights"]
        if rerun_weights != recorded_weights:
            divergences.append("final weights differ from the recorded snapshot")

    return ReplayReport(
        ticks=len(steps),
        episodes=episodes_seen,
        matches=not divergences,
        divergences=tuple(divergences),
    )
