"""Shared per-tick loop: observe, select, learn, step.

Every mode (headless experiment, live session, log replay) advances the
same way: at each tick the agent observes the current state with the
held hand value, picks an action from the current mask, the previous
transition's update is completed now that its successor action is known,
and the environment steps with whatever push was drained this tick.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agent import SarsaAgent, Transition
from .env import EnvConfig, EnvState, GraspRule, available_actions, observe, reset, step


@dataclass(frozen=True)
class TickResult:
    tick: int
    t_ms: int
    state_before: EnvState
    state_after: EnvState
    phi: tuple[float, ...]
    action: int
    reward: float
    events: tuple[str, ...]
    terminal: bool


@dataclass
class EpisodeTally:
    steps: int = 0
    pushes: int = 0
    reward: float = 0.0


class TickDriver:
    """Owns one environment instance and one agent for a run."""

    def __init__(
        self,
        env_config: EnvConfig,
        rule: GraspRule,
        variant: str,
        agent: SarsaAgent,
        learn: bool = True,
        greedy: bool = False,
    ):
        self.env_config = env_config
        self.rule = rule
        self.variant = variant
        self.agent = agent
        self.learn = learn
        self.greedy = greedy
        self.state: EnvState | None = None
        self.tally = EpisodeTally()
        self._pending: tuple[tuple[float, ...], int, float] | None = None

    def begin_episode(self, rng: np.random.Generator) -> EnvState:
        self.state = reset(self.env_config, rng)
        self.agent.begin_episode()
        self.tally = EpisodeTally()
        self._pending = None
        return self.state

    def start_from(self, state: EnvState) -> EnvState:
        """Begin an episode at an explicit state (replay, tests)."""
        self.state = state
        self.agent.begin_episode()
        self.tally = EpisodeTally()
        self._pending = None
        return state

    def tick(self, tick: int, t_ms: int, hand_value: float, push_pending: bool) -> TickResult:
        state = self.state
        if state is None or state.terminal:
            raise RuntimeError("tick() called without an active episode")

        phi = observe(state, self.variant, hand_value, self.env_config)
        mask = available_actions(state, self.env_config)
        action = self.agent.act(phi, mask, greedy=self.greedy)

        if self.learn and self._pending is not None:
            prev_phi, prev_action, prev_reward = self._pending
            self.agent.update(
                Transition(prev_phi, prev_action, prev_reward, phi, action, False)
            )

        outcome = step(state, action, push_pending, self.env_config, self.rule)
        self.state = outcome.state
        self.tally.steps += 1
        self.tally.reward += outcome.reward
        if push_pending:
            self.tally.pushes += 1

        if outcome.terminal:
            if self.learn:
                self.agent.update(
                    Transition(phi, action, outcome.reward, terminal=True)
                )
            self._pending = None
        else:
            self._pending = (phi, action, outcome.reward)

        return TickResult(
            tick=tick,
            t_ms=t_ms,
            state_before=state,
            state_after=outcome.state,
            phi=phi,
            action=action,
            reward=outcome.reward,
            events=outcome.events,
            terminal=outcome.terminal,
        )


def step_record(result: TickResult, episode: int, config: EnvConfig) -> dict:
    """One replayable log line per environment step."""
    before = result.state_before
    return {
        "t_ms": result.t_ms,
        "tick": result.tick,
        "episode": episode,
        "step": before.steps,
        "p": before.position,
        "grip": before.grip,
        "object": before.object_size,
        "action": config.action_name(result.action),
        "reward": result.reward,
        "events": list(result.events),
        "phi": list(result.phi),
    }
