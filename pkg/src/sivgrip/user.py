"""Parameterized stand-in for the human in the loop.

Holds the ground-truth preference table, gestures approval of the grip
the arm carried a reaction-delay ago, and presses the reward button when
the arm is deep in transit with a disliked grip. Gestures flip with a
configurable error probability; pushes fire per eligible tick with a
configurable probability.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .env import EnvConfig, EnvState, GraspRule
from .errors import ConfigurationError
from .feedback import (
    ROLL_THUMBS_DOWN,
    ROLL_THUMBS_UP,
    HandSample,
    PushEvent,
)

PreferenceTable = dict[float, int]


def validate_preferences(prefs: PreferenceTable, env: EnvConfig) -> None:
    problems = []
    for size in env.object_sizes:
        if size not in prefs:
            problems.append(f"no preferred grip for object size {size}")
        elif not 0 <= prefs[size] < env.n_grips:
            problems.append(f"preferred grip {prefs[size]} for object {size} out of range")
    if problems:
        raise ConfigurationError(problems)


def preference_grasp_rule(prefs: PreferenceTable) -> GraspRule:
    """Grasp succeeds exactly when the grip matches the user's preference."""

    def rule(grip: int, object_size: float) -> bool:
        return prefs.get(object_size) == grip

    return rule


@dataclass(frozen=True)
class UserModelConfig:
    gesture_error_prob: float = 0.05
    reaction_delay_ticks: int = 0
    push_threshold: int = 1  # transit pushes only when position > threshold
    push_prob: float = 0.8
    # ticks without forward progress before the user scolds a stalling
    # agent; 0 disables stall pushes entirely
    stall_patience_ticks: int = 8

    def validate(self) -> None:
        problems = []
        if not 0.0 <= self.gesture_error_prob < 1.0:
            problems.append("gesture_error_prob must be in [0, 1)")
        if self.reaction_delay_ticks < 0:
            problems.append("reaction_delay_ticks must be >= 0")
        if self.push_threshold < 0:
            problems.append("push_threshold must be >= 0")
        if not 0.0 < self.push_prob <= 1.0:
            problems.append("push_prob must be in (0, 1]")
        if self.stall_patience_ticks < 0:
            problems.append("stall_patience_ticks must be >= 0")
        if problems:
            raise ConfigurationError(problems)


class SyntheticUser:
    """Watches true environment states and emits gestures and pushes."""

    def __init__(self, prefs: PreferenceTable, config: UserModelConfig | None = None):
        self.prefs = dict(prefs)
        self.config = config or UserModelConfig()
        self.config.validate()
        self._seen = deque(maxlen=self.config.reaction_delay_ticks + 1)
        self._stalled_for = 0
        self._last_position = None

    def begin_episode(self) -> None:
        self._seen.clear()
        self._stalled_for = 0
        self._last_position = None

    def approves(self, state: EnvState) -> bool:
        return self.prefs.get(state.object_size) == state.grip

    def gesture_for(self, state: EnvState, rng: np.random.Generator, t_ms: int) -> HandSample:
        """Thumbs-up roll when the remembered grip matches the preference.

        The remembered state lags the true one by the reaction delay;
        until enough ticks have passed the earliest seen state is used.
        """
        self._seen.append(state)
        remembered = self._seen[0]
        approve = self.approves(remembered)
        if rng.random() < self.config.gesture_error_prob:
            approve = not approve
        roll = ROLL_THUMBS_UP if approve else ROLL_THUMBS_DOWN
        return HandSample(roll_deg=roll, present=True, t_ms=t_ms)

    def maybe_push(self, state: EnvState, rng: np.random.Generator, t_ms: int) -> PushEvent | None:
        """Push against a wrong grip deep in forward transit, and (when
        stall pushes are enabled) against an agent that stops progressing.

        Transit pushes never fire on an approved grip, at or below the
        position threshold, during a retreat, or after the episode ended.
        Stall pushes fire once the arm has gone ``stall_patience_ticks``
        ticks without moving forward, whatever the grip.
        """
        if self._last_position is None or state.position > self._last_position:
            self._stalled_for = 0
        else:
            self._stalled_for += 1
        self._last_position = state.position

        if state.terminal or state.retreat:
            self._stalled_for = 0
            return None

        wrong_grip_in_transit = (
            state.position > self.config.push_threshold and not self.approves(state)
        )
        patience = self.config.stall_patience_ticks
        stalled = patience > 0 and self._stalled_for > patience
        if (wrong_grip_in_transit or stalled) and rng.random() < self.config.push_prob:
            self._stalled_for = 0
            return PushEvent(t_ms=t_ms)
        return None
