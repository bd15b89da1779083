"""Episodic grip-selection MDP.

The arm travels between a grip changing station (position 0) and an
object (position D). Grips can only change at the station; reward is 0
everywhere except when an explicit user push lands, and an episode
terminates only on a successful grasp. After a push the arm must return
to the station before anything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ContractViolationError
from .tiles import FeatureBounds, TilingConfig

BASELINE = "baseline"
SIV = "siv"
NO_SIV = "no_siv"
VARIANTS = (BASELINE, SIV, NO_SIV)

EVENT_GRIP_CHANGED = "grip-changed"
EVENT_MOVED = "moved"
EVENT_GRASP_SUCCESS = "grasp-success"
EVENT_PUSH_PENALIZED = "push-penalized"

GraspRule = Callable[[int, float], bool]


@dataclass(frozen=True)
class EnvConfig:
    grip_sizes: tuple[float, ...] = (0.2, 0.4, 0.7, 1.0)
    object_sizes: tuple[float, ...] = (0.15, 0.95)
    travel_steps: int = 8
    push_reward: float = -1.0
    tick_ms: int = 100  # informational in headless mode

    def validate(self) -> None:
        problems = []
        if len(self.grip_sizes) < 2:
            problems.append("need at least 2 grips")
        if any(not 0.0 <= g <= 1.0 for g in self.grip_sizes):
            problems.append("grip sizes must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.grip_sizes, self.grip_sizes[1:])):
            problems.append("grip sizes must be strictly increasing")
        if not self.object_sizes:
            problems.append("need at least one object size")
        if any(not 0.0 <= o <= 1.0 for o in self.object_sizes):
            problems.append("object sizes must lie in [0, 1]")
        if self.travel_steps < 1:
            problems.append("travel_steps must be >= 1")
        if not self.push_reward < 0:
            problems.append("push_reward must be negative")
        if problems:
            raise ConfigurationError(problems)

    @property
    def n_grips(self) -> int:
        return len(self.grip_sizes)

    @property
    def n_actions(self) -> int:
        return self.n_grips + 2

    @property
    def forward_action(self) -> int:
        return self.n_grips

    @property
    def backward_action(self) -> int:
        return self.n_grips + 1

    def action_name(self, action: int) -> str:
        if action < self.n_grips:
            return f"grip_{action}"
        return "forward" if action == self.forward_action else "backward"


@dataclass(frozen=True)
class EnvState:
    position: int
    grip: int
    object_size: float
    retreat: bool = False
    steps: int = 0
    terminal: bool = False


@dataclass(frozen=True)
class StepOutcome:
    state: EnvState
    reward: float
    terminal: bool
    events: tuple[str, ...]


def reset(config: EnvConfig, rng: np.random.Generator) -> EnvState:
    """Fresh episode: arm at the station, random grip, random object."""
    grip = int(rng.integers(config.n_grips))
    object_size = float(config.object_sizes[rng.integers(len(config.object_sizes))])
    return EnvState(position=0, grip=grip, object_size=object_size)


def available_actions(state: EnvState, config: EnvConfig) -> np.ndarray:
    """Boolean mask over the complete action set for the current state."""
    if state.terminal:
        raise ContractViolationError("no actions are available in a terminal state")
    mask = np.zeros(config.n_actions, dtype=bool)
    if state.retreat:
        mask[config.backward_action] = True
    elif state.position == 0:
        mask[: config.n_grips] = True
        mask[config.forward_action] = True
    else:
        mask[config.forward_action] = True
        mask[config.backward_action] = True
    return mask


def step(
    state: EnvState,
    action: int,
    pending_push: bool,
    config: EnvConfig,
    rule: GraspRule,
) -> StepOutcome:
    """Advance the MDP by one tick.

    The environment never corrects the agent: an action outside the
    current mask raises instead of being coerced. A pending push earns
    the configured negative reward and forces a retreat unless the same
    step completed the grasp.
    """
    mask = available_actions(state, config)
    if action < 0 or action >= config.n_actions or not mask[action]:
        raise ContractViolationError(
            f"action {action} is not available at p={state.position}"
            f" (retreat={state.retreat})"
        )

    events = []
    position = state.position
    grip = state.grip
    retreat = state.retreat
    terminal = False

    if action < config.n_grips:
        if grip != action:
            events.append(EVENT_GRIP_CHANGED)
        grip = action
    elif action == config.forward_action:
        if position < config.travel_steps:
            position += 1
            events.append(EVENT_MOVED)
        if position == config.travel_steps and rule(grip, state.object_size):
            terminal = True
            events.append(EVENT_GRASP_SUCCESS)
    else:
        if position > 0:
            position -= 1
            events.append(EVENT_MOVED)
        if position == 0:
            retreat = False

    reward = 0.0
    if pending_push:
        reward = config.push_reward
        events.append(EVENT_PUSH_PENALIZED)
        if not terminal:
            retreat = True

    next_state = EnvState(
        position=position,
        grip=grip,
        object_size=state.object_size,
        retreat=retreat,
        steps=state.steps + 1,
        terminal=terminal,
    )
    return StepOutcome(next_state, reward, terminal, tuple(events))


def observe(
    state: EnvState,
    variant: str,
    hand_state: float,
    config: EnvConfig,
) -> tuple[float, ...]:
    """Build the agent-variant feature vector; the final entry is the bias.

    The grip feature is the real aperture of the current grip, not its
    index. The hand-state value is only consulted by the gesture-valued
    variant.
    """
    grip_size = config.grip_sizes[state.grip]
    if variant == BASELINE:
        return (grip_size, state.object_size, 1.0)
    if variant == SIV:
        if hand_state not in (-1.0, 1.0):
            raise ContractViolationError(f"hand state must be +1.0 or -1.0, got {hand_state!r}")
        return (grip_size, hand_state, 1.0)
    if variant == NO_SIV:
        return (grip_size, 1.0)
    raise ConfigurationError(f"unknown agent variant {variant!r}")


def feature_space(variant: str, tilings: int = 8, tiles: int = 8) -> TilingConfig:
    """Default tile layout per variant.

    Continuous dimensions (grip aperture, object size) get `tiles` tiles
    and uniformly spaced offsets; the hand-state and bias dimensions are
    discrete (single tile, no offset) so distinct values never share a
    cell. The bias sits at its dimension's lower bound, so an all-lower
    feature vector activates tile 0 of the first tiling.
    """
    if variant == BASELINE:
        bounds = FeatureBounds((0.0, 0.0, 1.0), (1.0, 1.0, 2.0))
        return TilingConfig.uniform(bounds, tilings, (tiles, tiles, 1), (False, False, True))
    if variant == SIV:
        bounds = FeatureBounds((0.0, -1.0, 1.0), (1.0, 1.0, 2.0))
        return TilingConfig.uniform(bounds, tilings, (tiles, 1, 1), (False, True, True))
    if variant == NO_SIV:
        bounds = FeatureBounds((0.0, 1.0), (1.0, 2.0))
        return TilingConfig.uniform(bounds, tilings, (tiles, 1), (False, True))
    raise ConfigurationError(f"unknown agent variant {variant!r}")


def shortest_completion(state: EnvState, config: EnvConfig, rule: GraspRule) -> int | None:
    """Length of the shortest action sequence to a successful grasp.

    Breadth-first search over the finite (position, grip, retreat) space;
    None when no grip succeeds on the current object.
    """
    if state.terminal:
        return 0
    if not any(rule(g, state.object_size) for g in range(config.n_grips)):
        return None
    seen = {(state.position, state.grip, state.retreat)}
    frontier = [state]
    depth = 0
    while frontier:
        depth += 1
        following = []
        for current in frontier:
            mask = available_actions(current, config)
            for action in np.flatnonzero(mask):
                outcome = step(current, int(action), False, config, rule)
                if outcome.terminal:
                    return depth
                key = (outcome.state.position, outcome.state.grip, outcome.state.retreat)
                if key not in seen:
                    seen.add(key)
                    following.append(outcome.state)
        frontier = following
    return None
