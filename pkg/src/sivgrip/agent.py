"""On-policy TD control with eligibility traces over tile-coded features.

Weights live in a (table_size, n_actions) array; the value of a
state-action pair is the sum of the active tiles' weights for that
action. The per-tile step size is the configured step size divided by
the number of tilings, so the configured value stays well-scaled no
matter how many tilings overlap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ContractViolationError, NumericFaultError
from .tiles import TilingConfig, q_value, q_values, tile_code

EPSILON_GREEDY = "epsilon_greedy"
EPSILON_SOFT = "epsilon_soft"
SOFTMAX = "softmax"
STRATEGIES = (EPSILON_GREEDY, EPSILON_SOFT, SOFTMAX)

REPLACING = "replacing"
ACCUMULATING = "accumulating"

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class AgentConfig:
    step_size: float = 0.5
    discount: float = 1.0
    trace_decay: float = 0.0
    epsilon: float = 0.1
    strategy: str = EPSILON_GREEDY
    temperature: float = 1.0
    initial_value: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        problems = []
        if not self.step_size > 0:
            problems.append("step_size must be > 0")
        if not math.isfinite(self.initial_value):
            problems.append("initial_value must be finite")
        if not 0.0 <= self.discount <= 1.0:
            problems.append("discount must be in [0, 1]")
        if not 0.0 <= self.trace_decay <= 1.0:
            problems.append("trace_decay must be in [0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            problems.append("epsilon must be in [0, 1]")
        if self.strategy not in STRATEGIES:
            problems.append(f"strategy must be one of {STRATEGIES}")
        if not self.temperature > 0:
            problems.append("temperature must be > 0")
        if problems:
            raise ConfigurationError(problems)


@dataclass(frozen=True)
class Transition:
    """One learning step: (features, action, reward, next features, next action).

    ``next_features``/``next_action`` are ignored when ``terminal`` is set;
    the value of a terminal state is defined as 0.
    """

    features: tuple[float, ...]
    action: int
    reward: float
    next_features: tuple[float, ...] | None = None
    next_action: int | None = None
    terminal: bool = False


@dataclass
class EligibilityTraces:
    values: np.ndarray
    mode: str = REPLACING
    # nonzero entries, insertion-ordered; lets updates skip the zero bulk
    touched: dict = field(default_factory=dict)

    def reset(self) -> "EligibilityTraces":
        for key in self.touched:
            self.values[key] = 0.0
        self.touched.clear()
        return self


def make_traces(table_size: int, n_actions: int, mode: str = REPLACING) -> EligibilityTraces:
    if mode not in (REPLACING, ACCUMULATING):
        raise ConfigurationError(f"trace mode must be {REPLACING} or {ACCUMULATING}")
    return EligibilityTraces(np.zeros((table_size, n_actions)), mode)


def reset_traces(traces: EligibilityTraces) -> EligibilityTraces:
    return traces.reset()


def _greedy(action_values: np.ndarray, available: np.ndarray, rng: np.random.Generator) -> int:
    candidates = np.flatnonzero(available)
    best = action_values[candidates].max()
    winners = candidates[action_values[candidates] == best]
    if len(winners) == 1:
        return int(winners[0])
    return int(winners[rng.integers(len(winners))])


def select_action(
    action_values: np.ndarray,
    available: np.ndarray,
    config: AgentConfig,
    rng: np.random.Generator,
) -> int:
    """Pick an action among the available ones.

    epsilon-greedy: greedy with probability 1 - epsilon (ties broken
    uniformly), otherwise uniform over all available actions.
    epsilon-soft: the best action with probability exactly 1 - epsilon,
    otherwise uniform over the remaining available actions.
    softmax: proportional to exp(value / temperature) over available actions.
    """
    candidates = np.flatnonzero(available)
    if len(candidates) == 0:
        raise ContractViolationError("action mask is empty")
    if len(candidates) == 1:
        return int(candidates[0])

    if config.strategy == EPSILON_GREEDY:
        if rng.random() < config.epsilon:
            return int(candidates[rng.integers(len(candidates))])
        return _greedy(action_values, available, rng)

    if config.strategy == EPSILON_SOFT:
        best = _greedy(action_values, available, rng)
        if rng.random() < 1.0 - config.epsilon:
            return best
        rest = candidates[candidates != best]
        return int(rest[rng.integers(len(rest))])

    # softmax, numerically stabilised by shifting the exponent
    z = action_values[candidates] / config.temperature
    z = np.exp(z - z.max())
    cumulative = np.cumsum(z)
    u = rng.random() * cumulative[-1]
    return int(candidates[min(np.searchsorted(cumulative, u, side="right"), len(candidates) - 1)])


def td_error(
    transition: Transition,
    weights: np.ndarray,
    config: AgentConfig,
    coder: TilingConfig,
) -> float:
    """Reward plus discounted next value, minus the current estimate."""
    current = q_value(weights, tile_code(transition.features, coder), transition.action)
    if transition.terminal:
        return transition.reward - current
    following = q_value(
        weights, tile_code(transition.next_features, coder), transition.next_action
    )
    return transition.reward + config.discount * following - current


def sarsa_update(
    weights: np.ndarray,
    traces: EligibilityTraces,
    transition: Transition,
    config: AgentConfig,
    coder: TilingConfig,
) -> tuple[np.ndarray, EligibilityTraces]:
    """Apply one on-policy update in place.

    Traces decay by discount * trace_decay first, then the active entries
    for the taken action are set (replacing) or incremented (accumulating),
    and every nonzero trace entry moves the weights by
    (step_size / tilings) * td_error * trace.
    """
    delta = td_error(transition, weights, config, coder)
    if not math.isfinite(delta):
        raise NumericFaultError(f"non-finite TD error {delta!r}")

    decay = config.discount * config.trace_decay
    if decay == 0.0:
        traces.reset()
    else:
        for key in traces.touched:
            traces.values[key] *= decay

    active = tile_code(transition.features, coder)
    for tile in active:
        key = (tile, transition.action)
        if traces.mode == REPLACING:
            traces.values[key] = 1.0
        else:
            traces.values[key] += 1.0
        traces.touched[key] = None

    scale = (config.step_size / coder.tilings) * delta
    for key in traces.touched:
        weights[key] += scale * traces.values[key]
    return weights, traces


class SarsaAgent:
    """Owns one weight table, its traces, and the selection rng."""

    def __init__(self, coder: TilingConfig, n_actions: int, config: AgentConfig,
                 trace_mode: str = REPLACING):
        config.validate()
        self.coder = coder
        self.n_actions = n_actions
        self.config = config
        # each state sums one tile per tiling, so a per-tile share of the
        # initial value puts every fresh Q estimate at exactly initial_value
        self.weights = np.full(
            (coder.table_size, n_actions), config.initial_value / coder.tilings
        )
        self.traces = make_traces(coder.table_size, n_actions, trace_mode)
        self.rng = np.random.default_rng(config.seed)
        self.step_count = 0

    def begin_episode(self) -> None:
        reset_traces(self.traces)

    def action_values(self, features) -> np.ndarray:
        return q_values(self.weights, tile_code(features, self.coder))

    def act(self, features, available: np.ndarray, greedy: bool = False) -> int:
        values = self.action_values(features)
        if greedy:
            config = replace(self.config, epsilon=0.0, strategy=EPSILON_GREEDY)
        else:
            config = self.config
        return select_action(values, available, config, self.rng)

    def update(self, transition: Transition) -> None:
        sarsa_update(self.weights, self.traces, transition, self.config, self.coder)
        self.step_count += 1

    def snapshot(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "config": {
                "step_size": self.config.step_size,
                "discount": self.config.discount,
                "trace_decay": self.config.trace_decay,
                "epsilon": self.config.epsilon,
                "strategy": self.config.strategy,
                "temperature": self.config.temperature,
                "initial_value": self.config.initial_value,
                "seed": self.config.seed,
                "n_actions": self.n_actions,
                "table_size": self.coder.table_size,
            },
            "weights": [[float(w) for w in row] for row in self.weights],
            "step_count": self.step_count,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.snapshot()) + "\n")

    def load_snapshot(self, snapshot: dict) -> None:
        version = snapshot.get("version")
        if version != SNAPSHOT_VERSION:
            raise ConfigurationError(f"unsupported weight snapshot version {version!r}")
        weights = np.asarray(snapshot["weights"], dtype=np.float64)
        if weights.shape != self.weights.shape:
            raise ConfigurationError(
                f"snapshot shape {weights.shape} does not match table {self.weights.shape}"
            )
        self.weights[:] = weights
        self.step_count = int(snapshot["step_count"])

    def load(self, path) -> None:
        self.load_snapshot(json.loads(Path(path).read_text()))
