"""Grip-preference learning from mixed gesture and push feedback."""

from .agent import (
    AgentConfig,
    EligibilityTraces,
    SarsaAgent,
    Transition,
    reset_traces,
    sarsa_update,
    select_action,
    td_error,
)
from .env import (
    BASELINE,
    NO_SIV,
    SIV,
    VARIANTS,
    EnvConfig,
    EnvState,
    StepOutcome,
    available_actions,
    feature_space,
    observe,
    reset,
    step,
)
from .errors import (
    ConfigurationError,
    ContractViolationError,
    EndOfStreamError,
    NumericFaultError,
    SivGripError,
)
from .experiment import (
    EpisodeRecord,
    ExperimentResult,
    ExperimentSpec,
    RunMetrics,
    derive_seed,
    export,
    run_experiment,
)
from .feedback import (
    HandSample,
    PushChannel,
    PushEvent,
    drain_pushes,
    hand_state,
    sample_at_tick,
)
from .replay import ReplayReport, replay_session_log
from .session import SessionConfig, create_app, serve
from .tiles import FeatureBounds, TilingConfig, q_value, q_values, tile_code
from .user import PreferenceTable, SyntheticUser, UserModelConfig, preference_grasp_rule

__all__ = [name for name in dir() if not name.startswith("_")]
