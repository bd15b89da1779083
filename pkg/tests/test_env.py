import itertools

import numpy as np
import pytest

from sivgrip.env import (
    BASELINE,
    EVENT_GRASP_SUCCESS,
    EVENT_GRIP_CHANGED,
    EVENT_PUSH_PENALIZED,
    NO_SIV,
    SIV,
    EnvConfig,
    EnvState,
    available_actions,
    observe,
    reset,
    shortest_completion,
    step,
)
from sivgrip.errors import ConfigurationError, ContractViolationError
from sivgrip.user import preference_grasp_rule


CONFIG = EnvConfig(
    grip_sizes=(0.2, 0.4, 0.7, 1.0),
    object_sizes=(0.15, 0.95),
    travel_steps=5,
)
PREFS = {0.15: 0, 0.95: 3}
RULE = preference_grasp_rule(PREFS)


def state_at(position, grip=0, object_size=0.15, retreat=False, steps=0, terminal=False):
    return EnvState(position, grip, object_size, retreat, steps, terminal)


# --- reset -------------------------------------------------------------------


def test_reset_starts_at_station_with_full_grip_mask():
    state = reset(CONFIG, np.random.default_rng(0))
    assert state.position == 0
    assert not state.retreat and not state.terminal
    mask = available_actions(state, CONFIG)
    assert mask[: CONFIG.n_grips].all()
    assert mask[CONFIG.forward_action]
    assert not mask[CONFIG.backward_action]


def test_reset_draws_objects_uniformly():
    rng = np.random.default_rng(11)
    draws = [reset(CONFIG, rng).object_size for _ in range(10_000)]
    small = sum(1 for d in draws if d == 0.15) / len(draws)
    assert small == pytest.approx(0.5, abs=0.02)


def test_reset_is_seed_deterministic():
    a = [reset(CONFIG, np.random.default_rng(5)) for _ in range(20)]
    b = [reset(CONFIG, np.random.default_rng(5)) for _ in range(20)]
    assert a == b


# --- masks ---------------------------------------------------------------------


def test_station_mask_lists_grips_and_forward():
    mask = available_actions(state_at(0), CONFIG)
    assert list(np.flatnonzero(mask)) == [0, 1, 2, 3, CONFIG.forward_action]


def test_transit_mask_is_forward_backward():
    mask = available_actions(state_at(3), CONFIG)
    assert list(np.flatnonzero(mask)) == [CONFIG.forward_action, CONFIG.backward_action]


def test_retreat_mask_is_backward_only():
    mask = available_actions(state_at(2, retreat=True), CONFIG)
    assert list(np.flatnonzero(mask)) == [CONFIG.backward_action]


def test_terminal_state_has_no_mask():
    with pytest.raises(ContractViolationError):
        available_actions(state_at(5, terminal=True), CONFIG)


def test_mask_exhaustive_over_state_space():
    # every reachable (p, grip, retreat) combination obeys exactly one regime
    for p, grip, retreat in itertools.product(
        range(CONFIG.travel_steps + 1), range(CONFIG.n_grips), (False, True)
    ):
        mask = available_actions(state_at(p, grip, retreat=retreat), CONFIG)
        chosen = set(np.flatnonzero(mask))
        assert chosen, "mask must never be empty"
        if retreat:
            assert chosen == {CONFIG.backward_action}
        elif p == 0:
            assert chosen == set(range(CONFIG.n_grips)) | {CONFIG.forward_action}
        else:
            assert chosen == {CONFIG.forward_action, CONFIG.backward_action}


# --- step ----------------------------------------------------------------------


def test_grip_change_at_station():
    outcome = step(state_at(0, grip=1), 3, False, CONFIG, RULE)
    assert outcome.state.grip == 3
    assert outcome.state.position == 0
    assert outcome.reward == 0.0
    assert EVENT_GRIP_CHANGED in outcome.events


def test_reselecting_current_grip_emits_no_change_event():
    outcome = step(state_at(0, grip=2), 2, False, CONFIG, RULE)
    assert outcome.state.grip == 2
    assert EVENT_GRIP_CHANGED not in outcome.events


def test_forward_with_correct_grip_completes_with_zero_reward():
    outcome = step(state_at(4, grip=0, object_size=0.15), CONFIG.forward_action,
                   False, CONFIG, RULE)
    assert outcome.terminal
    assert outcome.reward == 0.0
    assert EVENT_GRASP_SUCCESS in outcome.events


def test_forward_with_wrong_grip_stalls_at_object():
    outcome = step(state_at(4, grip=1, object_size=0.15), CONFIG.forward_action,
                   False, CONFIG, RULE)
    assert not outcome.terminal
    assert outcome.state.position == CONFIG.travel_steps
    # the agent may then move backward to re-grip
    mask = available_actions(outcome.state, CONFIG)
    assert mask[CONFIG.backward_action]


def test_push_penalizes_and_forces_retreat():
    outcome = step(state_at(2, grip=1), CONFIG.forward_action, True, CONFIG, RULE)
    assert outcome.reward == -1.0
    assert outcome.state.retreat
    assert EVENT_PUSH_PENALIZED in outcome.events
    mask = available_actions(outcome.state, CONFIG)
    assert list(np.flatnonzero(mask)) == [CONFIG.backward_action]


def test_push_on_completing_step_keeps_terminal_without_retreat():
    outcome = step(state_at(4, grip=0, object_size=0.15), CONFIG.forward_action,
                   True, CONFIG, RULE)
    assert outcome.terminal
    assert outcome.reward == -1.0
    assert not outcome.state.retreat


def test_backward_to_station_clears_retreat():
    state = state_at(1, retreat=True)
    outcome = step(state, CONFIG.backward_action, False, CONFIG, RULE)
    assert outcome.state.position == 0
    assert not outcome.state.retreat


def test_backward_floors_at_station():
    state = state_at(0, retreat=True)
    outcome = step(state, CONFIG.backward_action, False, CONFIG, RULE)
    assert outcome.state.position == 0
    assert not outcome.state.retreat


def test_unavailable_action_raises():
    with pytest.raises(ContractViolationError):
        step(state_at(3), 0, False, CONFIG, RULE)  # grip change away from station
    with pytest.raises(ContractViolationError):
        step(state_at(0), CONFIG.backward_action, False, CONFIG, RULE)
    with pytest.raises(ContractViolationError):
        step(state_at(2, retreat=True), CONFIG.forward_action, False, CONFIG, RULE)


def test_step_counter_increments():
    outcome = step(state_at(0, steps=7), 1, False, CONFIG, RULE)
    assert outcome.state.steps == 8


# --- trajectory properties -------------------------------------------------------


def random_walk(seed, pushes_at=(), steps=200):
    """Random legal actions with a scripted push schedule; returns trajectory."""
    rng = np.random.default_rng(seed)
    state = reset(CONFIG, rng)
    trajectory = [state]
    rewards = []
    consumed = 0
    for i in range(steps):
        if state.terminal:
            break
        mask = available_actions(state, CONFIG)
        action = int(rng.choice(np.flatnonzero(mask)))
        push = i in pushes_at
        outcome = step(state, action, push, CONFIG, RULE)
        if push:
            consumed += 1
        rewards.append(outcome.reward)
        state = outcome.state
        trajectory.append(state)
    return trajectory, rewards, consumed


def test_reward_accounting_identity():
    for seed in range(30):
        pushes_at = set(np.random.default_rng(seed).integers(0, 200, size=5).tolist())
        _, rewards, consumed = random_walk(seed, pushes_at)
        assert sum(rewards) == CONFIG.push_reward * consumed


def test_grip_only_changes_at_station():
    for seed in range(30):
        trajectory, _, _ = random_walk(seed)
        for before, after in zip(trajectory, trajectory[1:]):
            if after.grip != before.grip:
                assert before.position == 0


def test_position_never_increases_during_retreat():
    for seed in range(30):
        trajectory, _, _ = random_walk(seed, pushes_at={3, 9, 27})
        for before, after in zip(trajectory, trajectory[1:]):
            if before.retreat:
                assert after.position <= before.position


def test_trajectory_is_deterministic_given_seed_and_schedule():
    first = random_walk(7, pushes_at={4, 11})
    second = random_walk(7, pushes_at={4, 11})
    assert first == second


@pytest.mark.parametrize("travel_steps", [5, 10])
def test_every_reachable_state_completes_within_bound(travel_steps):
    # exhaustive: any non-terminal state reaches terminal in <= 2D + 1 actions
    config = EnvConfig(
        grip_sizes=CONFIG.grip_sizes,
        object_sizes=CONFIG.object_sizes,
        travel_steps=travel_steps,
    )
    bound = 2 * config.travel_steps + 1
    for p, grip, retreat, obj in itertools.product(
        range(config.travel_steps + 1),
        range(config.n_grips),
        (False, True),
        config.object_sizes,
    ):
        state = state_at(p, grip, object_size=obj, retreat=retreat)
        length = shortest_completion(state, config, RULE)
        assert length is not None
        assert length <= bound


# --- observation vectors ----------------------------------------------------------


def test_observe_baseline_vector():
    state = state_at(2, grip=2, object_size=0.95)
    assert observe(state, BASELINE, -1.0, CONFIG) == (0.7, 0.95, 1.0)


def test_observe_siv_vector_carries_hand_state():
    state = state_at(2, grip=2, object_size=0.95)
    assert observe(state, SIV, 1.0, CONFIG) == (0.7, 1.0, 1.0)
    assert observe(state, SIV, -1.0, CONFIG) == (0.7, -1.0, 1.0)


def test_observe_no_siv_vector():
    state = state_at(2, grip=2, object_size=0.95)
    assert observe(state, NO_SIV, 1.0, CONFIG) == (0.7, 1.0)


def test_observe_rejects_bad_hand_state_for_siv():
    with pytest.raises(ContractViolationError):
        observe(state_at(0), SIV, 0.3, CONFIG)


def test_env_config_validation_lists_all_problems():
    bad = EnvConfig(grip_sizes=(0.5, 0.4), object_sizes=(2.0,), travel_steps=0,
                    push_reward=1.0)
    with pytest.raises(ConfigurationError) as err:
        bad.validate()
    assert len(err.value.violations) == 4
