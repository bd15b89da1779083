"""Headless three-agent comparison harness.

Runs the configured agent variants over seeded (variant, run) cells in a
blind-shuffled order, with weights persisting across the episodes of a
run and reset between runs. All randomness derives from the master seed
and the cell labels, never from execution position, so shuffling the
execution order cannot change any metric.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .agent import AgentConfig, SarsaAgent
from .driver import TickDriver, step_record
from .env import VARIANTS, EnvConfig, feature_space
from .errors import ConfigurationError
from .feedback import PushChannel, HeldSource, sample_at_tick
from .user import (
    PreferenceTable,
    SyntheticUser,
    UserModelConfig,
    preference_grasp_rule,
    validate_preferences,
)

DEFAULT_EPISODE_CAP = 1000


def derive_seed(master_seed: int, *labels) -> int:
    """Stable 64-bit seed from the master seed and a label path."""
    text = "|".join([str(master_seed), *map(str, labels)])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


@dataclass(frozen=True)
class ExperimentSpec:
    variants: tuple[str, ...] = VARIANTS
    runs: int = 3
    episodes: int = 15
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    user: UserModelConfig = field(default_factory=UserModelConfig)
    preferences: PreferenceTable = field(default_factory=lambda: {0.15: 0, 0.95: 3})
    master_seed: int = 0
    blind_shuffle: bool = True
    episode_cap: int = DEFAULT_EPISODE_CAP

    def validate(self) -> None:
        problems = []
        if not self.variants:
            problems.append("need at least one agent variant")
        for v in self.variants:
            if v not in VARIANTS:
                problems.append(f"unknown variant {v!r}")
        if self.runs < 1:
            problems.append("runs must be >= 1")
        if self.episodes < 1:
            problems.append("episodes must be >= 1")
        if self.episode_cap < 1:
            problems.append("episode_cap must be >= 1")
        for part in (self.env, self.agent, self.user):
            try:
                part.validate()
            except ConfigurationError as err:
                problems.extend(err.violations)
        try:
            validate_preferences(self.preferences, self.env)
        except ConfigurationError as err:
            problems.extend(err.violations)
        if problems:
            raise ConfigurationError(problems)

    def to_dict(self) -> dict:
        return {
            "variants": list(self.variants),
            "runs": self.runs,
            "episodes": self.episodes,
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
            "user": {
                "gesture_error_prob": self.user.gesture_error_prob,
                "reaction_delay_ticks": self.user.reaction_delay_ticks,
                "push_threshold": self.user.push_threshold,
                "push_prob": self.user.push_prob,
                "stall_patience_ticks": self.user.stall_patience_ticks,
            },
            "preferences": [[size, grip] for size, grip in sorted(self.preferences.items())],
            "master_seed": self.master_seed,
            "blind_shuffle": self.blind_shuffle,
            "episode_cap": self.episode_cap,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        if not isinstance(data, dict):
            raise ConfigurationError("experiment spec must be a JSON object")
        problems = []
        defaults = cls()

        def section(name, allowed):
            raw = data.get(name, {})
            if not isinstance(raw, dict):
                problems.append(f"{name} must be an object")
                return {}
            for key in raw:
                if key not in allowed:
                    problems.append(f"unknown {name} field {key!r}")
            return {k: v for k, v in raw.items() if k in allowed}

        top_allowed = {
            "variants", "runs", "episodes", "env", "agent", "user",
            "preferences", "master_seed", "blind_shuffle", "episode_cap",
        }
        for key in data:
            if key not in top_allowed:
                problems.append(f"unknown spec field {key!r}")

        env_data = section("env", {"grip_sizes", "object_sizes", "travel_steps", "push_reward", "tick_ms"})
        if "grip_sizes" in env_data:
            env_data["grip_sizes"] = tuple(env_data["grip_sizes"])
        if "object_sizes" in env_data:
            env_data["object_sizes"] = tuple(env_data["object_sizes"])
        agent_data = section("agent", {
            "step_size", "discount", "trace_decay", "epsilon", "strategy",
            "temperature", "initial_value", "seed",
        })
        user_data = section("user", {
            "gesture_error_prob", "reaction_delay_ticks", "push_threshold",
            "push_prob", "stall_patience_ticks",
        })

        preferences = defaults.preferences
        if "preferences" in data:
            try:
                preferences = {float(size): int(grip) for size, grip in data["preferences"]}
            except (TypeError, ValueError):
                problems.append("preferences must be a list of [object_size, grip_index] pairs")
        if problems:
            raise ConfigurationError(problems)

        built = cls(
            variants=tuple(data.get("variants", defaults.variants)),
            runs=int(data.get("runs", defaults.runs)),
            episodes=int(data.get("episodes", defaults.episodes)),
            env=EnvConfig(**{**defaults.env.__dict__, **env_data}),
            agent=AgentConfig(**{**defaults.agent.__dict__, **agent_data}),
            user=UserModelConfig(**{**defaults.user.__dict__, **user_data}),
            preferences=preferences,
            master_seed=int(data.get("master_seed", defaults.master_seed)),
            blind_shuffle=bool(data.get("blind_shuffle", defaults.blind_shuffle)),
            episode_cap=int(data.get("episode_cap", defaults.episode_cap)),
        )
        built.validate()
        return built


@dataclass(frozen=True)
class EpisodeRecord:
    variant: str
    run: int
    episode: int
    steps: int
    pushes: int
    total_reward: float
    truncated: bool
    seed: int


@dataclass(frozen=True)
class RunMetrics:
    per_run: tuple[dict, ...]      # variant, run, avg_steps, avg_pushes
    per_variant: tuple[dict, ...]  # variant, total_steps, total_reward, total_pushes


def build_agent(spec: ExperimentSpec, variant: str, run: int) -> SarsaAgent:
    coder = feature_space(variant)
    seed = derive_seed(spec.master_seed, "agent", variant, run)
    return SarsaAgent(coder, spec.env.n_actions, replace(spec.agent, seed=seed))


def run_episode(
    driver: TickDriver,
    user: SyntheticUser,
    env_rng: np.random.Generator,
    user_rng: np.random.Generator,
    cap: int,
    tick_ms: int = 100,
    step_sink=None,
    episode: int = 0,
) -> tuple[int, int, float, bool]:
    """Drive one episode tick by tick; returns (steps, pushes, reward, truncated)."""
    driver.begin_episode(env_rng)
    user.begin_episode()
    source = HeldSource()
    channel = PushChannel()
    truncated = True
    for tick in range(cap):
        t_ms = tick * tick_ms
        source.push(user.gesture_for(driver.state, user_rng, t_ms))
        push_event = user.maybe_push(driver.state, user_rng, t_ms)
        if push_event is not None:
            channel.push(push_event)
        hand = sample_at_tick(source, t_ms)
        pending = channel.drain(t_ms)
        result = driver.tick(tick, t_ms, hand, pending is not None)
        if step_sink is not None:
            step_sink(step_record(result, episode, driver.env_config))
        if result.terminal:
            truncated = False
            break
    tally = driver.tally
    return tally.steps, tally.pushes, tally.reward, truncated


def run_cell(spec: ExperimentSpec, variant: str, run: int) -> list[EpisodeRecord]:
    """One (variant, run) cell: fresh weights, episodes back to back."""
    agent = build_agent(spec, variant, run)
    user = SyntheticUser(spec.preferences, spec.user)
    rule = preference_grasp_rule(spec.preferences)
    driver = TickDriver(spec.env, rule, variant, agent)
    records = []
    for episode in range(spec.episodes):
        env_seed = derive_seed(spec.master_seed, "env", variant, run, episode)
        env_rng = np.random.default_rng(env_seed)
        user_rng = np.random.default_rng(derive_seed(spec.master_seed, "user", variant, run, episode))
        steps, pushes, reward, truncated = run_episode(
            driver, user, env_rng, user_rng, spec.episode_cap,
            tick_ms=spec.env.tick_ms, episode=episode,
        )
        records.append(
            EpisodeRecord(variant, run, episode, steps, pushes, reward, truncated, env_seed)
        )
    return records


def _run_cell_job(args) -> list[EpisodeRecord]:
    spec_data, variant, run = args
    return run_cell(ExperimentSpec.from_dict(spec_data), variant, run)


def compute_metrics(records: list[EpisodeRecord], variants) -> RunMetrics:
    """Aggregate the metric panels; recomputable from the records exactly."""
    per_run = []
    per_variant = []
    for variant in variants:
        variant_records = [r for r in records if r.variant == variant]
        runs = sorted({r.run for r in variant_records})
        for run in runs:
            cell = sorted(
                (r for r in variant_records if r.run == run), key=lambda r: r.episode
            )
            per_run.append(
                {
                    "variant": variant,
                    "run": run,
                    "avg_steps": sum(r.steps for r in cell) / len(cell),
                    "avg_pushes": sum(r.pushes for r in cell) / len(cell),
                }
            )
        ordered = sorted(variant_records, key=lambda r: (r.run, r.episode))
        per_variant.append(
            {
                "variant": variant,
                "total_steps": sum(r.steps for r in ordered),
                "total_reward": sum(r.total_reward for r in ordered),
                "total_pushes": sum(r.pushes for r in ordered),
            }
        )
    return RunMetrics(tuple(per_run), tuple(per_variant))


@dataclass(frozen=True)
class ExperimentResult:
    records: tuple[EpisodeRecord, ...]
    metrics: RunMetrics


def run_experiment(spec: ExperimentSpec, parallel: int = 1) -> ExperimentResult:
    spec.validate()
    cells = [(variant, run) for variant in spec.variants for run in range(spec.runs)]
    if spec.blind_shuffle:
        order_rng = np.random.default_rng(derive_seed(spec.master_seed, "shuffle"))
        order = [cells[i] for i in order_rng.permutation(len(cells))]
    else:
        order = list(cells)

    records: list[EpisodeRecord] = []
    if parallel > 1:
        spec_data = spec.to_dict()
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            for cell_records in pool.map(
                _run_cell_job, [(spec_data, v, r) for v, r in order]
            ):
                records.extend(cell_records)
    else:
        for variant, run in order:
            records.extend(run_cell(spec, variant, run))

    variant_rank = {v: i for i, v in enumerate(spec.variants)}
    records.sort(key=lambda r: (variant_rank[r.variant], r.run, r.episode))
    return ExperimentResult(tuple(records), compute_metrics(records, spec.variants))


RECORD_FIELDS = ("variant", "run", "episode", "steps", "pushes", "total_reward", "truncated", "seed")

PANEL_FILES = {
    "panel_a_avg_steps_per_run.csv": ("variant", "run", "avg_steps"),
    "panel_b_avg_pushes_per_run.csv": ("variant", "run", "avg_pushes"),
    "panel_c_total_steps.csv": ("variant", "total_steps"),
    "panel_d_total_reward.csv": ("variant", "total_reward"),
    "panel_e_total_pushes.csv": ("variant", "total_pushes"),
}


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export(records, metrics: RunMetrics, out_dir) -> list[Path]:
    """Write records CSV, metrics JSON, and the five plot-data CSVs.

    Output is byte-stable for identical inputs: fixed column order,
    repr-formatted floats, LF line endings.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    records_path = out / "records.csv"
    with records_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow([_format(getattr(r, name)) for name in RECORD_FIELDS])
    written.append(records_path)

    metrics_path = out / "metrics.json"
    payload = {"per_run": list(metrics.per_run), "per_variant": list(metrics.per_variant)}
    metrics_path.write_text(json.dumps(payload, indent=2) + "\n")
    written.append(metrics_path)

    rows_by_panel = {
        "panel_a_avg_steps_per_run.csv": metrics.per_run,
        "panel_b_avg_pushes_per_run.csv": metrics.per_run,
        "panel_c_total_steps.csv": metrics.per_variant,
        "panel_d_total_reward.csv": metrics.per_variant,
        "panel_e_total_pushes.csv": metrics.per_variant,
    }
    for name, columns in PANEL_FILES.items():
        path = out / name
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows_by_panel[name]:
                writer.writerow([_format(row[c]) for c in columns])
        written.append(path)
    return written


def load_records_csv(path) -> list[EpisodeRecord]:
    records = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                EpisodeRecord(
                    variant=row["variant"],
                    run=int(row["run"]),
                    episode=int(row["episode"]),
                    steps=int(row["steps"]),
                    pushes=int(row["pushes"]),
                    total_reward=float(row["total_reward"]),
                    truncated=row["truncated"] == "true",
                    seed=int(row["seed"]),
                )
            )
    return records
