"""Batch experiment runner: seeded evaluation campaigns, penalty-surface
grids, and learning campaigns, all emitting self-describing plot-ready
files.

Every output file embeds the fully resolved configuration and seed base
(JSON report fields, ``# config:`` comment lines in CSVs, meta lines in
record streams) and contains no timestamps, so a rerun with the same
configuration produces byte-identical files.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

from .learner import IterationStats, LearnerConfig, cross_entropy_optimize, evaluate_policy
from .metrics import MetricsReport, aggregate_runs, compute_metrics, table_header, table_row
from .policies import PolicyParams, PotentialFieldPolicy, straight_line_policy
from .rewards import (
    DISCOMFORT_LINEAR,
    RewardConfig,
    linear_discomfort_penalty,
    discomfort_penalty,
    reward_balance,
)
from .simulator import (
    ConfigError,
    EpisodeRecord,
    PREDICTOR_CONST_VEL,
    PREDICTORS,
    WorldConfig,
    config_dict,
    parse_record_lines,
    record_to_lines,
    run_episode,
)

__all__ = [
    "CampaignConfig",
    "CampaignResult",
    "EvalResult",
    "ExperimentConfig",
    "SurfaceGrid",
    "emit_reward_surface",
    "load_policy_file",
    "replay_records",
    "run_eval",
    "run_learning_campaign",
    "save_policy_file",
]

POLICY_SCRIPTED = "scripted"
POLICY_FILE = "file"
POLICY_PARAMS = "params"
_POLICY_SOURCES = (POLICY_SCRIPTED, POLICY_FILE, POLICY_PARAMS)


@dataclass(frozen=True)
class ExperimentConfig:
    """One evaluation campaign: world + rewards + predictor + policy +
    episode budget and seed base."""

    world: WorldConfig = field(default_factory=WorldConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    predictor: str = PREDICTOR_CONST_VEL
    policy_source: str = POLICY_SCRIPTED
    policy_path: Optional[str] = None
    policy_params: Optional[PolicyParams] = None
    episodes: int = 500
    seed_base: int = 0
    runs: int = 1
    label: str = "eval"
    save_records: bool = True

    def __post_init__(self) -> None:
        if self.predictor not in PREDICTORS:
            raise ConfigError(f"unknown predictor {self.predictor!r}")
        if self.policy_source not in _POLICY_SOURCES:
            raise ConfigError(
                f"policy_source must be one of {_POLICY_SOURCES}, got {self.policy_source!r}"
            )
        if self.policy_source == POLICY_FILE and not self.policy_path:
            raise ConfigError("policy_source 'file' requires policy_path")
        if self.policy_source == POLICY_PARAMS and self.policy_params is None:
            raise ConfigError("policy_source 'params' requires policy_params")
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")


@dataclass(frozen=True)
class SurfaceGrid:
    """Square (x, y) lattice around a human at the origin."""

    extent: float = 2.0
    step: float = 0.05
    collision_radius: float = 0.6  # robot radius + human radius

    def __post_init__(self) -> None:
        if self.extent <= 0.0 or self.step <= 0.0:
            raise ConfigError("extent and step must be > 0")
        if self.collision_radius <= 0.0:
            raise ConfigError("collision_radius must be > 0")
        if self.extent / self.step > 4000:
            raise ConfigError("grid resolution too fine (over 4000 cells per axis)")


@dataclass(frozen=True)
class CampaignConfig:
    """Learning campaign: optimizer settings plus a held-out evaluation of
    each iteration's refit-mean policy (the learning curve)."""

    learner: LearnerConfig = field(default_factory=LearnerConfig)
    holdout_episodes: int = 100
    holdout_seed_base: int = 500_000
    stop_at_sr: Optional[float] = None

    def __post_init__(self) -> None:
        if self.holdout_episodes < 1:
            raise ConfigError("holdout_episodes must be >= 1")
        if self.stop_at_sr is not None and not (0.0 < self.stop_at_sr <= 1.0):
            raise ConfigError("stop_at_sr must be in (0, 1]")


@dataclass
class EvalResult:
    report: MetricsReport
    table: str
    per_run: list[MetricsReport]
    files: dict[str, str]
    config: dict


@dataclass
class CampaignResult:
    best_params: PolicyParams
    final_mean_params: PolicyParams
    curve: list[dict]
    crossing_iteration: Optional[int]
    files: dict[str, str]
    config: dict


def save_policy_file(params: PolicyParams, path: str) -> None:
    payload = {"type": "potential_field", "params": params.__dict__}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_policy_file(path: str) -> PolicyParams:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"policy file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"policy file {path} is not valid JSON: {exc}") from None
    if payload.get("type") != "potential_field" or "params" not in payload:
        raise ConfigError(f"policy file {path} must carry type 'potential_field' and params")
    try:
        return PolicyParams(**payload["params"])
    except TypeError as exc:
        raise ConfigError(f"policy file {path} has bad params: {exc}") from None


def _resolve_policy(cfg: ExperimentConfig) -> Callable:
    if cfg.policy_source == POLICY_SCRIPTED:
        return straight_line_policy
    if cfg.policy_source == POLICY_PARAMS:
        return PotentialFieldPolicy(cfg.policy_params)
    return PotentialFieldPolicy(load_policy_file(cfg.policy_path))


def _json_text(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def _experiment_dict(cfg: ExperimentConfig) -> dict:
    return {
        "world": config_dict(cfg.world),
        "reward": config_dict(cfg.reward),
        "predictor": cfg.predictor,
        "policy_source": cfg.policy_source,
        "policy_path": cfg.policy_path,
        "policy_params": None if cfg.policy_params is None else cfg.policy_params.__dict__,
        "episodes": cfg.episodes,
        "seed_base": cfg.seed_base,
        "runs": cfg.runs,
        "label": cfg.label,
        "save_records": cfg.save_records,
    }


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def run_eval(cfg: ExperimentConfig, out_dir: Optional[str] = None) -> EvalResult:
    """Run ``cfg.runs`` blocks of ``cfg.episodes`` seeded episodes and
    aggregate.  Run r uses seeds seed_base + r*episodes + i."""
    policy = _resolve_policy(cfg)
    config_echo = _experiment_dict(cfg)

    all_records: list[EpisodeRecord] = []
    per_run: list[MetricsReport] = []
    for run_idx in range(cfg.runs):
        records = [
            run_episode(
                cfg.world,
                cfg.reward,
                policy,
                cfg.seed_base + run_idx * cfg.episodes + i,
                predictor=cfg.predictor,
                record_steps=cfg.save_records,
            )
            for i in range(cfg.episodes)
        ]
        per_run.append(compute_metrics(records))
        all_records.extend(records)

    report = compute_metrics(all_records)
    if cfg.runs > 1:
        sr_mean, sr_std = aggregate_runs(per_run)
        report = MetricsReport(
            **{**report.__dict__, "sr_mean": sr_mean, "sr_std": sr_std, "runs": cfg.runs}
        )
    row = table_row(report, cfg.label)

    files: dict[str, str] = {}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        results_path = os.path.join(out_dir, "results.csv")
        _write(
            results_path,
            f"# config: {_json_text(config_echo)}\n"
            f"# seed_base: {cfg.seed_base}\n" + table_header() + "\n" + row + "\n",
        )
        files["results"] = results_path

        report_path = os.path.join(out_dir, "report.json")
        _write(
            report_path,
            json.dumps(
                {
                    "config": config_echo,
                    "metrics": report.__dict__,
                    "per_run": [r.__dict__ for r in per_run],
                    "reward_balance": reward_balance(cfg.reward),
                },
                sort_keys=True,
                indent=2,
            )
            + "\n",
        )
        files["report"] = report_path

        if cfg.save_records:
            records_path = os.path.join(out_dir, "records.jsonl")
            lines: list[str] = []
            for record in all_records:
                lines.extend(record_to_lines(record))
            _write(records_path, "\n".join(lines) + "\n")
            files["records"] = records_path

    return EvalResult(report=report, table=row, per_run=per_run, files=files, config=config_echo)


def surface_value(surface_distance: float, cfg: RewardConfig) -> float:
    """Combined collision/danger-zone value at a surface distance: the flat
    collision penalty inside contact, the proximity skirt inside the danger
    zone, zero beyond."""
    if surface_distance <= 0.0:
        return cfg.r_col
    if cfg.mode == DISCOMFORT_LINEAR:
        return linear_discomfort_penalty(surface_distance, cfg)
    return discomfort_penalty(surface_distance, cfg)


def emit_reward_surface(
    reward: RewardConfig,
    grid: SurfaceGrid = SurfaceGrid(),
    out_path: Optional[str] = None,
) -> tuple[list[tuple[float, float, float]], Optional[str]]:
    """(x, y, value) triplets of the penalty surface around a human at the
    origin: a cylinder of depth r_col inside the collision radius, the
    proximity skirt out to d_disc, and exactly zero beyond."""
    n = int(round(grid.extent / grid.step))
    axis = [-grid.extent + i * grid.step for i in range(2 * n + 1)]
    rows: list[tuple[float, float, float]] = []
    for y in axis:
        for x in axis:
            surface = math.hypot(x, y) - grid.collision_radius
            rows.append((x, y, surface_value(surface, reward)))
    if out_path is not None:
        parent = os.path.dirname(out_path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        header = (
            f"# config: {_json_text({'reward': config_dict(reward), 'grid': grid.__dict__})}\n"
            "x,y,value\n"
        )
        body = "\n".join(f"{x!r},{y!r},{v!r}" for x, y, v in rows)
        _write(out_path, header + body + "\n")
    return rows, out_path


_CURVE_COLUMNS = [
    "iteration",
    "population_return",
    "elite_return",
    "mean_policy_return",
    "holdout_return",
    "holdout_sr_pct",
    "holdout_nt_s",
    "holdout_pl_m",
    "holdout_itr_pct",
]


def run_learning_campaign(
    world: WorldConfig,
    reward: RewardConfig,
    campaign: CampaignConfig,
    predictor: str = PREDICTOR_CONST_VEL,
    out_dir: Optional[str] = None,
) -> CampaignResult:
    """Cross-entropy campaign with a per-iteration held-out evaluation of the
    refit-mean policy.  With ``stop_at_sr`` set, stops at the first iteration
    whose held-out SR reaches the target and reports it as the crossing."""
    holdout_seeds = [campaign.holdout_seed_base + i for i in range(campaign.holdout_episodes)]
    curve: list[dict] = []
    crossing: list[Optional[int]] = [None]

    def on_iteration(stats: IterationStats) -> bool:
        holdout_return, holdout = evaluate_policy(
            PotentialFieldPolicy(stats.mean_params), reward, world, holdout_seeds, predictor
        )
        curve.append(
            {
                "iteration": stats.iteration,
                "population_return": stats.population_return,
                "elite_return": stats.elite_return,
                "mean_policy_return": stats.mean_policy_return,
                "holdout_return": holdout_return,
                "holdout_sr_pct": holdout.success_rate * 100.0,
                "holdout_nt_s": holdout.nav_time,
                "holdout_pl_m": holdout.path_length,
                "holdout_itr_pct": holdout.intrusion_ratio * 100.0,
                "mean_params": stats.mean_params.__dict__,
            }
        )
        if (
            crossing[0] is None
            and campaign.stop_at_sr is not None
            and holdout.success_rate >= campaign.stop_at_sr
        ):
            crossing[0] = stats.iteration
            return True
        return False

    best_params, history = cross_entropy_optimize(
        campaign.learner, reward, world, predictor, on_iteration=on_iteration
    )
    final_mean = history[-1].mean_params

    config_echo = {
        "world": config_dict(world),
        "reward": config_dict(reward),
        "predictor": predictor,
        "learner": {
            **campaign.learner.__dict__,
            "init_mean": list(campaign.learner.init_mean),
            "init_sigma": list(campaign.learner.init_sigma),
        },
        "holdout_episodes": campaign.holdout_episodes,
        "holdout_seed_base": campaign.holdout_seed_base,
        "stop_at_sr": campaign.stop_at_sr,
    }

    files: dict[str, str] = {}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        curve_path = os.path.join(out_dir, "curve.csv")
        lines = [
            f"# config: {_json_text(config_echo)}",
            ",".join(_CURVE_COLUMNS),
        ]
        for point in curve:
            lines.append(
                ",".join(
                    "" if point[c] is None else repr(float(point[c])) for c in _CURVE_COLUMNS
                )
            )
        _write(curve_path, "\n".join(lines) + "\n")
        files["curve"] = curve_path

        best_path = os.path.join(out_dir, "policy_best.json")
        save_policy_file(best_params, best_path)
        files["policy_best"] = best_path
        mean_path = os.path.join(out_dir, "policy_mean.json")
        save_policy_file(final_mean, mean_path)
        files["policy_mean"] = mean_path

        summary_path = os.path.join(out_dir, "campaign.json")
        _write(
            summary_path,
            json.dumps(
                {
                    "config": config_echo,
                    "crossing_iteration": crossing[0],
                    "iterations_run": len(curve),
                    "curve": curve,
                },
                sort_keys=True,
                indent=2,
            )
            + "\n",
        )
        files["summary"] = summary_path

    return CampaignResult(
        best_params=best_params,
        final_mean_params=final_mean,
        curve=curve,
        crossing_iteration=crossing[0],
        files=files,
        config=config_echo,
    )


def replay_records(path: str, d_disc: Optional[float] = None) -> MetricsReport:
    """Recompute metrics from a records file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            records = parse_record_lines(fh)
    except FileNotFoundError:
        raise ConfigError(f"records file not found: {path}") from None
    except ValueError as exc:
        raise ConfigError(f"records file {path} is malformed: {exc}") from None
    if not records:
        raise ConfigError(f"records file {path} contains no episodes")
    return compute_metrics(records, d_disc=d_disc)
