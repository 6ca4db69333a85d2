"""Pydantic request/response models for the engine service.

Config models mirror the core dataclasses field for field and forbid unknown
keys, so a typo anywhere in a config file is a hard 422 with the offending
path.  ``to_core`` conversions funnel everything through the core
validators, which own the semantic checks.
"""
from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict

from ..crowd_policies import OrcaParams, SocialForceParams
from ..harness import CampaignConfig, ExperimentConfig, SurfaceGrid
from ..learner import LearnerConfig
from ..metrics import MetricsReport
from ..policies import PolicyParams
from ..rewards import RewardConfig
from ..simulator import WorldConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class OrcaModel(_Strict):
    time_horizon: float = 5.0
    neighbor_dist: float = 5.0
    max_neighbors: int = 10
    safety_margin: float = 0.1

    def to_core(self, dt: float) -> OrcaParams:
        return OrcaParams(
            self.time_horizon, self.neighbor_dist, self.max_neighbors, dt, self.safety_margin
        )


class SocialForceModel(_Strict):
    relaxation_time: float = 0.5
    interaction_strength: float = 3.0
    interaction_range: float = 0.4

    def to_core(self, dt: float) -> SocialForceParams:
        return SocialForceParams(
            self.relaxation_time, self.interaction_strength, self.interaction_range, dt
        )


class WorldModel(_Strict):
    arena_side: float = 12.0
    n_humans: int = 20
    sensor_range: float = 5.0
    fov_deg: float = 360.0
    dt: float = 0.25
    t_max: float = 50.0
    robot_radius: float = 0.3
    robot_v_max: float = 1.0
    goal_tolerance: float = 0.3
    human_radius_range: tuple[float, float] = (0.3, 0.5)
    human_vmax_range: tuple[float, float] = (0.5, 1.5)
    human_policy: Literal["orca", "sf"] = "orca"
    goal_change_prob: float = 0.0
    min_start_goal_separation: float = 6.0
    kinematics: Literal["holonomic", "unicycle"] = "holonomic"
    memory_steps: int = 5
    seed: int = 0
    orca: Optional[OrcaModel] = None
    social_force: Optional[SocialForceModel] = None

    def to_core(self) -> WorldConfig:
        return WorldConfig(
            arena_side=self.arena_side,
            n_humans=self.n_humans,
            sensor_range=self.sensor_range,
            fov_deg=self.fov_deg,
            dt=self.dt,
            t_max=self.t_max,
            robot_radius=self.robot_radius,
            robot_v_max=self.robot_v_max,
            goal_tolerance=self.goal_tolerance,
            human_radius_range=self.human_radius_range,
            human_vmax_range=self.human_vmax_range,
            human_policy=self.human_policy,
            goal_change_prob=self.goal_change_prob,
            min_start_goal_separation=self.min_start_goal_separation,
            kinematics=self.kinematics,
            memory_steps=self.memory_steps,
            seed=self.seed,
            orca=None if self.orca is None else self.orca.to_core(self.dt),
            social_force=None
            if self.social_force is None
            else self.social_force.to_core(self.dt),
        )


class RewardModel(_Strict):
    r_goal: float = 10.0
    r_col: float = -10.0
    w_disc: float = 0.25
    sigma_disc: float = 0.2
    d_disc: float = 0.5
    w_pot: float = 1.5
    mu_pot: float = 0.0
    sigma_pot: float = 1000.0
    horizon: int = 5
    mode: Literal["gaussian", "linear"] = "gaussian"

    def to_core(self) -> RewardConfig:
        return RewardConfig(**self.model_dump())


class PolicyParamsModel(_Strict):
    goal_gain: float = 1.0
    repulse_gain: float = 1.0
    repulse_range: float = 0.5
    pred_gain: float = 1.0
    speed_frac: float = 1.0

    def to_core(self) -> PolicyParams:
        return PolicyParams(**self.model_dump())


class PolicyModel(_Strict):
    source: Literal["scripted", "file", "params"] = "scripted"
    path: Optional[str] = None
    params: Optional[PolicyParamsModel] = None


class LearnerModel(_Strict):
    population: int = 16
    elite_frac: float = 0.25
    iterations: int = 30
    episodes_per_candidate: int = 4
    eval_seed_base: int = 10_000
    seed: int = 0
    discount: float = 0.99
    init_mean: tuple[float, ...] = (0.0, 0.0, 0.3, 0.0, 1.0)
    init_sigma: tuple[float, ...] = (1.0, 1.0, 0.3, 1.0, 0.5)
    sigma_floor: float = 0.05

    def to_core(self) -> LearnerConfig:
        return LearnerConfig(**self.model_dump())


class CampaignModel(_Strict):
    holdout_episodes: int = 100
    holdout_seed_base: int = 500_000
    stop_at_sr: Optional[float] = None


class SurfaceModel(_Strict):
    extent: float = 2.0
    step: float = 0.05
    collision_radius: float = 0.6

    def to_core(self) -> SurfaceGrid:
        return SurfaceGrid(**self.model_dump())


class ExperimentFileModel(_Strict):
    """The on-disk config file: one document, nested sections per subsystem.
    Verbs consume their own slices; unknown keys anywhere are rejected."""

    label: str = "eval"
    episodes: int = 500
    seed_base: int = 0
    runs: int = 1
    save_records: bool = True
    predictor: Literal["none", "const_vel", "ground_truth"] = "const_vel"
    out_dir: Optional[str] = None
    world: WorldModel = WorldModel()
    reward: RewardModel = RewardModel()
    policy: PolicyModel = PolicyModel()
    learner: LearnerModel = LearnerModel()
    campaign: CampaignModel = CampaignModel()
    surface: SurfaceModel = SurfaceModel()

    def to_experiment(self) -> ExperimentConfig:
        return ExperimentConfig(
            world=self.world.to_core(),
            reward=self.reward.to_core(),
            predictor=self.predictor,
            policy_source=self.policy.source,
            policy_path=self.policy.path,
            policy_params=None if self.policy.params is None else self.policy.params.to_core(),
            episodes=self.episodes,
            seed_base=self.seed_base,
            runs=self.runs,
            label=self.label,
            save_records=self.save_records,
        )

    def to_campaign(self) -> CampaignConfig:
        return CampaignConfig(
            learner=self.learner.to_core(),
            holdout_episodes=self.campaign.holdout_episodes,
            holdout_seed_base=self.campaign.holdout_seed_base,
            stop_at_sr=self.campaign.stop_at_sr,
        )


class OverridesModel(_Strict):
    episodes: Optional[int] = None
    seed_base: Optional[int] = None
    out_dir: Optional[str] = None


class MetricsModel(_Strict):
    episodes: int
    successes: int
    collisions: int
    timeouts: int
    success_rate: float
    nav_time: Optional[float]
    path_length: Optional[float]
    intrusion_ratio: float
    intrusion_ratio_pooled: float
    sr_mean: Optional[float] = None
    sr_std: Optional[float] = None
    runs: Optional[int] = None

    @classmethod
    def from_report(cls, report: MetricsReport) -> "MetricsModel":
        return cls(**report.__dict__)


class EvalRequest(_Strict):
    config: ExperimentFileModel = ExperimentFileModel()
    overrides: OverridesModel = OverridesModel()


class EvalResponse(_Strict):
    report: MetricsModel
    table_header: str
    table: str
    files: dict[str, str]


class SurfaceRequest(_Strict):
    config: ExperimentFileModel = ExperimentFileModel()
    overrides: OverridesModel = OverridesModel()


class SurfaceResponse(_Strict):
    path: Optional[str]
    n_points: int
    extent: float
    step: float


class LearnRequest(_Strict):
    config: ExperimentFileModel = ExperimentFileModel()
    overrides: OverridesModel = OverridesModel()


class LearnResponse(_Strict):
    crossing_iteration: Optional[int]
    iterations_run: int
    best_params: PolicyParamsModel
    final_mean_params: PolicyParamsModel
    curve: list[dict[str, Any]]
    files: dict[str, str]


class ReplayRequest(_Strict):
    records_path: str


class SessionCreateRequest(_Strict):
    world: WorldModel = WorldModel()
    reward: RewardModel = RewardModel()
    predictor: Literal["none", "const_vel", "ground_truth"] = "const_vel"


class SessionCreateResponse(_Strict):
    session_id: str
    layout: dict[str, Any]
    config: dict[str, Any]


class ResetRequest(_Strict):
    seed: Optional[int] = None


class ResetResponse(_Strict):
    observation: list[float]
    info: dict[str, Any]


class StepRequest(_Strict):
    action: tuple[float, float]


class StepResponse(_Strict):
    observation: list[float]
    reward: float
    terminated: bool
    truncated: bool
    info: dict[str, Any]


class HealthResponse(_Strict):
    status: str
    version: str
    layout_version: int
