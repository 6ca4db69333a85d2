"""Deterministic 2D crowd-navigation engine with peak-normalized Gaussian
reward shaping, an evaluation harness, and a derivative-free policy learner.
"""

__version__ = "0.1.0"

from .reward_kernel import GaussianTerm, gaussian_reward, normal_pdf
from .rewards import (
    PredictionOccupancy,
    RewardConfig,
    StepSummary,
    discomfort_penalty,
    linear_discomfort_penalty,
    potential_reward,
    prediction_penalty,
    reward_balance,
    reward_breakdown,
    total_reward,
)
from .crowd_policies import OrcaParams, SocialForceParams, orca_velocity, social_force_velocity
from .predictors import TrajectoryPrediction, const_vel_predict, ground_truth_predict
from .simulator import (
    AgentState,
    ConfigError,
    CrowdSim,
    EpisodeOver,
    EpisodeRecord,
    Observation,
    SimulationError,
    WorldConfig,
    run_episode,
)
from .metrics import MetricsReport, aggregate_runs, compute_metrics
from .policies import PolicyParams, PotentialFieldPolicy, straight_line_policy
from .learner import LearnerConfig, cross_entropy_optimize, evaluate_policy
from .harness import (
    CampaignConfig,
    ExperimentConfig,
    SurfaceGrid,
    emit_reward_surface,
    replay_records,
    run_eval,
    run_learning_campaign,
)
