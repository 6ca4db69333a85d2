"""Reward components for crowd navigation and the total-reward dispatch.

Five signals: a fixed bonus for reaching the goal, a fixed penalty for
colliding with a human, a proximity penalty inside the danger zone around
the nearest human, a progress term proportional to the change in goal
distance, and a penalty for sitting on a predicted human trajectory.

The proximity penalty has two shapes selected by ``RewardConfig.mode``:
``"gaussian"`` (peak-normalized Gaussian of the surface distance) and
``"linear"`` (a ramp with the same contact magnitude, kept as a comparison
baseline so experiments isolate shape rather than scale).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .reward_kernel import GaussianTerm, gaussian_reward

__all__ = [
    "DISCOMFORT_GAUSSIAN",
    "DISCOMFORT_LINEAR",
    "PredictionOccupancy",
    "RewardBreakdown",
    "RewardConfig",
    "StepSummary",
    "discomfort_penalty",
    "linear_discomfort_penalty",
    "potential_reward",
    "prediction_penalty",
    "reward_balance",
    "reward_breakdown",
    "total_reward",
]

DISCOMFORT_GAUSSIAN = "gaussian"
DISCOMFORT_LINEAR = "linear"


@dataclass(frozen=True, slots=True)
class RewardConfig:
    """All reward hyperparameters and terminal magnitudes.

    ``horizon`` is the number of prediction steps scored by the trajectory
    penalty; ``d_disc`` is the danger-zone radius in surface distance.
    """

    r_goal: float = 10.0
    r_col: float = -10.0
    w_disc: float = 0.25
    sigma_disc: float = 0.2
    d_disc: float = 0.5
    w_pot: float = 1.5
    mu_pot: float = 0.0
    sigma_pot: float = 1000.0
    horizon: int = 5
    mode: str = DISCOMFORT_GAUSSIAN

    def __post_init__(self) -> None:
        if self.r_goal <= 0.0:
            raise ValueError(f"r_goal must be > 0, got {self.r_goal!r}")
        if self.r_col >= 0.0:
            raise ValueError(f"r_col must be < 0, got {self.r_col!r}")
        for name in ("sigma_disc", "sigma_pot", "d_disc"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValueError(f"horizon must be an integer >= 1, got {self.horizon!r}")
        if self.mode not in (DISCOMFORT_GAUSSIAN, DISCOMFORT_LINEAR):
            raise ValueError(f"mode must be 'gaussian' or 'linear', got {self.mode!r}")


class PredictionOccupancy:
    """Indicator bits: does the robot's disc intersect human i's predicted
    disc at lookahead step k?  Shape is exactly n_humans x horizon."""

    __slots__ = ("bits", "horizon")

    def __init__(self, bits: Sequence[Sequence[bool]], horizon: int):
        rows = tuple(tuple(bool(b) for b in row) for row in bits)
        for row in rows:
            if len(row) != horizon:
                raise ValueError(
                    f"occupancy rows must have length {horizon}, got {len(row)}"
                )
        self.bits = rows
        self.horizon = horizon

    @classmethod
    def empty(cls, horizon: int) -> "PredictionOccupancy":
        return cls((), horizon)

    @property
    def n_humans(self) -> int:
        return len(self.bits)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PredictionOccupancy)
            and self.bits == other.bits
            and self.horizon == other.horizon
        )

    def __repr__(self) -> str:
        return f"PredictionOccupancy(bits={self.bits!r}, horizon={self.horizon})"


def discomfort_penalty(d_min: float, cfg: RewardConfig) -> float:
    """Gaussian danger-zone penalty of the surface distance to the nearest
    human.  Zero at and beyond ``d_disc``; the emitted value is negative,
    peaking at ``-w_disc`` at contact.  Negative inputs (overlap, handled
    upstream as a collision) are clamped to contact.
    """
    d = max(d_min, 0.0)
    if d >= cfg.d_disc:
        return 0.0
    return -gaussian_reward(GaussianTerm(cfg.w_disc, 0.0, cfg.sigma_disc), d)


def linear_discomfort_penalty(d_min: float, cfg: RewardConfig) -> float:
    """Baseline proximity penalty: a linear ramp from ``-w_disc`` at contact
    to zero at ``d_disc``.  Same contact magnitude as the Gaussian shape."""
    d = max(d_min, 0.0)
    if d >= cfg.d_disc:
        return 0.0
    return cfg.w_disc * (d - cfg.d_disc) / cfg.d_disc


def _proximity_penalty(d_min: float, cfg: RewardConfig) -> float:
    if cfg.mode == DISCOMFORT_LINEAR:
        return linear_discomfort_penalty(d_min, cfg)
    return discomfort_penalty(d_min, cfg)


def potential_reward(d_goal_prev: float, d_goal_curr: float, cfg: RewardConfig) -> float:
    """Progress reward: change in goal distance times a constant factor.

    The Gaussian factor is evaluated at its own mean, which makes it exactly
    ``w_pot`` regardless of mu_pot/sigma_pot; every meter of progress is
    weighted equally.
    """
    if not (math.isfinite(d_goal_prev) and math.isfinite(d_goal_curr)):
        raise ValueError("goal distances must be finite")
    factor = gaussian_reward(GaussianTerm(cfg.w_pot, cfg.mu_pot, cfg.sigma_pot), cfg.mu_pot)
    return (d_goal_prev - d_goal_curr) * factor


def prediction_penalty(occ: PredictionOccupancy, cfg: RewardConfig) -> float:
    """Penalty for intruding on predicted trajectories.

    Per human, each intersection at lookahead k contributes ``r_col / 2**k``
    and the per-human penalty is the minimum (most negative) such term; the
    overall penalty is the minimum across humans.  No humans, or no
    intersections, gives 0.
    """
    worst = 0.0
    r_col = cfg.r_col
    for row in occ.bits:
        per_human = 0.0
        for k, hit in enumerate(row, start=1):
            term = r_col / (2.0**k) if hit else 0.0
            if term < per_human:
                per_human = term
        if per_human < worst:
            worst = per_human
    return worst


@dataclass(frozen=True, slots=True)
class StepSummary:
    """Everything the total-reward dispatch needs about one step."""

    goal_reached: bool
    collision: bool
    d_min: float
    d_goal_prev: float
    d_goal_curr: float
    occupancy: PredictionOccupancy


@dataclass(frozen=True, slots=True)
class RewardBreakdown:
    """Total reward and the value each component actually contributed."""

    total: float
    goal: float
    collision: float
    prediction: float
    discomfort: float
    potential: float
    in_danger_zone: bool

    def as_dict(self) -> dict[str, float]:
        return {
            "goal": self.goal,
            "collision": self.collision,
            "prediction": self.prediction,
            "discomfort": self.discomfort,
            "potential": self.potential,
        }


def reward_breakdown(summary: StepSummary, cfg: RewardConfig) -> RewardBreakdown:
    """Dispatch exactly one of the four reward branches.

    Priority: goal, then collision, then danger zone (prediction +
    discomfort), then the default branch (prediction + progress).  A step
    that is simultaneously goal and collision resolves to goal.
    """
    if summary.goal_reached:
        return RewardBreakdown(cfg.r_goal, cfg.r_goal, 0.0, 0.0, 0.0, 0.0, False)
    if summary.collision:
        return RewardBreakdown(cfg.r_col, 0.0, cfg.r_col, 0.0, 0.0, 0.0, False)
    pred = prediction_penalty(summary.occupancy, cfg)
    if summary.d_min < cfg.d_disc:
        disc = _proximity_penalty(summary.d_min, cfg)
        return RewardBreakdown(pred + disc, 0.0, 0.0, pred, disc, 0.0, True)
    pot = potential_reward(summary.d_goal_prev, summary.d_goal_curr, cfg)
    return RewardBreakdown(pred + pot, 0.0, 0.0, pred, 0.0, pot, False)


def total_reward(summary: StepSummary, cfg: RewardConfig) -> float:
    """Total reward for one step (see :func:`reward_breakdown`)."""
    return reward_breakdown(summary, cfg).total


def reward_balance(cfg: RewardConfig) -> dict[str, float]:
    """Peak magnitudes of the shaped components and their ratio.

    Diagnostic only: balance between components is a tuning concern, so the
    ratio is reported in results files rather than asserted anywhere.
    """
    max_disc = abs(cfg.w_disc)
    max_pred = abs(cfg.r_col) / 2.0
    return {
        "max_abs_discomfort": max_disc,
        "max_abs_prediction": max_pred,
        "prediction_to_discomfort_ratio": max_pred / max_disc if max_disc else math.inf,
    }
