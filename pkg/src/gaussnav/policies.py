"""Robot policies: a scripted straight-line controller and a parametric
potential-field controller whose gains are what the learner optimizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

from .simulator import Observation

__all__ = ["PolicyParams", "PotentialFieldPolicy", "straight_line_policy"]


def straight_line_policy(obs: Observation) -> tuple[float, float]:
    """Head straight for the goal at max speed, slowing on the final step so
    the goal center is hit exactly rather than overshot."""
    robot = obs.robot
    dx = robot.gx - robot.px
    dy = robot.gy - robot.py
    dist = math.hypot(dx, dy)
    if dist <= 1e-12:
        return 0.0, 0.0
    speed = min(robot.v_max, dist / obs.dt)
    return dx / dist * speed, dy / dist * speed


@dataclass(frozen=True)
class PolicyParams:
    """Gains of the potential-field controller (5 real parameters).

    The learner treats these as an unconstrained vector; the policy clips
    ranges and speeds internally and the simulator clamps the final command,
    so any real vector is a valid (if bad) policy.
    """

    goal_gain: float = 1.0
    repulse_gain: float = 1.0
    repulse_range: float = 0.5
    pred_gain: float = 1.0
    speed_frac: float = 1.0

    def as_vector(self) -> list[float]:
        return [getattr(self, f.name) for f in fields(self)]

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "PolicyParams":
        names = [f.name for f in fields(cls)]
        if len(vector) != len(names):
            raise ValueError(f"expected {len(names)} parameters, got {len(vector)}")
        return cls(**{n: float(v) for n, v in zip(names, vector)})


class PotentialFieldPolicy:
    """Goal attraction plus exponential repulsion from sensed humans and
    from their predicted positions (lookahead-k points weighted by 2^-k,
    mirroring how the trajectory penalty discounts lookahead)."""

    def __init__(self, params: PolicyParams):
        self.params = params

    def __call__(self, obs: Observation) -> tuple[float, float]:
        p = self.params
        robot = obs.robot
        reach = max(p.repulse_range, 0.05)

        dx = robot.gx - robot.px
        dy = robot.gy - robot.py
        dist = math.hypot(dx, dy)
        if dist > 1e-12:
            fx = p.goal_gain * dx / dist
            fy = p.goal_gain * dy / dist
        else:
            fx = fy = 0.0

        for human in obs.humans:
            ax = robot.px - human.px
            ay = robot.py - human.py
            d = math.hypot(ax, ay)
            if d <= 1e-12:
                continue
            surface = d - (robot.radius + human.radius)
            weight = p.repulse_gain * math.exp(min(-surface / reach, 20.0))
            fx += weight * ax / d
            fy += weight * ay / d

        if obs.prediction is not None:
            for track, radius in zip(obs.prediction.points, obs.prediction.radii):
                for k, (hx, hy) in enumerate(track, start=1):
                    ax = robot.px - hx
                    ay = robot.py - hy
                    d = math.hypot(ax, ay)
                    if d <= 1e-12:
                        continue
                    surface = d - (robot.radius + radius)
                    weight = p.pred_gain * math.exp(min(-surface / reach, 20.0)) / (2.0**k)
                    fx += weight * ax / d
                    fy += weight * ay / d

        magnitude = math.hypot(fx, fy)
        if magnitude <= 1e-12:
            return 0.0, 0.0
        cap = robot.v_max * min(max(p.speed_frac, 0.0), 1.0)
        speed = min(magnitude * robot.v_max, cap, dist / obs.dt)
        return fx / magnitude * speed, fy / magnitude * speed
