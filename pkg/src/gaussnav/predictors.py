"""K-step human trajectory predictors feeding the trajectory penalty.

Two ablation predictors: constant velocity (dead reckoning from current
velocity) and ground truth (robot-free rollout of a cloned human subsystem,
exact because the crowd ignores the robot).  Predictions are one-shot from
the information available at the current step, with no mid-horizon
re-sensing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .simulator import AgentState, CrowdSim

__all__ = ["TrajectoryPrediction", "const_vel_predict", "ground_truth_predict"]


@dataclass(frozen=True, slots=True)
class TrajectoryPrediction:
    """Predicted center positions for each covered human.

    ``points[i][k-1]`` is human ``ids[i]``'s predicted center at lookahead
    step k (k = 1..horizon); the prediction timestep equals the simulation
    timestep.
    """

    ids: tuple[int, ...]
    points: tuple[tuple[tuple[float, float], ...], ...]
    radii: tuple[float, ...]
    horizon: int
    dt: float

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not (len(self.ids) == len(self.points) == len(self.radii)):
            raise ValueError("ids, points and radii must be parallel")
        for track in self.points:
            if len(track) != self.horizon:
                raise ValueError(
                    f"each track must have exactly {self.horizon} points, got {len(track)}"
                )


def const_vel_predict(
    humans: Sequence["AgentState"],
    horizon: int,
    dt: float,
    ids: Optional[Sequence[int]] = None,
) -> TrajectoryPrediction:
    """Dead-reckoned prediction: position + k*dt*velocity for k = 1..horizon.

    The k = 1 point coincides with one holonomic integration step, so the
    predictor is consistent with the simulator kinematics for humans whose
    velocity stays constant.
    """
    if ids is None:
        ids = range(len(humans))
    tracks = []
    for h in humans:
        tracks.append(
            tuple((h.px + k * dt * h.vx, h.py + k * dt * h.vy) for k in range(1, horizon + 1))
        )
    return TrajectoryPrediction(
        ids=tuple(ids),
        points=tuple(tracks),
        radii=tuple(h.radius for h in humans),
        horizon=horizon,
        dt=dt,
    )


def ground_truth_predict(world: "CrowdSim", horizon: int) -> TrajectoryPrediction:
    """Exact prediction of the currently sensed humans.

    Clones the human subsystem (states plus the goal-redraw RNG stream) and
    advances it ``horizon`` steps under the humans' actual policies.  Because
    humans ignore the robot, the rollout reproduces the positions the main
    simulation will realize, bit for bit.
    """
    visible = world._visible_ids()
    clone = world.clone_human_subsystem()
    tracks: list[list[tuple[float, float]]] = [[] for _ in visible]
    for _ in range(horizon):
        clone.advance_humans()
        for slot, idx in enumerate(visible):
            h = clone.humans[idx]
            tracks[slot].append((h.px, h.py))
    return TrajectoryPrediction(
        ids=tuple(visible),
        points=tuple(tuple(t) for t in tracks),
        radii=tuple(world.humans[i].radius for i in visible),
        horizon=horizon,
        dt=world.world.dt,
    )
