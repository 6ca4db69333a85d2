"""Episode engine: scenario randomization, synchronous stepping of the robot
and the crowd, range-limited sensing, termination, and seeded replay.

Determinism contract: (WorldConfig, RewardConfig, predictor, seed, action
sequence) fully determine an episode.  All randomness flows through two
``random.Random`` streams derived from the reset seed: one consumed only
during reset, one consumed only by in-episode human goal redraws.  The
latter is the stream cloned for exact ground-truth prediction rollouts.
"""
from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, fields, replace
from typing import Callable, Iterable, Optional, Sequence

from .crowd_policies import OrcaParams, SocialForceParams, orca_velocity, social_force_velocity
from .predictors import TrajectoryPrediction, const_vel_predict, ground_truth_predict
from .rewards import PredictionOccupancy, RewardConfig, StepSummary, reward_breakdown

__all__ = [
    "AgentState",
    "ConfigError",
    "CrowdSim",
    "EpisodeOver",
    "EpisodeRecord",
    "Observation",
    "OBS_LAYOUT_VERSION",
    "OUTCOME_COLLISION",
    "OUTCOME_SUCCESS",
    "OUTCOME_TIMEOUT",
    "PREDICTORS",
    "SimulationError",
    "StepLog",
    "WorldConfig",
    "flatten_observation",
    "observation_layout",
    "parse_record_lines",
    "record_to_lines",
    "run_episode",
]

OUTCOME_SUCCESS = "success"
OUTCOME_COLLISION = "collision"
OUTCOME_TIMEOUT = "timeout"

PREDICTOR_NONE = "none"
PREDICTOR_CONST_VEL = "const_vel"
PREDICTOR_GROUND_TRUTH = "ground_truth"
PREDICTORS = (PREDICTOR_NONE, PREDICTOR_CONST_VEL, PREDICTOR_GROUND_TRUTH)

HUMAN_POLICY_ORCA = "orca"
HUMAN_POLICY_SF = "sf"

KINEMATICS_HOLONOMIC = "holonomic"
KINEMATICS_UNICYCLE = "unicycle"

OBS_LAYOUT_VERSION = 1

_PLACEMENT_ATTEMPTS = 100
_PLACEMENT_CLEARANCE = 0.1  # spawn surface clearance between discs, meters


class SimulationError(Exception):
    """Base error for the episode engine."""


class ConfigError(SimulationError):
    """Invalid or unsatisfiable configuration."""


class EpisodeOver(SimulationError):
    """step() was called after the episode terminated."""


@dataclass(slots=True)
class AgentState:
    """Disc agent: position, velocity, radius, goal, speed cap, heading.

    ``theta`` is only meaningful under unicycle kinematics.
    """

    px: float
    py: float
    vx: float
    vy: float
    radius: float
    gx: float
    gy: float
    v_max: float
    theta: float = 0.0

    def copy(self) -> "AgentState":
        return AgentState(
            self.px, self.py, self.vx, self.vy, self.radius,
            self.gx, self.gy, self.v_max, self.theta,
        )

    def goal_distance(self) -> float:
        return math.hypot(self.gx - self.px, self.gy - self.py)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.px, self.py, self.vx, self.vy, self.radius,
                self.gx, self.gy, self.v_max, self.theta)


@dataclass(frozen=True)
class WorldConfig:
    """Arena, population, sensing, kinematics, timing, and randomization."""

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
    human_policy: str = HUMAN_POLICY_ORCA
    goal_change_prob: float = 0.0
    min_start_goal_separation: float = 6.0
    kinematics: str = KINEMATICS_HOLONOMIC
    memory_steps: int = 5
    seed: int = 0
    orca: Optional[OrcaParams] = None
    social_force: Optional[SocialForceParams] = None

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ConfigError("dt must be > 0")
        if self.t_max <= self.dt:
            raise ConfigError("t_max must exceed dt")
        if self.n_humans < 0:
            raise ConfigError("n_humans must be >= 0")
        if self.arena_side <= 0.0 or self.sensor_range <= 0.0:
            raise ConfigError("arena_side and sensor_range must be > 0")
        if self.fov_deg != 360.0:
            raise ConfigError("only a 360 degree field of view is supported")
        if self.robot_radius <= 0.0 or self.robot_v_max <= 0.0:
            raise ConfigError("robot_radius and robot_v_max must be > 0")
        if self.goal_tolerance <= 0.0:
            raise ConfigError("goal_tolerance must be > 0")
        for name in ("human_radius_range", "human_vmax_range"):
            lo, hi = getattr(self, name)
            if not (0.0 < lo <= hi):
                raise ConfigError(f"{name} must satisfy 0 < low <= high")
        if self.human_policy not in (HUMAN_POLICY_ORCA, HUMAN_POLICY_SF):
            raise ConfigError(f"unknown human_policy {self.human_policy!r}")
        if not (0.0 <= self.goal_change_prob <= 1.0):
            raise ConfigError("goal_change_prob must be in [0, 1]")
        if self.min_start_goal_separation < 0.0:
            raise ConfigError("min_start_goal_separation must be >= 0")
        if self.kinematics not in (KINEMATICS_HOLONOMIC, KINEMATICS_UNICYCLE):
            raise ConfigError(f"unknown kinematics {self.kinematics!r}")
        if self.memory_steps < 1:
            raise ConfigError("memory_steps must be >= 1")
        max_sep = math.hypot(self.arena_side, self.arena_side)
        if self.min_start_goal_separation >= max_sep:
            raise ConfigError("min_start_goal_separation exceeds the arena diagonal")

    def orca_params(self) -> OrcaParams:
        base = self.orca or OrcaParams(dt=self.dt)
        if base.dt != self.dt:
            base = replace(base, dt=self.dt)
        return base

    def social_force_params(self) -> SocialForceParams:
        base = self.social_force or SocialForceParams(dt=self.dt)
        if base.dt != self.dt:
            base = replace(base, dt=self.dt)
        return base

    def max_steps(self) -> int:
        return int(math.floor(self.t_max / self.dt + 1e-9))


@dataclass(frozen=True)
class Observation:
    """What the robot senses: its own full state plus every human whose
    center lies within sensor range, with short position histories."""

    time: float
    step: int
    dt: float
    robot: AgentState
    visible_ids: tuple[int, ...]
    humans: tuple[AgentState, ...]
    visible_mask: tuple[bool, ...]
    history: dict[int, tuple[tuple[float, float], ...]]
    prediction: Optional[TrajectoryPrediction]


@dataclass(slots=True)
class StepLog:
    """One step of an episode record."""

    step: int
    t: float
    robot: tuple[float, ...]  # px, py, vx, vy, theta
    action: tuple[float, ...]
    applied: tuple[float, ...]  # velocity actually integrated (vx, vy)
    reward: float
    components: dict[str, float]
    d_min: float
    d_goal: float
    in_danger_zone: bool
    humans: tuple[tuple[float, float], ...]


@dataclass(slots=True)
class EpisodeRecord:
    """Full per-episode log plus the aggregates every metric needs."""

    seed: int
    outcome: str
    n_steps: int
    dt: float
    duration: float
    path_length: float
    start_goal_distance: float
    intrusion_steps: int
    cum_reward: float
    robot_radius: float
    human_radii: tuple[float, ...]
    robot_start: tuple[float, float]
    robot_goal: tuple[float, float]
    d_disc: float
    steps: Optional[list[StepLog]] = None
    world: Optional[dict] = None
    reward_config: Optional[dict] = None
    predictor: Optional[str] = None


def config_dict(cfg) -> dict:
    """Plain-dict echo of a config dataclass for self-describing outputs.
    World echoes carry the effective controller parameters, not the unset
    optionals, so results files document what actually ran."""
    out = {}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, (OrcaParams, SocialForceParams)):
            value = config_dict(value)
        elif isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    if isinstance(cfg, WorldConfig):
        out["orca"] = config_dict(cfg.orca_params())
        out["social_force"] = config_dict(cfg.social_force_params())
    return out


class CrowdSim:
    """One episode context.  Create, ``reset(seed)``, then ``step(action)``
    until the returned done flag is set."""

    def __init__(
        self,
        world: WorldConfig,
        reward: RewardConfig,
        predictor: str = PREDICTOR_CONST_VEL,
    ):
        if predictor not in PREDICTORS:
            raise ConfigError(f"unknown predictor {predictor!r}; expected one of {PREDICTORS}")
        self.world = world
        self.reward_config = reward
        self.predictor = predictor
        self.robot: Optional[AgentState] = None
        self.humans: list[AgentState] = []
        self._human_rng: Optional[random.Random] = None
        self._history: list[deque] = []
        self._step_count = 0
        self._done = True
        self._outcome: Optional[str] = None
        self._d_goal_prev = 0.0

    # -- scenario sampling ---------------------------------------------------

    def _sample_position(self, rng: random.Random, radius: float) -> tuple[float, float]:
        half = self.world.arena_side / 2.0 - radius
        return rng.uniform(-half, half), rng.uniform(-half, half)

    def _sample_clear_position(
        self, rng: random.Random, radius: float, placed: list[tuple[float, float, float]]
    ) -> tuple[float, float]:
        for _ in range(_PLACEMENT_ATTEMPTS):
            x, y = self._sample_position(rng, radius)
            ok = True
            for ox, oy, orad in placed:
                if math.hypot(x - ox, y - oy) < radius + orad + _PLACEMENT_CLEARANCE:
                    ok = False
                    break
            if ok:
                return x, y
        raise ConfigError(
            f"could not place an agent of radius {radius} after "
            f"{_PLACEMENT_ATTEMPTS} attempts; the arena is overcrowded"
        )

    def _sample_goal(
        self,
        rng: random.Random,
        radius: float,
        from_x: float,
        from_y: float,
        strict: bool = True,
    ) -> tuple[float, float]:
        """Goal at least min_start_goal_separation away.  Strict sampling
        (reset) raises after bounded retries; lenient sampling (in-episode
        redraws) falls back to the farthest candidate seen."""
        best = None
        best_dist = -1.0
        min_sep = self.world.min_start_goal_separation
        for _ in range(_PLACEMENT_ATTEMPTS):
            x, y = self._sample_position(rng, radius)
            dist = math.hypot(x - from_x, y - from_y)
            if dist >= min_sep:
                return x, y
            if dist > best_dist:
                best, best_dist = (x, y), dist
        if strict:
            raise ConfigError(
                f"could not sample a goal {min_sep} m from ({from_x:.2f}, {from_y:.2f}) "
                f"after {_PLACEMENT_ATTEMPTS} attempts; shrink the separation or grow the arena"
            )
        return best

    def reset(self, seed: Optional[int] = None) -> Observation:
        """Sample a fresh scenario.  Identical seeds reproduce identical
        worlds; the draw order (robot, then each human in index order) is
        part of the determinism contract."""
        w = self.world
        rng = random.Random(w.seed if seed is None else seed)

        rx, ry = self._sample_position(rng, w.robot_radius)
        rgx, rgy = self._sample_goal(rng, w.robot_radius, rx, ry)
        self.robot = AgentState(rx, ry, 0.0, 0.0, w.robot_radius, rgx, rgy, w.robot_v_max)

        placed = [(rx, ry, w.robot_radius)]
        self.humans = []
        for _ in range(w.n_humans):
            radius = rng.uniform(*w.human_radius_range)
            v_max = rng.uniform(*w.human_vmax_range)
            hx, hy = self._sample_clear_position(rng, radius, placed)
            hgx, hgy = self._sample_goal(rng, radius, hx, hy)
            placed.append((hx, hy, radius))
            self.humans.append(AgentState(hx, hy, 0.0, 0.0, radius, hgx, hgy, v_max))

        self._human_rng = random.Random(rng.getrandbits(64))
        self._history = [deque(maxlen=w.memory_steps) for _ in self.humans]
        self._step_count = 0
        self._done = False
        self._outcome = None
        self._d_goal_prev = self.robot.goal_distance()
        self._record_visibility()
        return self._observe()

    # -- human subsystem -----------------------------------------------------

    def _maintain_human_goals(self) -> None:
        w = self.world
        rng = self._human_rng
        for human in self.humans:
            redraw = False
            if w.goal_change_prob > 0.0 and rng.random() < w.goal_change_prob:
                redraw = True
            if math.hypot(human.gx - human.px, human.gy - human.py) <= human.radius:
                redraw = True
            if redraw:
                human.gx, human.gy = self._sample_goal(
                    rng, human.radius, human.px, human.py, strict=False
                )

    def _human_velocities(self) -> list[tuple[float, float]]:
        w = self.world
        humans = self.humans
        if w.human_policy == HUMAN_POLICY_ORCA:
            params = w.orca_params()
            out = []
            for i, human in enumerate(humans):
                others = humans[:i] + humans[i + 1 :]
                dist = math.hypot(human.gx - human.px, human.gy - human.py)
                if dist > 1e-12:
                    speed = min(human.v_max, dist / w.dt)
                    pref = ((human.gx - human.px) / dist * speed,
                            (human.gy - human.py) / dist * speed)
                else:
                    pref = (0.0, 0.0)
                out.append(orca_velocity(human, others, pref, params))
            return out
        params = w.social_force_params()
        return [
            social_force_velocity(
                human, humans[:i] + humans[i + 1 :], (human.gx, human.gy), params
            )
            for i, human in enumerate(humans)
        ]

    def advance_humans(self) -> None:
        """One synchronous human-only step (goal upkeep, policies against the
        pre-step snapshot, integration).  The main step and ground-truth
        prediction rollouts share this exact path."""
        self._maintain_human_goals()
        velocities = self._human_velocities()
        dt = self.world.dt
        for human, (nvx, nvy) in zip(self.humans, velocities):
            human.px += nvx * dt
            human.py += nvy * dt
            human.vx = nvx
            human.vy = nvy

    def clone_human_subsystem(self) -> "CrowdSim":
        """Independent copy of the human subsystem (states + RNG stream) for
        robot-free rollouts.  Humans ignore the robot, so advancing the clone
        reproduces their future exactly."""
        clone = CrowdSim.__new__(CrowdSim)
        clone.world = self.world
        clone.reward_config = self.reward_config
        clone.predictor = PREDICTOR_NONE
        clone.robot = None
        clone.humans = [h.copy() for h in self.humans]
        clone._human_rng = random.Random()
        clone._human_rng.setstate(self._human_rng.getstate())
        clone._history = []
        clone._step_count = self._step_count
        clone._done = False
        clone._outcome = None
        clone._d_goal_prev = 0.0
        return clone

    # -- sensing ---------------------------------------------------------

    def _visible_ids(self) -> list[int]:
        robot = self.robot
        limit = self.world.sensor_range
        return [
            i
            for i, h in enumerate(self.humans)
            if math.hypot(h.px - robot.px, h.py - robot.py) <= limit
        ]

    def _record_visibility(self) -> None:
        for i in self._visible_ids():
            h = self.humans[i]
            self._history[i].append((h.px, h.py))

    def _predict(self, visible: list[int]) -> Optional[TrajectoryPrediction]:
        if self.predictor == PREDICTOR_NONE:
            return None
        horizon = self.reward_config.horizon
        if self.predictor == PREDICTOR_CONST_VEL:
            return const_vel_predict(
                [self.humans[i] for i in visible], horizon, self.world.dt, ids=visible
            )
        return ground_truth_predict(self, horizon)

    def _occupancy(self, prediction: Optional[TrajectoryPrediction]) -> PredictionOccupancy:
        horizon = self.reward_config.horizon
        if prediction is None:
            return PredictionOccupancy.empty(horizon)
        robot = self.robot
        rows = []
        for track, radius in zip(prediction.points, prediction.radii):
            reach = robot.radius + radius
            rows.append(
                tuple(
                    math.hypot(px - robot.px, py - robot.py) <= reach
                    for px, py in track
                )
            )
        return PredictionOccupancy(rows, horizon)

    def _observe(self) -> Observation:
        visible = self._visible_ids()
        prediction = self._predict(visible)
        mask = [False] * len(self.humans)
        for i in visible:
            mask[i] = True
        return Observation(
            time=self._step_count * self.world.dt,
            step=self._step_count,
            dt=self.world.dt,
            robot=self.robot.copy(),
            visible_ids=tuple(visible),
            humans=tuple(self.humans[i].copy() for i in visible),
            visible_mask=tuple(mask),
            history={i: tuple(self._history[i]) for i in visible},
            prediction=prediction,
        )

    # -- stepping ----------------------------------------------------------

    def _apply_action(self, action: Sequence[float]) -> tuple[float, float, bool]:
        w = self.world
        robot = self.robot
        if len(action) != 2:
            raise SimulationError(f"action must have 2 components, got {len(action)}")
        a0, a1 = float(action[0]), float(action[1])
        if not (math.isfinite(a0) and math.isfinite(a1)):
            raise SimulationError("action components must be finite")
        clamped = False
        if w.kinematics == KINEMATICS_HOLONOMIC:
            speed = math.hypot(a0, a1)
            if speed > robot.v_max and speed > 0.0:
                a0, a1 = a0 / speed * robot.v_max, a1 / speed * robot.v_max
                clamped = True
            return a0, a1, clamped
        # unicycle: (forward speed, angular rate)
        if abs(a0) > robot.v_max:
            a0 = math.copysign(robot.v_max, a0)
            clamped = True
        robot.theta += a1 * w.dt
        return a0 * math.cos(robot.theta), a0 * math.sin(robot.theta), clamped

    def step(self, action: Sequence[float]):
        """Advance one step.  Returns (observation, reward, done, info).

        Order within the step: human goal upkeep and policies against the
        pre-step snapshot, integration of everyone, termination checks
        (goal, then collision, then timeout), then the reward.
        """
        if self._done:
            raise EpisodeOver("step() called on a finished episode; call reset() first")
        w = self.world
        robot = self.robot

        vx, vy, clamped = self._apply_action(action)
        self.advance_humans()
        robot.px += vx * w.dt
        robot.py += vy * w.dt
        robot.vx = vx
        robot.vy = vy

        self._step_count += 1
        self._record_visibility()

        d_goal = robot.goal_distance()
        d_min = math.inf
        for h in self.humans:
            surface = math.hypot(h.px - robot.px, h.py - robot.py) - (robot.radius + h.radius)
            if surface < d_min:
                d_min = surface

        goal_reached = d_goal <= w.goal_tolerance
        collision = d_min <= 0.0
        timeout = self._step_count >= w.max_steps()
        if goal_reached:
            self._outcome = OUTCOME_SUCCESS
        elif collision:
            self._outcome = OUTCOME_COLLISION
        elif timeout:
            self._outcome = OUTCOME_TIMEOUT
        self._done = self._outcome is not None

        observation = self._observe()
        occupancy = self._occupancy(observation.prediction)
        summary = StepSummary(
            goal_reached=goal_reached,
            collision=collision,
            d_min=max(d_min, 0.0) if math.isfinite(d_min) else math.inf,
            d_goal_prev=self._d_goal_prev,
            d_goal_curr=d_goal,
            occupancy=occupancy,
        )
        breakdown = reward_breakdown(summary, self.reward_config)
        self._d_goal_prev = d_goal

        info = {
            "outcome": self._outcome,
            "components": breakdown.as_dict(),
            "in_danger_zone": breakdown.in_danger_zone,
            "d_min": d_min,
            "d_goal": d_goal,
            "applied_velocity": (vx, vy),
            "action_clamped": clamped,
            "time": self._step_count * w.dt,
        }
        return observation, breakdown.total, self._done, info

    @property
    def done(self) -> bool:
        return self._done

    @property
    def outcome(self) -> Optional[str]:
        return self._outcome


def run_episode(
    world: WorldConfig,
    reward: RewardConfig,
    policy: Callable[[Observation], Sequence[float]],
    seed: int,
    predictor: str = PREDICTOR_CONST_VEL,
    record_steps: bool = True,
) -> EpisodeRecord:
    """Run one seeded episode under ``policy`` and return its record."""
    sim = CrowdSim(world, reward, predictor)
    obs = sim.reset(seed)
    start = (sim.robot.px, sim.robot.py)
    goal = (sim.robot.gx, sim.robot.gy)
    start_goal_distance = sim.robot.goal_distance()
    human_radii = tuple(h.radius for h in sim.humans)

    steps: Optional[list[StepLog]] = [] if record_steps else None
    path_length = 0.0
    intrusion_steps = 0
    cum_reward = 0.0
    prev_x, prev_y = start
    done = False
    while not done:
        action = tuple(float(a) for a in policy(obs))
        obs, reward_value, done, info = sim.step(action)
        robot = sim.robot
        path_length += math.hypot(robot.px - prev_x, robot.py - prev_y)
        prev_x, prev_y = robot.px, robot.py
        cum_reward += reward_value
        # the intrusion metric counts every step with d_min inside d_disc,
        # terminal steps included (unlike the reward branch flag)
        intruding = info["d_min"] < reward.d_disc
        if intruding:
            intrusion_steps += 1
        if steps is not None:
            steps.append(
                StepLog(
                    step=sim._step_count,
                    t=info["time"],
                    robot=(robot.px, robot.py, robot.vx, robot.vy, robot.theta),
                    action=action,
                    applied=info["applied_velocity"],
                    reward=reward_value,
                    components=info["components"],
                    d_min=info["d_min"],
                    d_goal=info["d_goal"],
                    in_danger_zone=intruding,
                    humans=tuple((h.px, h.py) for h in sim.humans),
                )
            )

    return EpisodeRecord(
        seed=seed,
        outcome=sim.outcome,
        n_steps=sim._step_count,
        dt=world.dt,
        duration=sim._step_count * world.dt,
        path_length=path_length,
        start_goal_distance=start_goal_distance,
        intrusion_steps=intrusion_steps,
        cum_reward=cum_reward,
        robot_radius=world.robot_radius,
        human_radii=human_radii,
        robot_start=start,
        robot_goal=goal,
        d_disc=reward.d_disc,
        steps=steps,
        world=config_dict(world),
        reward_config=config_dict(reward),
        predictor=predictor,
    )


# -- record serialization (line-delimited JSON, one step per line) -----------


def _json(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def _finite_or_none(value: float):
    return value if math.isfinite(value) else None


def record_to_lines(record: EpisodeRecord) -> list[str]:
    """Serialize a record as line-delimited JSON: one ``meta`` line, one
    ``step`` line per step (in order), one ``end`` line.  Infinite d_min
    (empty arena) is encoded as null."""
    lines = [
        _json(
            {
                "type": "meta",
                "layout_version": OBS_LAYOUT_VERSION,
                "seed": record.seed,
                "dt": record.dt,
                "robot_radius": record.robot_radius,
                "human_radii": list(record.human_radii),
                "robot_start": list(record.robot_start),
                "robot_goal": list(record.robot_goal),
                "start_goal_distance": record.start_goal_distance,
                "d_disc": record.d_disc,
                "world": record.world,
                "reward": record.reward_config,
                "predictor": record.predictor,
            }
        )
    ]
    for s in record.steps or ():
        lines.append(
            _json(
                {
                    "type": "step",
                    "i": s.step,
                    "t": s.t,
                    "robot": list(s.robot),
                    "action": list(s.action),
                    "applied": list(s.applied),
                    "reward": s.reward,
                    "components": s.components,
                    "d_min": _finite_or_none(s.d_min),
                    "d_goal": s.d_goal,
                    "danger": s.in_danger_zone,
                    "humans": [list(p) for p in s.humans],
                }
            )
        )
    lines.append(
        _json(
            {
                "type": "end",
                "outcome": record.outcome,
                "n_steps": record.n_steps,
                "duration": record.duration,
                "path_length": record.path_length,
                "intrusion_steps": record.intrusion_steps,
                "cum_reward": record.cum_reward,
            }
        )
    )
    return lines


def parse_record_lines(lines: Iterable[str]) -> list[EpisodeRecord]:
    """Parse one or more concatenated line-delimited records."""
    records: list[EpisodeRecord] = []
    meta = None
    steps: list[StepLog] = []
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        obj = json.loads(raw)
        kind = obj.get("type")
        if kind == "meta":
            if meta is not None:
                raise ValueError("record stream has a meta line without a closing end line")
            meta = obj
            steps = []
        elif kind == "step":
            if meta is None:
                raise ValueError("record stream has a step line before any meta line")
            d_min = obj["d_min"]
            steps.append(
                StepLog(
                    step=obj["i"],
                    t=obj["t"],
                    robot=tuple(obj["robot"]),
                    action=tuple(obj["action"]),
                    applied=tuple(obj["applied"]),
                    reward=obj["reward"],
                    components=obj["components"],
                    d_min=math.inf if d_min is None else d_min,
                    d_goal=obj["d_goal"],
                    in_danger_zone=obj["danger"],
                    humans=tuple(tuple(p) for p in obj["humans"]),
                )
            )
        elif kind == "end":
            if meta is None:
                raise ValueError("record stream has an end line before any meta line")
            records.append(
                EpisodeRecord(
                    seed=meta["seed"],
                    outcome=obj["outcome"],
                    n_steps=obj["n_steps"],
                    dt=meta["dt"],
                    duration=obj["duration"],
                    path_length=obj["path_length"],
                    start_goal_distance=meta["start_goal_distance"],
                    intrusion_steps=obj["intrusion_steps"],
                    cum_reward=obj["cum_reward"],
                    robot_radius=meta["robot_radius"],
                    human_radii=tuple(meta["human_radii"]),
                    robot_start=tuple(meta["robot_start"]),
                    robot_goal=tuple(meta["robot_goal"]),
                    d_disc=meta["d_disc"],
                    steps=steps,
                    world=meta.get("world"),
                    reward_config=meta.get("reward"),
                    predictor=meta.get("predictor"),
                )
            )
            meta = None
            steps = []
        else:
            raise ValueError(f"unknown record line type {kind!r}")
    if meta is not None:
        raise ValueError("record stream ended without an end line")
    return records


# -- flat observation layout (service sessions and the env bridge) -----------


def observation_layout(world: WorldConfig) -> dict:
    """Versioned descriptor of the flat observation vector."""
    return {
        "version": OBS_LAYOUT_VERSION,
        "robot": ["px", "py", "vx", "vy", "radius", "gx", "gy", "v_max", "theta"],
        "human_block": ["px", "py", "vx", "vy", "radius"],
        "n_max": world.n_humans,
        "mask": "one float (0.0/1.0) per human slot, appended after the blocks",
        "length": 9 + 6 * world.n_humans,
    }


def flatten_observation(obs: Observation, n_max: int) -> list[float]:
    """Flatten per the layout: 9 robot values, n_max 5-value human blocks
    (zeros for unsensed slots), then the n_max visibility mask."""
    flat = list(obs.robot.as_tuple())
    blocks = {i: h for i, h in zip(obs.visible_ids, obs.humans)}
    for i in range(n_max):
        h = blocks.get(i)
        if h is None:
            flat.extend((0.0, 0.0, 0.0, 0.0, 0.0))
        else:
            flat.extend((h.px, h.py, h.vx, h.vy, h.radius))
    mask = list(obs.visible_mask) + [False] * (n_max - len(obs.visible_mask))
    flat.extend(1.0 if m else 0.0 for m in mask[:n_max])
    return flat
