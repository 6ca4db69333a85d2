"""Reactive pedestrian controllers: reciprocal collision avoidance and a
social-force model.

Both controllers are pure functions of a pre-step snapshot, so a simulator
can evaluate every pedestrian against the same frozen world and apply the
results synchronously.  The robot is never passed in a pedestrian's
neighbor list; pedestrians steer only with respect to each other.

The reciprocal controller follows the published ORCA formulation: each
neighbor induces a half-plane of permitted velocities (each agent takes half
of the needed relative-velocity change), and the velocity closest to the
preferred one inside the intersection of half-planes and the speed disc is
found by an incremental two-dimensional linear program.  When the program is
infeasible the least-violating velocity is returned via the standard
projective (3D-lifted) fallback, so the function is total.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .simulator import AgentState

__all__ = [
    "OrcaParams",
    "SocialForceParams",
    "orca_velocity",
    "social_force_velocity",
]

_EPS = 1e-10
# Head-on ties are broken by nudging the relative position this many radians
# counter-clockwise, which deflects both agents to their left.
_TIE_BREAK_ROTATION = 1e-6
_COS_TIE = math.cos(_TIE_BREAK_ROTATION)
_SIN_TIE = math.sin(_TIE_BREAK_ROTATION)


@dataclass(frozen=True, slots=True)
class OrcaParams:
    time_horizon: float = 5.0
    neighbor_dist: float = 5.0
    max_neighbors: int = 10
    dt: float = 0.25
    # constraint-side radius inflation absorbing time-discretization error;
    # physical radii are untouched
    safety_margin: float = 0.1

    def __post_init__(self) -> None:
        for name in ("time_horizon", "neighbor_dist", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"OrcaParams.{name} must be > 0")
        if self.max_neighbors < 1:
            raise ValueError("OrcaParams.max_neighbors must be >= 1")
        if self.safety_margin < 0.0:
            raise ValueError("OrcaParams.safety_margin must be >= 0")


@dataclass(frozen=True, slots=True)
class SocialForceParams:
    relaxation_time: float = 0.5
    interaction_strength: float = 3.0
    interaction_range: float = 0.4
    dt: float = 0.25

    def __post_init__(self) -> None:
        for name in ("relaxation_time", "interaction_strength", "interaction_range", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"SocialForceParams.{name} must be > 0")


def _lp1(lines, line_no, radius, opt_vx, opt_vy, direction_opt):
    """Optimize along line ``line_no`` subject to the speed disc and the
    half-planes of all earlier lines.  Returns the point or None."""
    px, py, dx, dy = lines[line_no]
    dot_pd = px * dx + py * dy
    discriminant = dot_pd * dot_pd + radius * radius - (px * px + py * py)
    if discriminant < 0.0:
        return None
    sqrt_disc = math.sqrt(discriminant)
    t_left = -dot_pd - sqrt_disc
    t_right = -dot_pd + sqrt_disc

    for i in range(line_no):
        qx, qy, ex, ey = lines[i]
        denominator = dx * ey - dy * ex
        numerator = ex * (py - qy) - ey * (px - qx)
        if abs(denominator) <= _EPS:
            if numerator < 0.0:
                return None
            continue
        t = numerator / denominator
        if denominator >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return None

    if direction_opt:
        t = t_right if (opt_vx * dx + opt_vy * dy > 0.0) else t_left
    else:
        t = dx * (opt_vx - px) + dy * (opt_vy - py)
        t = min(max(t, t_left), t_right)
    return (px + t * dx, py + t * dy)


def _lp2(lines, radius, opt_vx, opt_vy, direction_opt):
    """Incremental 2D linear program over half-planes intersected with the
    speed disc.  Returns (first failing line index or len(lines), point)."""
    if direction_opt:
        # opt velocity is a unit direction here
        rx, ry = opt_vx * radius, opt_vy * radius
    elif opt_vx * opt_vx + opt_vy * opt_vy > radius * radius:
        norm = math.hypot(opt_vx, opt_vy)
        rx, ry = opt_vx / norm * radius, opt_vy / norm * radius
    else:
        rx, ry = opt_vx, opt_vy

    for i, (px, py, dx, dy) in enumerate(lines):
        if dx * (py - ry) - dy * (px - rx) > 0.0:
            result = _lp1(lines, i, radius, opt_vx, opt_vy, direction_opt)
            if result is None:
                return i, (rx, ry)
            rx, ry = result
    return len(lines), (rx, ry)


def _lp3(lines, begin, radius, rx, ry):
    """Least-violation fallback: starting from the first failing line, move
    the result to minimize the maximum constraint violation (equivalent to
    lifting the program one dimension and optimizing the violation slack)."""
    distance = 0.0
    for i in range(begin, len(lines)):
        px, py, dx, dy = lines[i]
        if dx * (py - ry) - dy * (px - rx) > distance:
            projected = []
            for j in range(i):
                qx, qy, ex, ey = lines[j]
                determinant = dx * ey - dy * ex
                if abs(determinant) <= _EPS:
                    if dx * ex + dy * ey > 0.0:
                        continue
                    ppx, ppy = 0.5 * (px + qx), 0.5 * (py + qy)
                else:
                    t = (ex * (py - qy) - ey * (px - qx)) / determinant
                    ppx, ppy = px + t * dx, py + t * dy
                ndx, ndy = ex - dx, ey - dy
                norm = math.hypot(ndx, ndy)
                projected.append((ppx, ppy, ndx / norm, ndy / norm))
            fail, result = _lp2(projected, radius, -dy, dx, True)
            if fail >= len(projected):
                # keep previous result on numerical failure; by construction
                # it already satisfies this sub-program
                rx, ry = result
            distance = dx * (py - ry) - dy * (px - rx)
    return rx, ry


def _orca_lines(
    state: "AgentState",
    neighbors: Sequence["AgentState"],
    params: OrcaParams,
) -> list[tuple[float, float, float, float]]:
    """Half-plane constraints (point + unit direction per line; permitted
    velocities lie to the left of the direction) induced by the nearest
    ``max_neighbors`` neighbors within ``neighbor_dist``."""
    px, py = state.px, state.py
    vx, vy = state.vx, state.vy

    candidates = []
    limit_sq = params.neighbor_dist * params.neighbor_dist
    for idx, nb in enumerate(neighbors):
        dx = nb.px - px
        dy = nb.py - py
        dist_sq = dx * dx + dy * dy
        if dist_sq < limit_sq:
            candidates.append((dist_sq, idx, nb))
    candidates.sort(key=lambda item: (item[0], item[1]))
    del candidates[params.max_neighbors :]

    inv_horizon = 1.0 / params.time_horizon
    inv_dt = 1.0 / params.dt
    lines: list[tuple[float, float, float, float]] = []

    for _, _, nb in candidates:
        rel_px = nb.px - px
        rel_py = nb.py - py
        rel_vx = vx - nb.vx
        rel_vy = vy - nb.vy

        # exact head-on encounter: rotate the relative position a hair CCW
        if (
            rel_px * rel_vy - rel_py * rel_vx == 0.0
            and rel_px * rel_vx + rel_py * rel_vy < 0.0
        ):
            rel_px, rel_py = (
                _COS_TIE * rel_px - _SIN_TIE * rel_py,
                _SIN_TIE * rel_px + _COS_TIE * rel_py,
            )

        dist_sq = rel_px * rel_px + rel_py * rel_py
        combined_r = state.radius + nb.radius + params.safety_margin
        combined_r_sq = combined_r * combined_r

        if dist_sq > combined_r_sq:
            wx = rel_vx - inv_horizon * rel_px
            wy = rel_vy - inv_horizon * rel_py
            w_len_sq = wx * wx + wy * wy
            dot1 = wx * rel_px + wy * rel_py
            if dot1 < 0.0 and dot1 * dot1 > combined_r_sq * w_len_sq:
                # project on the cut-off arc
                w_len = math.sqrt(w_len_sq)
                unit_wx, unit_wy = wx / w_len, wy / w_len
                dir_x, dir_y = unit_wy, -unit_wx
                scale = combined_r * inv_horizon - w_len
                ux, uy = scale * unit_wx, scale * unit_wy
            else:
                # project on the nearer cone leg
                leg = math.sqrt(dist_sq - combined_r_sq)
                if rel_px * wy - rel_py * wx > 0.0:
                    dir_x = (rel_px * leg - rel_py * combined_r) / dist_sq
                    dir_y = (rel_px * combined_r + rel_py * leg) / dist_sq
                else:
                    dir_x = -(rel_px * leg + rel_py * combined_r) / dist_sq
                    dir_y = -(-rel_px * combined_r + rel_py * leg) / dist_sq
                dot2 = rel_vx * dir_x + rel_vy * dir_y
                ux = dot2 * dir_x - rel_vx
                uy = dot2 * dir_y - rel_vy
        else:
            # already intersecting: escape within one time step
            wx = rel_vx - inv_dt * rel_px
            wy = rel_vy - inv_dt * rel_py
            w_len = math.hypot(wx, wy)
            if w_len > _EPS:
                unit_wx, unit_wy = wx / w_len, wy / w_len
            elif dist_sq > _EPS * _EPS:
                # degenerate: push straight apart along the line of centers
                dist = math.sqrt(dist_sq)
                unit_wx, unit_wy = -rel_px / dist, -rel_py / dist
            else:
                unit_wx, unit_wy = 1.0, 0.0  # coincident centers
            dir_x, dir_y = unit_wy, -unit_wx
            scale = combined_r * inv_dt - w_len
            ux, uy = scale * unit_wx, scale * unit_wy

        # reciprocity: this agent takes half of the needed velocity change
        lines.append((vx + 0.5 * ux, vy + 0.5 * uy, dir_x, dir_y))

    return lines


def orca_velocity(
    state: "AgentState",
    neighbors: Sequence["AgentState"],
    pref_velocity: tuple[float, float],
    params: OrcaParams,
) -> tuple[float, float]:
    """New velocity for ``state``: closest to ``pref_velocity`` inside all
    neighbor half-planes and the max-speed disc.

    Only neighbors within ``neighbor_dist`` (nearest ``max_neighbors``) are
    considered.  Already-overlapping pairs are pushed apart within one time
    step, and an infeasible constraint set degrades to the least-violating
    velocity, so the function is total.
    """
    lines = _orca_lines(state, neighbors, params)

    pvx, pvy = pref_velocity
    pref_speed = math.hypot(pvx, pvy)
    if pref_speed > state.v_max and pref_speed > 0.0:
        pvx, pvy = pvx / pref_speed * state.v_max, pvy / pref_speed * state.v_max

    fail, (new_vx, new_vy) = _lp2(lines, state.v_max, pvx, pvy, False)
    if fail < len(lines):
        new_vx, new_vy = _lp3(lines, fail, state.v_max, new_vx, new_vy)
    return new_vx, new_vy


def social_force_velocity(
    state: "AgentState",
    neighbors: Sequence["AgentState"],
    goal: tuple[float, float],
    params: SocialForceParams,
) -> tuple[float, float]:
    """Velocity after one ``dt`` of social-force integration.

    Goal attraction relaxes the current velocity toward the desired velocity
    (straight to the goal at max speed, capped so the goal is not overshot
    in a single step) over ``relaxation_time``; every neighbor repels with
    an acceleration decaying exponentially in surface distance.  The result
    is clamped to the agent's max speed.
    """
    gx, gy = goal
    to_goal_x = gx - state.px
    to_goal_y = gy - state.py
    goal_dist = math.hypot(to_goal_x, to_goal_y)
    if goal_dist > _EPS:
        desired_speed = min(state.v_max, goal_dist / params.dt)
        des_vx = to_goal_x / goal_dist * desired_speed
        des_vy = to_goal_y / goal_dist * desired_speed
    else:
        des_vx = des_vy = 0.0

    fx = (des_vx - state.vx) / params.relaxation_time
    fy = (des_vy - state.vy) / params.relaxation_time

    for nb in neighbors:
        away_x = state.px - nb.px
        away_y = state.py - nb.py
        dist = math.hypot(away_x, away_y)
        if dist <= _EPS:
            # coincident centers: deterministic fallback direction
            away_x, away_y, dist = 1.0, 0.0, 1.0
        surface = dist - (state.radius + nb.radius)
        magnitude = params.interaction_strength * math.exp(
            min(-surface / params.interaction_range, 50.0)
        )
        fx += magnitude * away_x / dist
        fy += magnitude * away_y / dist

    new_vx = state.vx + fx * params.dt
    new_vy = state.vy + fy * params.dt
    speed = math.hypot(new_vx, new_vy)
    if speed > state.v_max and speed > 0.0:
        new_vx, new_vy = new_vx / speed * state.v_max, new_vy / speed * state.v_max
    return new_vx, new_vy
