"""Desk-scale derivative-free policy search (cross-entropy method).

A diagonal-Gaussian sampling distribution over the potential-field policy
parameters is refit each iteration to the elite fraction of the population.
Every candidate in every iteration is scored on the same fixed episode
seeds (common random numbers), which makes the whole optimization
trajectory reproducible and makes elite selection a pure ranking.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .metrics import MetricsReport, compute_metrics
from .policies import PolicyParams, PotentialFieldPolicy
from .rewards import RewardConfig
from .simulator import PREDICTOR_CONST_VEL, WorldConfig, run_episode

__all__ = ["IterationStats", "LearnerConfig", "cross_entropy_optimize", "evaluate_policy"]


@dataclass(frozen=True)
class LearnerConfig:
    population: int = 16
    elite_frac: float = 0.25
    iterations: int = 30
    episodes_per_candidate: int = 4
    eval_seed_base: int = 10_000
    seed: int = 0
    discount: float = 0.99  # recorded in reports; the target is undiscounted return
    init_mean: tuple[float, ...] = (0.0, 0.0, 0.3, 0.0, 1.0)
    init_sigma: tuple[float, ...] = (1.0, 1.0, 0.3, 1.0, 0.5)
    sigma_floor: float = 0.05

    def __post_init__(self) -> None:
        if self.population < 1 or self.iterations < 1 or self.episodes_per_candidate < 1:
            raise ValueError("population, iterations and episodes_per_candidate must be >= 1")
        if not (0.0 < self.elite_frac <= 1.0):
            raise ValueError("elite_frac must be in (0, 1]")
        if len(self.init_mean) != len(self.init_sigma):
            raise ValueError("init_mean and init_sigma must have the same length")
        if self.sigma_floor <= 0.0:
            raise ValueError("sigma_floor must be > 0")
        if not (0.0 < self.discount <= 1.0):
            raise ValueError("discount must be in (0, 1]")


@dataclass
class IterationStats:
    """Per-iteration learning-curve point."""

    iteration: int
    mean_params: PolicyParams
    best_params: PolicyParams
    population_return: float
    elite_return: float
    mean_policy_return: float
    mean_policy_report: MetricsReport


def evaluate_policy(
    policy: Callable,
    reward: RewardConfig,
    world: WorldConfig,
    seeds: Sequence[int],
    predictor: str = PREDICTOR_CONST_VEL,
) -> tuple[float, MetricsReport]:
    """Mean undiscounted return and metrics of ``policy`` over one episode
    per seed.  Deterministic in (policy, configs, seeds)."""
    if not seeds:
        raise ValueError("evaluate_policy requires at least one seed")
    records = [
        run_episode(world, reward, policy, seed, predictor=predictor, record_steps=False)
        for seed in seeds
    ]
    mean_return = sum(r.cum_reward for r in records) / len(records)
    return mean_return, compute_metrics(records)


def cross_entropy_optimize(
    cfg: LearnerConfig,
    reward: RewardConfig,
    world: WorldConfig,
    predictor: str = PREDICTOR_CONST_VEL,
    on_iteration: Optional[Callable[[IterationStats], bool]] = None,
) -> tuple[PolicyParams, list[IterationStats]]:
    """Run the optimization; returns (best candidate ever, per-iteration
    curve).  ``on_iteration`` may return True to stop early (the curve keeps
    every completed iteration)."""
    rng = random.Random(cfg.seed)
    dim = len(cfg.init_mean)
    mean = list(cfg.init_mean)
    sigma = [max(s, cfg.sigma_floor) for s in cfg.init_sigma]
    train_seeds = [cfg.eval_seed_base + j for j in range(cfg.episodes_per_candidate)]
    n_elite = max(1, math.ceil(cfg.elite_frac * cfg.population))

    best_params: Optional[PolicyParams] = None
    best_return = -math.inf
    history: list[IterationStats] = []

    for iteration in range(1, cfg.iterations + 1):
        candidates = []
        for _ in range(cfg.population):
            vector = [rng.gauss(m, s) for m, s in zip(mean, sigma)]
            candidates.append(vector)

        scored = []
        for idx, vector in enumerate(candidates):
            params = PolicyParams.from_vector(vector)
            ret, _ = evaluate_policy(
                PotentialFieldPolicy(params), reward, world, train_seeds, predictor
            )
            scored.append((ret, idx, vector))
            if ret > best_return:
                best_return = ret
                best_params = params

        # ties broken by sampling order for determinism
        scored.sort(key=lambda item: (-item[0], item[1]))
        elites = scored[:n_elite]
        elite_vectors = [vector for _, _, vector in elites]

        mean = [sum(v[d] for v in elite_vectors) / n_elite for d in range(dim)]
        for d in range(dim):
            variance = sum((v[d] - mean[d]) ** 2 for v in elite_vectors) / n_elite
            sigma[d] = max(math.sqrt(variance), cfg.sigma_floor)

        mean_params = PolicyParams.from_vector(mean)
        mean_return, mean_report = evaluate_policy(
            PotentialFieldPolicy(mean_params), reward, world, train_seeds, predictor
        )
        stats = IterationStats(
            iteration=iteration,
            mean_params=mean_params,
            best_params=best_params,
            population_return=sum(item[0] for item in scored) / len(scored),
            elite_return=sum(item[0] for item in elites) / len(elites),
            mean_policy_return=mean_return,
            mean_policy_report=mean_report,
        )
        history.append(stats)
        if on_iteration is not None and on_iteration(stats):
            break

    assert best_params is not None
    return best_params, history
