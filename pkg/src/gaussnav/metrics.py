"""Evaluation metrics over episode records.

SR is the fraction of successful episodes.  NT and PL are the mean
navigation time and path length over successful episodes only (absent when
nothing succeeded).  ITR is the fraction of steps spent inside the danger
zone, averaged per episode first so long episodes cannot dominate; the
pooled all-steps variant is also reported.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

from .simulator import EpisodeRecord, OUTCOME_COLLISION, OUTCOME_SUCCESS, OUTCOME_TIMEOUT

__all__ = [
    "MetricsReport",
    "aggregate_runs",
    "compute_metrics",
    "parse_table_row",
    "table_header",
    "table_row",
]


@dataclass(frozen=True)
class MetricsReport:
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


def compute_metrics(
    records: Sequence[EpisodeRecord], d_disc: Optional[float] = None
) -> MetricsReport:
    """Aggregate a batch of episode records.

    With ``d_disc`` given, intrusion steps are recomputed from the per-step
    logs at that radius (records must carry steps); otherwise the intrusion
    counts logged at the episode's own d_disc are used.
    """
    if not records:
        raise ValueError("compute_metrics requires at least one record")

    successes = collisions = timeouts = 0
    nav_times: list[float] = []
    path_lengths: list[float] = []
    ratios: list[float] = []
    intrusion_total = 0
    steps_total = 0

    for record in records:
        if record.outcome == OUTCOME_SUCCESS:
            successes += 1
            nav_times.append(record.duration)
            path_lengths.append(record.path_length)
        elif record.outcome == OUTCOME_COLLISION:
            collisions += 1
        elif record.outcome == OUTCOME_TIMEOUT:
            timeouts += 1
        else:
            raise ValueError(f"record has unknown outcome {record.outcome!r}")

        if d_disc is None:
            intrusion = record.intrusion_steps
        else:
            if record.steps is None:
                raise ValueError("recomputing ITR at a custom d_disc requires step logs")
            intrusion = sum(1 for s in record.steps if s.d_min < d_disc)
        if record.n_steps <= 0:
            raise ValueError("record has no steps")
        ratios.append(intrusion / record.n_steps)
        intrusion_total += intrusion
        steps_total += record.n_steps

    n = len(records)
    # fsum: exact accumulation, so the report is permutation-invariant
    return MetricsReport(
        episodes=n,
        successes=successes,
        collisions=collisions,
        timeouts=timeouts,
        success_rate=successes / n,
        nav_time=(math.fsum(nav_times) / successes) if successes else None,
        path_length=(math.fsum(path_lengths) / successes) if successes else None,
        intrusion_ratio=math.fsum(ratios) / n,
        intrusion_ratio_pooled=intrusion_total / steps_total,
    )


def aggregate_runs(reports: Sequence[MetricsReport]) -> tuple[float, float]:
    """Mean and sample standard deviation of SR across training runs
    (std is 0.0 for a single run)."""
    if not reports:
        raise ValueError("aggregate_runs requires at least one report")
    rates = [r.success_rate for r in reports]
    mean = sum(rates) / len(rates)
    std = statistics.stdev(rates) if len(rates) > 1 else 0.0
    return mean, std


_COLUMNS = ["label", "episodes", "sr_pct", "nt_s", "pl_m", "itr_pct", "sr_mean_pct", "sr_std_pct"]


def table_header() -> str:
    return ",".join(_COLUMNS)


def _cell(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def table_row(report: MetricsReport, label: str) -> str:
    """One results-table row (percentages for SR/ITR, seconds/meters for
    NT/PL).  Full float precision so rows parse back losslessly."""
    if "," in label or "\n" in label:
        raise ValueError("label must not contain commas or newlines")
    cells = [
        label,
        str(report.episodes),
        _cell(report.success_rate * 100.0),
        _cell(report.nav_time),
        _cell(report.path_length),
        _cell(report.intrusion_ratio * 100.0),
        _cell(None if report.sr_mean is None else report.sr_mean * 100.0),
        _cell(None if report.sr_std is None else report.sr_std * 100.0),
    ]
    return ",".join(cells)


def parse_table_row(row: str) -> tuple[str, dict[str, Optional[float]]]:
    """Inverse of :func:`table_row` (modulo fields the row does not carry)."""
    cells = row.split(",")
    if len(cells) != len(_COLUMNS):
        raise ValueError(f"expected {len(_COLUMNS)} cells, got {len(cells)}")
    label = cells[0]
    values: dict[str, Optional[float]] = {"episodes": float(cells[1])}
    for name, cell in zip(_COLUMNS[2:], cells[2:]):
        values[name] = float(cell) if cell else None
    return label, values
