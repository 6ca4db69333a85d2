"""Peak-normalized Gaussian reward kernel.

A reward term is a bell curve rescaled so that its maximum is exactly the
configured weight: the normal density is divided by its own peak value, the
normalization constant cancels, and only the exponential shape survives.
One (weight, mean, sigma) triple therefore spans near-constant plateaus
(huge sigma), ordinary bells, and impulse-like spikes (tiny sigma).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["GaussianTerm", "normal_pdf", "gaussian_reward"]

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True, slots=True)
class GaussianTerm:
    """One (weight, mean, sigma) reward term.

    sigma must be strictly positive (an exact impulse is not representable);
    weight is any finite real, with the sign applied by the caller at
    aggregation time.
    """

    weight: float
    mean: float
    sigma: float

    def __post_init__(self) -> None:
        for name in ("weight", "mean", "sigma"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"GaussianTerm.{name} must be finite, got {value!r}")
        if self.sigma <= 0.0:
            raise ValueError(f"GaussianTerm.sigma must be > 0, got {self.sigma!r}")


def normal_pdf(x: float, mean: float, sigma: float) -> float:
    """Normal probability density at ``x`` with the conventional prefactor.

    Raises ValueError for non-finite arguments or sigma <= 0.
    """
    if not (math.isfinite(x) and math.isfinite(mean) and math.isfinite(sigma)):
        raise ValueError("normal_pdf requires finite arguments")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma!r}")
    z = (x - mean) / sigma
    return math.exp(-0.5 * z * z) / (sigma * _SQRT_TWO_PI)


def gaussian_reward(term: GaussianTerm, x: float) -> float:
    """Evaluate the peak-normalized Gaussian term at ``x``.

    Defined as ``weight * N(x; mean, sigma) / max_x' N(x'; mean, sigma)``.
    The density is maximized at x = mean, so any positive prefactor cancels
    and the closed form is ``weight * exp(-(x - mean)^2 / (2 sigma^2))``.
    The peak value is exactly ``weight``; for positive weights the result
    lies in (0, weight].
    """
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    z = (x - term.mean) / term.sigma
    return term.weight * math.exp(-0.5 * z * z)
