"""Discrete Gaussian baseline at matched variance.

The comparison pipeline: solve the optimal bounded-support design for
``(eta, D, epsilon)``, take its variance ``sigma2``, and build a discrete
Gaussian with that ``sigma2`` as its scale parameter. Its exact
``(epsilon, delta)`` curve is then

    delta_G = P[Z > eps * sigma2 - 1/2] - e^eps * P[Z > eps * sigma2 + 1/2].
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from typing import Iterable, Sequence

import numpy as np

from countdp.noise_family import MechanismConfig, MechanismMatrix, offset_matrix
from countdp.optimal import optimal_alphas

CSV_HEADER = ("epsilon", "our_dp_delta", "gaussian_delta", "sigma2", "regime")


@dataclasses.dataclass(frozen=True, eq=False)
class DiscreteGaussianPmf:
    """Mass proportional to ``exp(-z^2 / (2 sigma2))`` on ``[-truncation : truncation]``."""

    sigma2: float
    truncation: int
    probs: np.ndarray

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.truncation, self.truncation + 1)

    def __getitem__(self, z: int) -> float:
        if abs(z) > self.truncation:
            return 0.0
        return float(self.probs[z + self.truncation])

    def variance(self) -> float:
        """Realized variance of the (zero-mean) discrete pmf; below ``sigma2`` for small ``sigma2``."""
        z = self.offsets.astype(float)
        return math.fsum(z * z * self.probs)

    def tail_mass_outside(self, D: int) -> float:
        """``P[|Z| > D]``: what a plot restricted to ``[-D : D]`` leaves out."""
        if D >= self.truncation:
            return 0.0
        tail = self.probs[self.truncation + D + 1 :]
        return 2.0 * math.fsum(tail[::-1])

    def upper_tail(self, t: float) -> float:
        """``P[Z > t]`` summed from the far tail inward."""
        start = max(math.floor(t) + 1, -self.truncation)
        if start > self.truncation:
            return 0.0
        return math.fsum(self.probs[start + self.truncation :][::-1])

    def matrix(self, counts: Iterable[int]) -> MechanismMatrix:
        return offset_matrix(self.offsets, self.probs, counts)


def truncation_for(sigma2: float) -> int:
    # neglected tail < exp(-72) relative to the mode
    return math.ceil(12.0 * math.sqrt(sigma2)) + 2


def discrete_gaussian_pmf(sigma2: float, truncation: int | None = None) -> DiscreteGaussianPmf:
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    K = truncation_for(sigma2) if truncation is None else int(truncation)
    k = np.arange(K + 1, dtype=float)
    half = np.exp(-(k * k) / (2.0 * sigma2))
    norm = half[0] + 2.0 * math.fsum(half[1:][::-1])
    half = half / norm
    probs = np.concatenate([half[:0:-1], half])
    probs.setflags(write=False)
    return DiscreteGaussianPmf(sigma2=float(sigma2), truncation=K, probs=probs)


def gaussian_delta(epsilon_g: float, sigma2: float, pmf: DiscreteGaussianPmf | None = None) -> float:
    """Exact ``delta`` of the discrete Gaussian mechanism (sensitivity 1) at ``epsilon_g``."""
    if pmf is None:
        pmf = discrete_gaussian_pmf(sigma2)
    shift = epsilon_g * sigma2
    d = pmf.upper_tail(shift - 0.5) - math.exp(epsilon_g) * pmf.upper_tail(shift + 0.5)
    return max(d, 0.0)


@dataclasses.dataclass(frozen=True)
class ComparisonRow:
    epsilon: float
    our_dp_delta: float
    gaussian_delta: float
    sigma2: float
    regime: int
    gaussian_realized_variance: float = math.nan

    def csv_fields(self) -> tuple:
        return (self.epsilon, self.our_dp_delta, self.gaussian_delta, self.sigma2, self.regime)


def compare_mechanisms(eta: float, D: int, epsilon_grid: Sequence[float]) -> list[ComparisonRow]:
    """Our ``(2D+1) delta*`` against the matched-variance discrete Gaussian's ``delta_G``, per ``epsilon``."""
    if len(epsilon_grid) == 0:
        raise ValueError("epsilon grid is empty")
    rows = []
    for eps in epsilon_grid:
        sol = optimal_alphas(MechanismConfig(eta=eta, D=D, epsilon=float(eps)))
        pmf = discrete_gaussian_pmf(sol.variance)
        rows.append(
            ComparisonRow(
                epsilon=float(eps),
                our_dp_delta=sol.dp_delta,
                gaussian_delta=gaussian_delta(float(eps), sol.variance, pmf),
                sigma2=sol.variance,
                regime=sol.regime,
                gaussian_realized_variance=pmf.variance(),
            )
        )
    return rows


def rows_to_csv(rows: Sequence[ComparisonRow], fmt=lambda v: f"{v:.10g}") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in r.csv_fields()])
    return buf.getvalue()
