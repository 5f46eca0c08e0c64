"""Closed-form optimal design for the data-independent mechanism (counts ``n >= D``).

For counts at least ``D`` the noise can be taken symmetric and independent
of ``n``: mass ``eta`` at zero and ``alpha_i * (1 - eta) / 2`` at each of
``+-i``. Minimising the singleton-event ``delta`` over the simplex of
``alpha`` has an explicit answer. Each candidate lower bound ``delta_k`` is
one of ``D`` "chain" bounds (``k <= D``) or the single "simplex" bound
(``k = D + 1``). The largest is attained, and which one wins is decided by
where ``C = 2 eta / (1 - eta)`` falls among the strictly decreasing
crossover values ``C_1 > C_2 > ... > C_D``.

All geometric sums are evaluated after dividing through by the largest
power of ``E = exp(epsilon)``, so every term lies in ``(0, 1]`` and nothing
overflows for large ``epsilon * D``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Sequence

import numpy as np

from countdp.noise_family import MechanismConfig, NoisePmf, symmetric_pmf

NEGATIVE_CLAMP = 1e-12


def _inv_powers(E: float, k: int) -> np.ndarray:
    """``E**0, E**-1, ..., E**-(k-1)`` by forward recurrence."""
    out = np.empty(k)
    v = 1.0
    inv = 1.0 / E
    for m in range(k):
        out[m] = v
        v *= inv
    return out


def _scaled_sums(E: float, k: int) -> tuple[float, float]:
    """Return ``(S, W)`` with ``S = sum_j E**j / E**(k-1)`` and ``W = sum_j E**j (k-j) / E**(k-1)``, ``j < k``.

    With ``m = k - 1 - j``: ``S = sum_m E**-m`` and ``W = sum_m (m + 1) E**-m``.
    """
    p = _inv_powers(E, k)
    # summed smallest-first
    S = math.fsum(p[::-1])
    W = math.fsum((np.arange(1, k + 1) * p)[::-1])
    return S, W


def type1_bound(k: int, E: float, B: float, C: float) -> float:
    """Chain lower bound ``delta_k``.

    ``(C sum_{j<k} E^j - E^k) / (B sum_{j<k} (j+1) E^j)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p = _inv_powers(E, k)
    # numerator and denominator both divided by E**(k-1)
    s = math.fsum(p[::-1])
    # sum_j (j+1) E^j / E^(k-1) = sum_m (k - m) E^-m
    w = math.fsum((np.arange(k, 0, -1) * p)[::-1])
    return (C * s - E) / (B * w)


def type2_bound(D: int, E: float, B: float) -> float:
    """Simplex lower bound ``delta_{D+1} = 1 / (B sum_{j<D} (D-j) E^j)``."""
    _, W = _scaled_sums(E, D)
    # E**-(D-1) underflows gracefully to 0 for huge epsilon
    return _inv_powers(E, D)[-1] / (B * W)


def crossover(k: int, E: float) -> float:
    """Crossover ``C_k = sum_{j<=k} E^j / sum_{j<k} (k-j) E^j``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    S, W = _scaled_sums(E, k)
    return (E + S) / W


@dataclasses.dataclass(frozen=True)
class BoundSet:
    """Every candidate lower bound for one configuration.

    ``bounds[k-1]`` is ``delta_k`` for ``k`` in ``1..D+1``; ``crossovers[k]``
    is ``C_k`` for ``k`` in ``0..D+1`` including the sentinels
    ``C_0 = inf`` and ``C_{D+1} = 0``.
    """

    E: float
    B: float
    C: float
    type1: tuple[float, ...]
    type2: float
    crossovers: tuple[float, ...]

    @property
    def bounds(self) -> tuple[float, ...]:
        return self.type1 + (self.type2,)

    @property
    def D(self) -> int:
        return len(self.type1)


def bound_set(config: MechanismConfig) -> BoundSet:
    E, B, C, D = config.E, config.B, config.C, config.D
    type1 = tuple(type1_bound(k, E, B, C) for k in range(1, D + 1))
    crossovers = (math.inf,) + tuple(crossover(k, E) for k in range(1, D + 1)) + (0.0,)
    return BoundSet(E=E, B=B, C=C, type1=type1, type2=type2_bound(D, E, B), crossovers=crossovers)


def select_regime(C: float, E: float, D: int) -> int:
    """Index ``k`` in ``1..D+1`` with ``C_k < C <= C_{k-1}``.

    Crossovers strictly decrease, so this is the number of crossovers
    ``C_1..C_D`` that are at least ``C``, plus one.
    """
    k = 1
    while k <= D and crossover(k, E) >= C:
        k += 1
    return k


@dataclasses.dataclass(frozen=True)
class OptimalSolution:
    config: MechanismConfig
    regime: int
    delta_star: float
    alphas: tuple[float, ...]
    variance: float
    dp_delta: float

    def noise_pmf(self) -> NoisePmf:
        return symmetric_pmf(self.alphas, self.config.eta)

    def noise_masses(self) -> np.ndarray:
        """``p_Z(i)`` for ``i = 1..D`` (the pmf is symmetric)."""
        return 0.5 * self.config.eta_bar * np.asarray(self.alphas)

    def in_range_probability(self, window: int) -> float:
        """``Pr[|Z| <= window]``."""
        return self.config.eta + self.config.eta_bar * math.fsum(self.alphas[:window])

    def to_json_dict(self) -> dict:
        c = self.config
        return {
            "eta": c.eta,
            "D": c.D,
            "epsilon": c.epsilon,
            "regime": self.regime,
            "delta_star": self.delta_star,
            "dp_delta": self.dp_delta,
            "alphas": list(self.alphas),
            "variance": self.variance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _alphas_simplex_regime(E: float, D: int) -> np.ndarray:
    # alpha_j = sum_{l<=D-j} E^l / sum_{l<D} (D-l) E^l; dividing by E^(D-1) turns the
    # numerator into E^-(j-1) * sum_{m<=D-j} E^-m
    _, W = _scaled_sums(E, D)
    p = _inv_powers(E, D)
    return np.array([p[j - 1] * math.fsum(p[: D - j + 1][::-1]) / W for j in range(1, D + 1)])


def _alphas_chain_regime(E: float, B: float, C: float, D: int, k: int, delta: float) -> np.ndarray:
    alphas = np.zeros(D)
    a = (C - B * delta) / E
    alphas[0] = a
    for j in range(2, k + 1):
        a = (a - B * delta) / E
        alphas[j - 1] = a
    small = (alphas < 0) & (alphas > -NEGATIVE_CLAMP)
    alphas[small] = 0.0
    return alphas


def optimal_alphas(config: MechanismConfig) -> OptimalSolution:
    """Optimal symmetric noise for ``config`` together with its ``delta``, variance and DP conversion."""
    E, B, C, D = config.E, config.B, config.C, config.D
    k = select_regime(C, E, D)
    if k == D + 1:
        delta = type2_bound(D, E, B)
        alphas = _alphas_simplex_regime(E, D)
    else:
        delta = type1_bound(k, E, B, C)
        alphas = _alphas_chain_regime(E, B, C, D, k, delta)
    alphas_t = tuple(float(a) for a in alphas)
    variance = _variance(config.eta_bar, alphas_t)
    return OptimalSolution(
        config=config,
        regime=k,
        delta_star=float(delta),
        alphas=alphas_t,
        variance=variance,
        dp_delta=min(1.0, (2 * D + 1) * float(delta)),
    )


def solve(eta: float, D: int, epsilon: float) -> OptimalSolution:
    return optimal_alphas(MechanismConfig(eta=eta, D=D, epsilon=epsilon))


def dp_parameters(solution: OptimalSolution) -> tuple[float, float]:
    """``(epsilon, min(1, (2D + 1) delta))``: the all-events guarantee."""
    return solution.config.epsilon, min(1.0, (2 * solution.config.D + 1) * solution.delta_star)


def _variance(eta_bar: float, alphas: Sequence[float]) -> float:
    return eta_bar * math.fsum(a * i * i for i, a in enumerate(alphas, start=1))


def noise_variance(solution: OptimalSolution) -> float:
    """``(1 - eta) * sum_i alpha_i i^2``."""
    return _variance(solution.config.eta_bar, solution.alphas)


def constraint_residuals(solution: OptimalSolution) -> np.ndarray:
    """Slack-signed residuals ``lhs - rhs`` of the ``D + 1`` chain inequalities at ``delta_star``.

    Order: the tail constraint on ``alpha_D``, the links ``i = 1..D-1``, then the
    constraint on the mass at zero. Feasibility means every entry is ``<= 0``.
    """
    c = solution.config
    h = 0.5 * c.eta_bar
    a = np.asarray(solution.alphas)
    d = solution.delta_star
    tail = h * a[-1] - d
    links = h * a[:-1] - (c.E * h * a[1:] + d)
    zero = c.eta - (c.E * h * a[0] + d)
    return np.concatenate([[tail], links, [zero]])
