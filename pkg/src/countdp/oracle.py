"""Independent checks of the closed-form design.

Two linear programs are built here and handed to :mod:`countdp.simplex`:

* the restricted program over ``(delta, alpha_1..alpha_D)`` for the
  symmetric, count-independent noise;
* the general program over ``delta`` and every mixture weight
  ``alpha[i1, i2, n]`` of the elementary pmfs, one simplex per count.

The audit functions compute the exact singleton-event and all-event
``delta`` of any mechanism matrix directly from its columns.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np

from countdp.noise_family import (
    MechanismConfig,
    MechanismMatrix,
    NoisePmf,
    elementary_indices,
    make_elementary_pmf,
    mix_pmfs,
)
from countdp.simplex import LinearProgram, LpSolution, Relation, solve_simplex

DEFAULT_VARIABLE_BUDGET = 2000


class OracleBudgetError(ValueError):
    """The general program has more variables than the oracle accepts."""


def restricted_program(config: MechanismConfig) -> LinearProgram:
    D, E = config.D, config.E
    h = 0.5 * config.eta_bar
    names = ("delta",) + tuple(f"alpha_{i}" for i in range(1, D + 1))
    lp = LinearProgram(objective=np.eye(D + 1)[0], names=names)

    def row():
        return np.zeros(D + 1)

    # p(n - D | n) <= E * 0 + delta
    r = row()
    r[D] = h
    r[0] = -1.0
    lp.add(r, Relation.LE, 0.0)
    # p(n - i | n) <= E p(n - i | n + 1) + delta
    for i in range(1, D):
        r = row()
        r[i] = h
        r[i + 1] = -E * h
        r[0] = -1.0
        lp.add(r, Relation.LE, 0.0)
    # eta <= E p(n | n + 1) + delta
    r = row()
    r[1] = -E * h
    r[0] = -1.0
    lp.add(r, Relation.LE, -config.eta)
    s = row()
    s[1:] = 1.0
    lp.add_equality(s, 1.0)
    return lp


def solve_restricted_lp(config: MechanismConfig, *, exact: bool = True) -> LpSolution:
    """Minimal ``delta`` over symmetric count-independent noise, by simplex.

    Pivoting is exact by default: for large ``epsilon * D`` the optimum drops
    below 1e-15 and float pricing can no longer tell vertices apart.
    """
    return solve_simplex(restricted_program(config), exact=exact)


@dataclasses.dataclass(frozen=True)
class GeneralProgram:
    lp: LinearProgram
    config: MechanismConfig
    N: int
    counts: tuple[int, ...]
    # (n, i1, i2) for each alpha column, in column order (column 0 is delta)
    columns: tuple[tuple[int, int, int], ...]


def general_program(
    N: int,
    config: MechanismConfig,
    *,
    n_min: int = 1,
    budget: int = DEFAULT_VARIABLE_BUDGET,
) -> GeneralProgram:
    """Build the data-dependent program over counts ``n_min..N``.

    Rows where both sides vanish identically are dropped; they read
    ``0 <= delta`` and cannot move the optimum.
    """
    if N < 1 or not 1 <= n_min <= N:
        raise ValueError("need 1 <= n_min <= N")
    D, E, eta = config.D, config.E, config.eta
    counts = tuple(range(n_min, N + 1))
    columns = tuple((n, i1, i2) for n in counts for i1, i2 in elementary_indices(n, D))
    nvar = 1 + len(columns)
    if nvar > budget:
        raise OracleBudgetError(f"{nvar} variables exceed the oracle budget of {budget}")

    names = ("delta",) + tuple(f"alpha[{i1},{i2},{n}]" for n, i1, i2 in columns)
    lp = LinearProgram(objective=np.eye(nvar)[0], names=names)
    ny = N + D + 1
    # response[y, col]: p_Y(y | n) contributed by that column's elementary pmf
    response = np.zeros((ny, nvar))
    for c, (n, i1, i2) in enumerate(columns, start=1):
        pmf = make_elementary_pmf(n, i1, i2, eta, D)
        for z, p in zip(pmf.offsets, pmf.probs):
            if p != 0.0:
                response[n + z, c] = p
    owner = np.array([-1] + [n for n, _, _ in columns])

    for n in counts:
        mine = owner == n
        for other in (n + 1, n - 1):
            if other not in counts:
                continue
            theirs = owner == other
            for y in range(ny):
                r = np.zeros(nvar)
                r[mine] = response[y, mine]
                if not r.any():
                    continue
                r[theirs] = -E * response[y, theirs]
                r[0] = -1.0
                lp.add(r, Relation.LE, 0.0)
    for n in counts:
        lp.add_equality((owner == n).astype(float), 1.0)
    return GeneralProgram(lp=lp, config=config, N=N, counts=counts, columns=columns)


def solve_general_lp(
    N: int,
    config: MechanismConfig,
    *,
    n_min: int = 1,
    budget: int = DEFAULT_VARIABLE_BUDGET,
    exact: bool = False,
) -> LpSolution:
    """Minimal ``delta`` over all data-dependent mixtures of elementary pmfs, by simplex."""
    return solve_simplex(general_program(N, config, n_min=n_min, budget=budget).lp, exact=exact)


def induced_pmfs(program: GeneralProgram, solution: LpSolution) -> dict[int, NoisePmf]:
    """Per-count noise pmfs implied by a solution of :func:`general_program`."""
    cfg = program.config
    out = {}
    for n in program.counts:
        weights, parts = [], []
        for c, (m, i1, i2) in enumerate(program.columns, start=1):
            if m == n:
                weights.append(solution.assignment[c])
                parts.append(make_elementary_pmf(n, i1, i2, cfg.eta, cfg.D))
        w = np.clip(np.asarray(weights), 0.0, None)
        out[n] = mix_pmfs(w / w.sum(), parts)
    return out


@dataclasses.dataclass(frozen=True)
class DeltaAudit:
    """Exact ``delta`` of a mechanism matrix at one ``epsilon``.

    ``worst_singleton`` is ``(n, neighbour, y)`` attaining ``singular_delta``.
    ``event_bound`` is ``min(1, s * singular_delta)`` where ``s`` is the
    largest column support; for the symmetric design ``s = 2D + 1``.
    """

    epsilon: float
    singular_delta: float
    event_delta: float
    worst_singleton: tuple[int, int, int]
    event_bound: float
    support_size: int

    def to_json_dict(self) -> dict:
        return dataclasses.asdict(self)


def _gaps(matrix: MechanismMatrix, epsilon: float):
    E = math.exp(epsilon)
    P = matrix.probs
    for j in range(P.shape[1] - 1):
        yield j, j + 1, P[:, j] - E * P[:, j + 1]
        yield j + 1, j, P[:, j + 1] - E * P[:, j]


def singular_delta(matrix: MechanismMatrix, epsilon: float) -> float:
    """``max_y [p(y|n) - e^eps p(y|n')]`` over neighbouring counts, floored at 0."""
    return audit(matrix, epsilon).singular_delta


def event_delta(matrix: MechanismMatrix, epsilon: float) -> float:
    """Worst event: ``max`` over neighbours of the sum of positive gaps."""
    return audit(matrix, epsilon).event_delta


def audit(matrix: MechanismMatrix, epsilon: float) -> DeltaAudit:
    if len(matrix.counts) < 2:
        raise ValueError("need at least two neighbouring counts")
    best = 0.0
    witness = (matrix.counts[0], matrix.counts[1], int(matrix.y_lo))
    event = 0.0
    for a, b, gap in _gaps(matrix, epsilon):
        y = int(np.argmax(gap))
        if gap[y] > best:
            best = float(gap[y])
            witness = (matrix.counts[a], matrix.counts[b], int(matrix.outputs[y]))
        event = max(event, math.fsum(gap[gap > 0]))
    support = int(np.max(np.count_nonzero(matrix.probs > 0, axis=0)))
    return DeltaAudit(
        epsilon=float(epsilon),
        singular_delta=best,
        event_delta=float(event),
        worst_singleton=witness,
        event_bound=min(1.0, support * best),
        support_size=support,
    )


def smallest_epsilon(
    delta_of: Callable[[float], float] | MechanismMatrix,
    target: float,
    lo: float = 0.0,
    hi: float = 20.0,
    iterations: int = 60,
) -> float:
    """Smallest ``epsilon`` in ``[lo, hi]`` with ``delta(epsilon) <= target``, by bisection.

    ``delta_of`` is either a non-increasing function of ``epsilon`` or a
    mechanism matrix, in which case its singular ``delta`` is used. Returns
    ``hi`` if even ``hi`` misses the target.
    """
    if isinstance(delta_of, MechanismMatrix):
        matrix = delta_of
        delta_of = lambda eps: singular_delta(matrix, eps)  # noqa: E731
    if delta_of(lo) <= target:
        return lo
    if delta_of(hi) > target:
        return hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if delta_of(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi
