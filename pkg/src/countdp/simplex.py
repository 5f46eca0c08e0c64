"""Dense tableau simplex with Bland's rule.

Small, deterministic and dependency-free beyond numpy: the programs solved
here have at most a few thousand columns. Artificial variables carry a
symbolic big-M cost. The tableau keeps the M-part and the ordinary part of
the objective in two separate rows and prices lexicographically, which is
the same as letting M go to infinity. After the last pivot the basic
solution is recomputed from the original data with a direct solve, so the
reported assignment does not carry accumulated pivoting error.
"""

from __future__ import annotations

import dataclasses
import enum
from typing import Sequence

import numpy as np

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    from fractions import Fraction as _Q

PIVOT_TOL = 1e-10
FEASIBILITY_TOL = 1e-9
REFACTOR_EVERY = 20


class Relation(enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Status(enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclasses.dataclass
class LinearProgram:
    """``minimize objective @ x`` subject to row constraints and ``x >= 0``."""

    objective: np.ndarray
    rows: list[np.ndarray] = dataclasses.field(default_factory=list)
    relations: list[Relation] = dataclasses.field(default_factory=list)
    rhs: list[float] = dataclasses.field(default_factory=list)
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.names is None:
            self.names = tuple(f"x{i}" for i in range(self.variable_count))
        elif len(self.names) != self.variable_count:
            raise ValueError("one name per variable")

    @property
    def variable_count(self) -> int:
        return self.objective.size

    def add(self, coeffs: Sequence[float], relation: Relation | str, bound: float) -> None:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.variable_count,):
            raise ValueError(f"constraint has {coeffs.size} coefficients, expected {self.variable_count}")
        self.rows.append(coeffs)
        self.relations.append(Relation(relation))
        self.rhs.append(float(bound))

    def add_equality(self, coeffs: Sequence[float], bound: float) -> None:
        """Add ``coeffs @ x = bound`` as the pair ``<= bound`` and ``>= bound``."""
        self.add(coeffs, Relation.LE, bound)
        self.add(coeffs, Relation.GE, bound)

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint or sign violation at ``x`` (0 when feasible)."""
        worst = float(max(0.0, -np.min(x))) if x.size else 0.0
        for a, rel, b in zip(self.rows, self.relations, self.rhs):
            lhs = float(a @ x)
            if rel is Relation.LE:
                worst = max(worst, lhs - b)
            elif rel is Relation.GE:
                worst = max(worst, b - lhs)
            else:
                worst = max(worst, abs(lhs - b))
        return worst

    def to_text(self) -> str:
        """Plain-text dump for debugging."""
        width = max(len(n) for n in self.names)
        header = " ".join(f"{n:>{max(width, 10)}}" for n in self.names)
        lines = ["min " + header]
        fmt = lambda v: " ".join(f"{x:>{max(width, 10)}.4g}" for x in v)  # noqa: E731
        lines.append("    " + fmt(self.objective))
        for a, rel, b in zip(self.rows, self.relations, self.rhs):
            lines.append("    " + fmt(a) + f" {rel.value:>2} {b:.10g}")
        return "\n".join(lines)


@dataclasses.dataclass(frozen=True)
class LpSolution:
    status: Status
    optimum: float
    assignment: np.ndarray
    iterations: int
    names: tuple[str, ...] = ()

    def value(self, name: str) -> float:
        return float(self.assignment[self.names.index(name)])

    def to_json_dict(self) -> dict:
        return {
            "status": self.status.value,
            "optimum": self.optimum,
            "assignment": dict(zip(self.names, map(float, self.assignment))),
            "iterations": self.iterations,
        }


class _Tableau:
    """Rows ``0..m-1`` are constraints; the last two rows are the M-cost and ordinary cost.

    With ``exact=True`` entries are rationals and every comparison is exact.
    """

    def __init__(self, A, b, cost, art_cols, basis, exact=False):
        m, ncols = A.shape
        self.m = m
        self.tol = 0 if exact else PIVOT_TOL
        self.T = np.zeros((m + 2, ncols + 1))
        if exact:
            self.T = np.array([[_rational(0.0)] * (ncols + 1) for _ in range(m + 2)], dtype=object)
            A = np.vectorize(_rational, otypes=[object])(A)
            b = np.vectorize(_rational, otypes=[object])(b)
            cost = np.vectorize(_rational, otypes=[object])(cost)
        self.T[:m, :ncols] = A
        self.T[:m, -1] = b
        self.T[m + 1, :ncols] = cost
        self.T[m, art_cols] = 1
        self.basis = list(basis)
        self.allowed = np.ones(ncols, dtype=bool)
        # price out basic columns
        for i, j in enumerate(self.basis):
            for r in (m, m + 1):
                if self.T[r, j] != 0:
                    self.T[r] = self.T[r] - self.T[r, j] * self.T[i]

    def refactor(self, A, b, cost, art_cols) -> bool:
        """Rebuild the float tableau from the original data and the current basis.

        Discards the rounding error accumulated by successive pivots. Returns
        False if the basis matrix is numerically singular.
        """
        m = self.m
        Bm = A[:, self.basis]
        try:
            X = np.linalg.solve(Bm, np.column_stack([A, b]))
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(X)):
            return False
        mcost = np.zeros(A.shape[1])
        mcost[art_cols] = 1.0
        T = np.zeros_like(self.T)
        T[:m] = X
        for r, c in ((m, mcost), (m + 1, cost)):
            cb = c[self.basis]
            T[r, :-1] = c - cb @ X[:, :-1]
            T[r, -1] = -(cb @ X[:, -1])
        T[:m, -1] = np.maximum(T[:m, -1], 0.0)
        T[m:, self.basis] = 0.0
        self.T = T
        return True

    def entering(self) -> int | None:
        # Bland: lowest-index column that improves the lexicographic (M, cost) objective
        mrow, crow = self.T[self.m, :-1], self.T[self.m + 1, :-1]
        tol = self.tol
        for j in range(mrow.size):
            if not self.allowed[j]:
                continue
            if mrow[j] < -tol or (abs(mrow[j]) <= tol and crow[j] < -tol):
                return j
        return None

    def leaving(self, j: int) -> int | None:
        col = self.T[: self.m, j]
        rhs = self.T[: self.m, -1]
        best, best_ratio = None, None
        slack = 0 if self.tol == 0 else 1e-15
        for i in range(self.m):
            if col[i] > self.tol:
                ratio = max(rhs[i], 0) / col[i]
                if best is None or ratio < best_ratio - slack or (
                    abs(ratio - best_ratio) <= slack and self.basis[i] < self.basis[best]
                ):
                    best, best_ratio = i, ratio
        return best

    def pivot(self, i: int, j: int) -> None:
        T = self.T
        T[i] = T[i] / T[i, j]
        col = T[:, j].copy()
        col[i] = 0
        if T.dtype == object:
            for r in np.flatnonzero(col != 0):
                T[r] = T[r] - col[r] * T[i]
        else:
            T -= np.outer(col, T[i])
        T[:, j] = 0
        T[i, j] = 1
        self.basis[i] = j


def _standard_form(lp: LinearProgram):
    """Slack/surplus/artificial expansion with non-negative right-hand sides."""
    n = lp.variable_count
    m = len(lp.rows)
    A0 = np.array(lp.rows, dtype=float).reshape(m, n)
    b0 = np.array(lp.rhs, dtype=float)
    rels = list(lp.relations)
    sign = np.where(b0 < 0, -1.0, 1.0)
    A0 = A0 * sign[:, None]
    b0 = b0 * sign
    flip = {Relation.LE: Relation.GE, Relation.GE: Relation.LE, Relation.EQ: Relation.EQ}
    rels = [flip[r] if s < 0 else r for r, s in zip(rels, sign)]

    n_slack = sum(r is not Relation.EQ for r in rels)
    n_art = sum(r is not Relation.LE for r in rels)
    A = np.zeros((m, n + n_slack + n_art))
    A[:, :n] = A0
    basis = []
    s = n
    a = n + n_slack
    art_cols = []
    for i, r in enumerate(rels):
        if r is Relation.LE:
            A[i, s] = 1.0
            basis.append(s)
            s += 1
        else:
            if r is Relation.GE:
                A[i, s] = -1.0
                s += 1
            A[i, a] = 1.0
            basis.append(a)
            art_cols.append(a)
            a += 1
    cost = np.zeros(A.shape[1])
    cost[:n] = lp.objective
    return A, b0, cost, art_cols, basis


def _rational(v: float):
    return _Q(v)


def solve_simplex(lp: LinearProgram, max_iterations: int | None = None, *, exact: bool = False) -> LpSolution:
    """Solve ``lp``; infeasibility and unboundedness are reported in ``status``.

    Args:
      lp: the program.
      max_iterations: pivot limit; defaults to ``50 * (rows + columns)``.
      exact: pivot in rational arithmetic on the exact binary values of the
        float data. Slower, but pricing no longer depends on a tolerance,
        which matters when the optimum is far below ``PIVOT_TOL``.
    """
    n = lp.variable_count
    if not lp.rows:
        if np.any(lp.objective < 0):
            return LpSolution(Status.UNBOUNDED, -np.inf, np.zeros(n), 0, lp.names)
        return LpSolution(Status.OPTIMAL, 0.0, np.zeros(n), 0, lp.names)
    A, b, cost, art_cols, basis = _standard_form(lp)
    tab = _Tableau(A, b, cost, art_cols, basis, exact=exact)
    if max_iterations is None:
        max_iterations = 50 * (A.shape[0] + A.shape[1])

    iterations = 0
    refactored_at = 0
    while True:
        j = tab.entering()
        if j is None and not exact and refactored_at != iterations:
            # confirm optimality on a freshly factored tableau
            refactored_at = iterations
            if tab.refactor(A, b, cost, art_cols):
                j = tab.entering()
        if j is None:
            break
        i = tab.leaving(j)
        if i is None:
            if abs(tab.T[tab.m, j]) > tab.tol:
                # cannot happen: the M-objective is bounded below by zero
                raise RuntimeError("unbounded artificial objective")
            return LpSolution(Status.UNBOUNDED, -np.inf, np.full(n, np.nan), iterations, lp.names)
        tab.pivot(i, j)
        iterations += 1
        if iterations > max_iterations:
            raise RuntimeError(f"simplex exceeded {max_iterations} iterations")
        if not exact and iterations % REFACTOR_EVERY == 0:
            tab.refactor(A, b, cost, art_cols)
            refactored_at = iterations
        art_basic = [bj for bj in tab.basis if bj in art_cols]
        if not art_basic or -tab.T[tab.m, -1] <= (0 if exact else FEASIBILITY_TOL):
            # feasible: artificials may never re-enter
            tab.allowed[art_cols] = False

    if exact:
        x_full = np.zeros(A.shape[1])
        x_full[tab.basis] = [float(v) for v in tab.T[: tab.m, -1]]
    else:
        x_full = _refine(A, b, tab)
    infeasibility = float(sum(x_full[c] for c in art_cols))
    x = x_full[:n]
    if infeasibility > FEASIBILITY_TOL or lp.violation(x) > FEASIBILITY_TOL:
        return LpSolution(Status.INFEASIBLE, np.nan, x, iterations, lp.names)
    return LpSolution(Status.OPTIMAL, float(lp.objective @ x), x, iterations, lp.names)


def _refine(A: np.ndarray, b: np.ndarray, tab: _Tableau) -> np.ndarray:
    """Basic solution recomputed from the original rows; falls back to the tableau values."""
    x = np.zeros(A.shape[1])
    basis = tab.basis
    x[basis] = tab.T[: tab.m, -1]
    try:
        xb = np.linalg.solve(A[:, basis], b)
    except np.linalg.LinAlgError:
        return np.maximum(x, 0.0)
    if np.all(np.isfinite(xb)) and np.max(np.abs(xb - x[basis])) < 1e-6:
        x[basis] = xb
    return np.maximum(x, 0.0)
