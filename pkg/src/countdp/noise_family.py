"""Integer noise distributions for count queries.

A count ``n >= 1`` is released as ``Y = n + Z`` where the noise ``Z`` obeys
three properties:

* P1: ``Z`` is supported on ``[-A : D]`` with ``A = min(n, D)``, so the
  release is never negative;
* P2: ``Pr[Z = 0] = eta``, independent of ``n``;
* P3: ``E[Z] = 0``.

Every such distribution is a mixture of three-point "elementary" pmfs,
built here by :func:`make_elementary_pmf` and combined by :func:`mix_pmfs`.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

TOL = 1e-12


class InvalidElementaryIndex(ValueError):
    """Raised when ``(i1, i2)`` does not index an elementary pmf."""


@dataclasses.dataclass(frozen=True)
class MechanismConfig:
    """One mechanism design problem.

    Attributes:
      eta: probability of releasing the true count, in the open interval (0, 1).
      D: half-width of the noise support.
      epsilon: privacy parameter, non-negative.
      N: largest possible true count. Only needed for data-dependent designs.
    """

    eta: float
    D: int
    epsilon: float
    N: int | None = None

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if int(self.D) != self.D or self.D < 1:
            raise ValueError(f"D must be a positive integer, got {self.D}")
        if not (self.epsilon >= 0.0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if self.N is not None and (int(self.N) != self.N or self.N < 1):
            raise ValueError(f"N must be a positive integer, got {self.N}")

    @functools.cached_property
    def _eta_q(self) -> Fraction:
        # the decimal the caller typed, so eta = 0.8 gives C = 8 exactly
        return Fraction(repr(float(self.eta)))

    @functools.cached_property
    def eta_bar(self) -> float:
        return float(1 - self._eta_q)

    @property
    def E(self) -> float:
        return math.exp(self.epsilon) if self.epsilon < 709.0 else math.inf

    @functools.cached_property
    def B(self) -> float:
        return float(2 / (1 - self._eta_q))

    @functools.cached_property
    def C(self) -> float:
        return float(2 * self._eta_q / (1 - self._eta_q))


@dataclasses.dataclass(frozen=True, eq=False)
class NoisePmf:
    """A finite pmf over integer offsets ``z``, tailored to true count ``n``.

    Masses are stored densely over ``[lo : lo + len(probs) - 1]``. Well-formed
    pmfs have ``lo = -min(n, D)`` and ``hi = D``; malformed ones can still be
    represented so that :func:`validate_properties` can report what is wrong.
    """

    n: int
    eta: float
    D: int
    lo: int
    probs: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("true counts must be >= 1 (zero bias is impossible at n = 0)")
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1-d array")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_mapping(cls, n: int, eta: float, D: int, mass: Mapping[int, float]) -> "NoisePmf":
        lo = min(min(mass), -min(n, D))
        hi = max(max(mass), D)
        probs = np.zeros(hi - lo + 1)
        for z, p in mass.items():
            probs[z - lo] += p
        return cls(n=n, eta=eta, D=D, lo=lo, probs=probs)

    @property
    def A(self) -> int:
        return min(self.n, self.D)

    @property
    def hi(self) -> int:
        return self.lo + self.probs.size - 1

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __getitem__(self, z: int) -> float:
        if self.lo <= z <= self.hi:
            return float(self.probs[z - self.lo])
        return 0.0

    def as_dict(self, *, nonzero: bool = False) -> dict[int, float]:
        return {
            int(z): float(p)
            for z, p in zip(self.offsets, self.probs)
            if not nonzero or p != 0.0
        }

    def mean(self) -> float:
        return float(self.offsets @ self.probs)

    def second_moment(self) -> float:
        return float((self.offsets.astype(float) ** 2) @ self.probs)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "eta": self.eta,
            "D": self.D,
            "mass": [[int(z), float(p)] for z, p in zip(self.offsets, self.probs)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "NoisePmf":
        obj = json.loads(text)
        return cls.from_mapping(obj["n"], obj["eta"], obj["D"], {int(z): p for z, p in obj["mass"]})

    def __eq__(self, other):
        if not isinstance(other, NoisePmf):
            return NotImplemented
        return (
            self.n == other.n
            and self.eta == other.eta
            and self.D == other.D
            and self.as_dict(nonzero=True) == other.as_dict(nonzero=True)
        )

    __hash__ = None


@dataclasses.dataclass(frozen=True)
class Violation:
    prop: str
    value: float
    magnitude: float


@dataclasses.dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed


def _check_eta(eta: float) -> None:
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")


def make_elementary_pmf(n: int, i1: int, i2: int, eta: float, D: int) -> NoisePmf:
    """Three-point pmf with mass ``eta`` at 0 and a zero-mean lever on ``i1 < 0 < i2``.

    Args:
      n: true count, at least 1.
      i1: left offset in ``[-min(n, D) : -1]``.
      i2: right offset in ``[1 : D]``.
      eta: mass at zero.
      D: support half-width.

    Raises:
      InvalidElementaryIndex: if ``i1`` or ``i2`` is out of range.
    """
    _check_eta(eta)
    if n < 1:
        raise ValueError("true counts must be >= 1")
    A = min(n, D)
    if not -A <= i1 <= -1:
        raise InvalidElementaryIndex(f"i1={i1} outside [-{A} : -1]")
    if not 1 <= i2 <= D:
        raise InvalidElementaryIndex(f"i2={i2} outside [1 : {D}]")
    eta_bar = 1.0 - eta
    width = i2 - i1
    probs = np.zeros(D + A + 1)
    probs[i1 + A] = eta_bar * i2 / width
    probs[A] = eta
    probs[i2 + A] = eta_bar * (-i1) / width
    return NoisePmf(n=n, eta=eta, D=D, lo=-A, probs=probs)


def elementary_indices(n: int, D: int) -> list[tuple[int, int]]:
    """All valid ``(i1, i2)`` pairs for count ``n``, ordered by ``i1`` descending then ``i2``."""
    A = min(n, D)
    return [(-a, b) for a in range(1, A + 1) for b in range(1, D + 1)]


def mix_pmfs(weights: Sequence[float], pmfs: Sequence[NoisePmf]) -> NoisePmf:
    """Convex combination of pmfs that share ``n``, ``eta`` and ``D``."""
    if len(weights) != len(pmfs) or not pmfs:
        raise ValueError("weights and pmfs must be non-empty and of equal length")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > TOL:
        raise ValueError("weights must be non-negative and sum to 1")
    first = pmfs[0]
    if any((p.n, p.eta, p.D) != (first.n, first.eta, first.D) for p in pmfs):
        raise ValueError("all pmfs must share n, eta and D")
    lo = min(p.lo for p in pmfs)
    hi = max(p.hi for p in pmfs)
    probs = np.zeros(hi - lo + 1)
    for wi, p in zip(w, pmfs):
        probs[p.lo - lo : p.hi - lo + 1] += wi * p.probs
    return NoisePmf(n=first.n, eta=first.eta, D=first.D, lo=lo, probs=probs)


def symmetric_pmf(alphas: Sequence[float], eta: float) -> NoisePmf:
    """Data-independent pmf putting ``alphas[i-1] * (1 - eta) / 2`` on each of ``+-i``.

    Valid for every count ``n >= len(alphas)``; the returned pmf is tagged with
    ``n = D``, the smallest such count.
    """
    _check_eta(eta)
    a = np.asarray(alphas, dtype=float)
    D = a.size
    half = 0.5 * (1.0 - eta) * a
    probs = np.concatenate([half[::-1], [eta], half])
    return NoisePmf(n=D, eta=eta, D=D, lo=-D, probs=probs)


def validate_properties(pmf: NoisePmf, tol: float = TOL) -> ValidationReport:
    """Check P1 (support), P2 (mass at zero), P3 (zero bias) and normalization."""
    violations = []
    A = pmf.A
    for z, p in zip(pmf.offsets, pmf.probs):
        if (z < -A or z > pmf.D) and abs(p) > tol:
            violations.append(Violation("P1", float(z), abs(float(p))))
        if p < -tol:
            violations.append(Violation("NORMALIZATION", float(z), -float(p)))
    p0 = pmf[0]
    if abs(p0 - pmf.eta) > tol:
        violations.append(Violation("P2", p0, abs(p0 - pmf.eta)))
    bias = pmf.mean()
    if abs(bias) > tol:
        violations.append(Violation("P3", bias, abs(bias)))
    total = float(pmf.probs.sum())
    if abs(total - 1.0) > tol:
        violations.append(Violation("NORMALIZATION", total, abs(total - 1.0)))
    return ValidationReport(tuple(violations))


def mechanism_column(pmf: NoisePmf, n: int, N: int) -> np.ndarray:
    """Output distribution ``p_Y(y | n)`` over ``y = 0, ..., N + D``."""
    if n > N:
        raise ValueError(f"true count n={n} exceeds N={N}")
    if n < 1:
        raise ValueError("true counts must be >= 1")
    if pmf.lo < -min(n, pmf.D) and np.any(pmf.probs[: -min(n, pmf.D) - pmf.lo] != 0):
        raise ValueError(f"pmf puts mass below -min(n, D) for n={n}")
    col = np.zeros(N + pmf.D + 1)
    for z, p in zip(pmf.offsets, pmf.probs):
        if p != 0.0:
            col[n + z] += p
    return col


@dataclasses.dataclass(frozen=True, eq=False)
class MechanismMatrix:
    """Table of ``p_Y(y | n)``: rows are outputs ``y_lo, y_lo + 1, ...``; columns are counts.

    ``counts`` must be consecutive integers so that adjacent columns are
    neighbouring query answers.
    """

    counts: tuple[int, ...]
    probs: np.ndarray
    y_lo: int = 0

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 2 or probs.shape[1] != len(counts):
            raise ValueError("probs must have shape (outputs, len(counts))")
        if any(b - a != 1 for a, b in zip(counts, counts[1:])):
            raise ValueError("counts must be consecutive integers")
        probs.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "probs", probs)

    @property
    def outputs(self) -> np.ndarray:
        return np.arange(self.y_lo, self.y_lo + self.probs.shape[0])

    def column(self, n: int) -> np.ndarray:
        return self.probs[:, self.counts.index(n)]

    def to_json_dict(self) -> dict:
        return {
            "y_lo": self.y_lo,
            "counts": list(self.counts),
            "columns": [self.probs[:, j].tolist() for j in range(len(self.counts))],
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "MechanismMatrix":
        return cls(
            counts=tuple(obj["counts"]),
            probs=np.array(obj["columns"], dtype=float).T,
            y_lo=int(obj.get("y_lo", 0)),
        )


def build_matrix(pmfs: Mapping[int, NoisePmf] | NoisePmf, N: int, counts: Iterable[int] | None = None) -> MechanismMatrix:
    """Stack :func:`mechanism_column` over consecutive counts.

    ``pmfs`` is either one data-independent pmf reused for every count, or a
    mapping from count to its own pmf.
    """
    if isinstance(pmfs, NoisePmf):
        if counts is None:
            counts = range(pmfs.n, N + 1)
        counts = list(counts)
        cols = [mechanism_column(pmfs, n, N) for n in counts]
    else:
        counts = sorted(pmfs) if counts is None else list(counts)
        cols = [mechanism_column(pmfs[n], n, N) for n in counts]
    return MechanismMatrix(counts=tuple(counts), probs=np.column_stack(cols))


def offset_matrix(offsets: Sequence[int], probs: Sequence[float], counts: Iterable[int]) -> MechanismMatrix:
    """Matrix of an additive mechanism whose noise ignores the count (e.g. untruncated noise)."""
    offsets = np.asarray(offsets, dtype=int)
    probs = np.asarray(probs, dtype=float)
    counts = list(counts)
    y_lo = counts[0] + int(offsets.min())
    y_hi = counts[-1] + int(offsets.max())
    table = np.zeros((y_hi - y_lo + 1, len(counts)))
    for j, n in enumerate(counts):
        table[n + offsets - y_lo, j] = probs
    return MechanismMatrix(counts=tuple(counts), probs=table, y_lo=y_lo)
