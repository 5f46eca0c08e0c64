"""Drawing releases ``Y = n + Z`` and auditing them against the analytic pmf.

Sampling is inverse-CDF over the (at most ``2D + 1``) support points, fed by
numpy's counter-based Philox generator. Independent streams for parallel
audits come from ``SeedSequence.spawn``, so results depend only on
``(seed, streams)``.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from countdp.noise_family import MechanismConfig, NoisePmf, validate_properties
from countdp.optimal import optimal_alphas

RNG_NAME = "numpy.random.Philox (4x64, counter-based)"


class SamplerState:
    """Single-owner sampling state for one pmf. Not thread safe."""

    def __init__(self, pmf: NoisePmf, seed: int | np.random.SeedSequence = 0):
        if not validate_properties(pmf).passed:
            raise ValueError("pmf violates the noise properties")
        self.pmf = pmf
        self.seed = seed
        cum = np.cumsum(pmf.probs)
        cum[-1] = 1.0
        self.cumulative = cum
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        self.rng = np.random.Generator(np.random.Philox(ss))
        self.draws = 0

    def offsets(self, size: int) -> np.ndarray:
        u = self.rng.random(size)
        idx = np.searchsorted(self.cumulative, u, side="right")
        self.draws += size
        return self.pmf.lo + idx


def sample_output(n: int, pmf: NoisePmf, state: SamplerState) -> int:
    """One release for true count ``n``."""
    return int(sample_outputs(n, pmf, state, 1)[0])


def sample_outputs(n: int, pmf: NoisePmf, state: SamplerState, size: int) -> np.ndarray:
    if state.pmf is not pmf and state.pmf != pmf:
        raise ValueError("state was built for a different pmf")
    A = min(n, pmf.D)
    if pmf.lo < -A and np.any(pmf.probs[: -A - pmf.lo] != 0):
        raise ValueError(f"pmf is not valid for count n={n}")
    y = n + state.offsets(size)
    if y.size and (y.min() < n - A or y.max() > n + pmf.D):
        raise AssertionError("draw left the hard support")
    return y


def _histogram(pmf: NoisePmf, seeds, trials_per: list[int]) -> np.ndarray:
    def run(args):
        seed, t = args
        st = SamplerState(pmf, seed)
        counts = np.zeros(pmf.probs.size, dtype=np.int64)
        chunk = 1 << 20
        while t > 0:
            k = min(chunk, t)
            counts += np.bincount(st.offsets(k) - pmf.lo, minlength=pmf.probs.size)
            t -= k
        return counts

    jobs = list(zip(seeds, trials_per))
    if len(jobs) == 1:
        return run(jobs[0])
    with ThreadPoolExecutor(max_workers=len(jobs)) as ex:
        return sum(ex.map(run, jobs))


def draw_histogram(pmf: NoisePmf, trials: int, seed: int = 0, streams: int = 1) -> np.ndarray:
    """Counts per offset (aligned with ``pmf.offsets``) over ``trials`` draws."""
    if streams == 1:
        seeds = [np.random.SeedSequence(seed)]
    else:
        seeds = np.random.SeedSequence(seed).spawn(streams)
    base, extra = divmod(trials, streams)
    return _histogram(pmf, seeds, [base + (i < extra) for i in range(streams)])


@dataclasses.dataclass(frozen=True)
class AuditReport:
    trials: int
    empirical_mass: dict[int, float]
    tv_distance: float
    empirical_correct_rate: float
    in_range_rate: float
    window: int
    analytic_in_range: float
    seed: int
    rng: str = RNG_NAME
    counts: dict[int, int] = dataclasses.field(default_factory=dict, repr=False)

    def to_json_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["empirical_mass"] = {str(k): v for k, v in self.empirical_mass.items()}
        d["counts"] = {str(k): v for k, v in self.counts.items()}
        return d


def audit_pmf(pmf: NoisePmf, trials: int, window: int, seed: int = 0, streams: int = 1) -> AuditReport:
    counts = draw_histogram(pmf, trials, seed=seed, streams=streams)
    freq = counts / trials
    offsets = pmf.offsets
    inside = np.abs(offsets) <= window
    return AuditReport(
        trials=trials,
        empirical_mass={int(z): float(f) for z, f in zip(offsets, freq)},
        tv_distance=0.5 * float(np.abs(freq - pmf.probs).sum()),
        empirical_correct_rate=float(freq[offsets == 0].sum()),
        in_range_rate=float(freq[inside].sum()),
        window=window,
        analytic_in_range=math.fsum(pmf.probs[inside]),
        seed=seed,
        counts={int(z): int(c) for z, c in zip(offsets, counts)},
    )


def empirical_audit(
    config: MechanismConfig, n: int, trials: int, window: int, seed: int = 0, streams: int = 1
) -> AuditReport:
    """Sample the optimal design for ``config`` at count ``n`` and compare with its pmf.

    ``in_range_rate`` is the fraction of releases within ``[n - window, n + window]``.
    """
    if n < config.D:
        raise ValueError(f"the closed-form design needs n >= D (got n={n}, D={config.D})")
    pmf = optimal_alphas(config).noise_pmf()
    return audit_pmf(pmf, trials, window, seed=seed, streams=streams)


def empirical_singular_delta(
    pmf: NoisePmf, epsilon: float, trials: int, seed: int = 0
) -> tuple[float, float]:
    """Plug-in estimate of the singleton ``delta`` between counts ``n`` and ``n + 1``.

    Both columns are estimated from independent draws. Returns the estimate
    and the standard error of the gap at the maximising output.
    """
    E = math.exp(epsilon)
    ss = np.random.SeedSequence(seed).spawn(2)
    h0 = draw_histogram(pmf, trials, seed=int(ss[0].generate_state(1)[0]))
    h1 = draw_histogram(pmf, trials, seed=int(ss[1].generate_state(1)[0]))
    p = h0 / trials
    q = h1 / trials
    # Y | n on outputs lo..hi, Y | n+1 shifted by one
    pn = np.concatenate([p, [0.0]])
    pn1 = np.concatenate([[0.0], q])
    best, se = 0.0, 0.0
    for a, b in ((pn, pn1), (pn1, pn)):
        gap = a - E * b
        y = int(np.argmax(gap))
        if gap[y] > best:
            best = float(gap[y])
            se = math.sqrt((a[y] * (1 - a[y]) + E * E * b[y] * (1 - b[y])) / trials)
    return best, se
