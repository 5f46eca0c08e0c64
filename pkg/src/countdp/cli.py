"""Command-line front end: ``countdp <command> [flags]``.

Every command is a pure function of its :class:`RunSpec`. CSV output opens
with a ``#`` comment holding the spec as JSON, so any file can be
regenerated from its first line.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from countdp.gaussian import CSV_HEADER, compare_mechanisms, discrete_gaussian_pmf, rows_to_csv
from countdp.noise_family import MechanismConfig, MechanismMatrix, build_matrix, validate_properties
from countdp.oracle import audit, general_program, induced_pmfs, solve_restricted_lp
from countdp.optimal import bound_set, optimal_alphas
from countdp.sampler import audit_pmf, draw_histogram
from countdp.simplex import Status, solve_simplex

COMMANDS = ("solve", "sweep-eps", "sweep-eta", "compare-gaussian", "verify", "sample", "figure-data")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2

FIG2_D = (4, 6, 8)
FIG3_EPS = (1.1, 2.2)
FIG3_D = (4, 6, 8)


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


@dataclasses.dataclass(frozen=True)
class RunSpec:
    command: str
    eta: float | None = None
    D: tuple[int, ...] = ()
    eps: float | None = None
    N: int | None = None
    n: int | None = None
    grid_start: float | None = None
    grid_stop: float | None = None
    grid_points: int | None = None
    grid_scale: str = "linear"
    trials: int = 10**6
    seed: int = 0
    window: int = 3
    streams: int = 1
    configs: int = 500
    matrix: str | None = None
    workers: int = 1
    out: str | None = None
    format: str = "csv"

    def provenance(self) -> str:
        return "# " + json.dumps(dataclasses.asdict(self), sort_keys=True)

    def grid(self) -> np.ndarray:
        if None in (self.grid_start, self.grid_stop, self.grid_points):
            raise UsageError("sweeps need --grid-start, --grid-stop and --grid-points")
        if not self.grid_start < self.grid_stop:
            raise UsageError("grid start must be below grid stop")
        if self.grid_points < 2:
            raise UsageError("a sweep needs at least 2 grid points")
        if self.grid_scale == "log":
            if self.grid_start <= 0:
                raise UsageError("log grid needs a positive start")
            return np.geomspace(self.grid_start, self.grid_stop, self.grid_points)
        return np.linspace(self.grid_start, self.grid_stop, self.grid_points)


def _config(eta, D, eps, N=None) -> MechanismConfig:
    try:
        return MechanismConfig(eta=eta, D=D, epsilon=eps, N=N)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from e


def _need(spec: RunSpec, *fields: str) -> None:
    missing = [f for f in fields if getattr(spec, f) in (None, ())]
    if missing:
        raise UsageError("missing " + ", ".join("--" + f for f in missing))


def _single_D(spec: RunSpec) -> int:
    _need(spec, "D")
    if len(spec.D) != 1:
        raise UsageError(f"{spec.command} takes a single --D")
    return spec.D[0]


def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    # map keeps input order whatever the completion order
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _csv(spec: RunSpec, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(spec.provenance() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _table(spec: RunSpec, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    if spec.format == "json":
        return _json([dict(zip(header, r)) for r in rows])
    return _csv(spec, header, rows)


# ---- commands ------------------------------------------------------------


def cmd_solve(spec: RunSpec) -> tuple[int, str]:
    _need(spec, "eta", "eps")
    cfg = _config(spec.eta, _single_D(spec), spec.eps)
    sol = optimal_alphas(cfg)
    vacuous = sol.dp_delta >= 1.0
    if spec.format == "json":
        return EXIT_OK, _json({**sol.to_json_dict(), "vacuous": vacuous})
    lines = [
        f"regime      {sol.regime}",
        f"delta_star  {fmt(sol.delta_star)}",
        f"dp_delta    {fmt(sol.dp_delta)}",
        "alphas      " + " ".join(fmt(a) for a in sol.alphas),
        f"variance    {fmt(sol.variance)}",
    ]
    if vacuous:
        lines.append("note        vacuous guarantee: (2D+1) delta clamped at 1")
    return EXIT_OK, "\n".join(lines) + "\n"


def _sweep_rows(eta: float, D: int, eps: float) -> tuple:
    sol = optimal_alphas(_config(eta, D, float(eps)))
    return (float(eps), float(eta), D, sol.regime, sol.delta_star, sol.dp_delta)


SWEEP_HEADER = ("epsilon", "eta", "D", "regime", "delta_star", "dp_delta")


def sweep_eps_rows(eta: float, Ds: Sequence[int], grid: Sequence[float], workers: int = 1) -> list[tuple]:
    jobs = [(D, e) for D in Ds for e in grid]
    return _pmap(lambda j: _sweep_rows(eta, j[0], j[1]), jobs, workers)


def sweep_eta_rows(eps: float, Ds: Sequence[int], grid: Sequence[float], workers: int = 1) -> list[tuple]:
    jobs = [(D, h) for D in Ds for h in grid]
    return _pmap(lambda j: _sweep_rows(float(j[1]), j[0], eps), jobs, workers)


def cmd_sweep_eps(spec: RunSpec) -> tuple[int, str]:
    _need(spec, "eta", "D")
    grid = spec.grid()
    if grid[0] < 0:
        raise UsageError("epsilon grid must be non-negative")
    rows = sweep_eps_rows(spec.eta, spec.D, grid, spec.workers)
    return EXIT_OK, _table(spec, SWEEP_HEADER, rows)


def cmd_sweep_eta(spec: RunSpec) -> tuple[int, str]:
    _need(spec, "eps", "D")
    grid = spec.grid()
    if not (0 < grid[0] and grid[-1] < 1):
        raise UsageError("eta grid must lie inside (0, 1)")
    rows = sweep_eta_rows(spec.eps, spec.D, grid, spec.workers)
    return EXIT_OK, _table(spec, SWEEP_HEADER, rows)


def cmd_compare_gaussian(spec: RunSpec) -> tuple[int, str]:
    _need(spec, "eta")
    D = _single_D(spec)
    grid = spec.grid()
    _config(spec.eta, D, float(grid[0]))
    rows = compare_mechanisms(spec.eta, D, grid)
    if spec.format == "json":
        # the realized variance of the discretised Gaussian rides along in JSON only
        return EXIT_OK, _json(
            [
                {**dict(zip(CSV_HEADER, r.csv_fields())), "gaussian_realized_variance": r.gaussian_realized_variance}
                for r in rows
            ]
        )
    return EXIT_OK, spec.provenance() + "\n" + rows_to_csv(rows)


def cmd_sample(spec: RunSpec) -> tuple[int, str]:
    _need(spec, "eta", "eps")
    cfg = _config(spec.eta, _single_D(spec), spec.eps)
    n = cfg.D if spec.n is None else spec.n
    if n < cfg.D:
        raise UsageError(f"--n must be at least D={cfg.D} for the closed-form design")
    if spec.trials < 1:
        raise UsageError("--trials must be positive")
    pmf = optimal_alphas(cfg).noise_pmf()
    if spec.format == "json":
        report = audit_pmf(pmf, spec.trials, spec.window, seed=spec.seed, streams=spec.streams)
        return EXIT_OK, _json(report.to_json_dict())
    counts = draw_histogram(pmf, spec.trials, seed=spec.seed, streams=spec.streams)
    return EXIT_OK, _csv(spec, ("offset", "count"), list(zip(pmf.offsets.tolist(), counts.tolist())))


# ---- verify --------------------------------------------------------------


def random_configs(count: int, seed: int) -> list[MechanismConfig]:
    """Seeded grid: eta in (0.05, 0.95), D in [1:12], epsilon in [0, 4]."""
    rng = np.random.default_rng(seed)
    return [
        MechanismConfig(
            eta=float(rng.uniform(0.05, 0.95)),
            D=int(rng.integers(1, 13)),
            epsilon=float(rng.uniform(0.0, 4.0)),
        )
        for _ in range(count)
    ]


def near_boundary(cfg: MechanismConfig, rel: float = 1e-6) -> bool:
    """``C`` within ``rel`` of a crossover, or ``epsilon`` near 0: the LP optimum need not be unique."""
    if cfg.epsilon < 1e-6:
        return True
    bs = bound_set(cfg)
    return any(abs(cfg.C - c) <= rel * c for c in bs.crossovers[1:-1])


def _matrix_problems(matrix: MechanismMatrix, epsilon: float) -> list[str]:
    out = []
    P = matrix.probs
    if np.any(P < -1e-12):
        out.append("matrix has negative entries")
    sums = P.sum(axis=0)
    if np.any(np.abs(sums - 1.0) > 1e-12):
        out.append(f"column sums off by up to {np.max(np.abs(sums - 1)):.3g}")
    a = audit(matrix, epsilon)
    if not a.singular_delta <= a.event_delta + 1e-15:
        out.append("sandwich: singular delta above event delta")
    if not a.event_delta <= a.support_size * a.singular_delta + 1e-12:
        out.append(
            f"sandwich: event delta {a.event_delta:.6g} above "
            f"{a.support_size} x singular {a.singular_delta:.6g}"
        )
    return out


def verify_report(configs: int = 500, seed: int = 0) -> dict:
    cfgs = random_configs(configs, seed)
    max_delta_gap = 0.0
    max_alpha_gap = 0.0
    failures: list[str] = []
    sandwiches = 0
    for cfg in cfgs:
        sol = optimal_alphas(cfg)
        lp = solve_restricted_lp(cfg)
        if lp.status is not Status.OPTIMAL:
            failures.append(f"restricted LP {lp.status.value} at {cfg}")
            continue
        max_delta_gap = max(max_delta_gap, abs(lp.optimum - sol.delta_star))
        if not near_boundary(cfg):
            max_alpha_gap = max(
                max_alpha_gap, float(np.max(np.abs(np.asarray(lp.assignment[1:]) - sol.alphas)))
            )
        m = build_matrix(sol.noise_pmf(), cfg.D + 3)
        for p in _matrix_problems(m, cfg.epsilon):
            failures.append(f"{p} at {cfg}")
        sandwiches += 1
    if max_delta_gap >= 1e-9:
        failures.append(f"closed form vs LP delta gap {max_delta_gap:.3g}")
    if max_alpha_gap >= 1e-8:
        failures.append(f"closed form vs LP alpha gap {max_alpha_gap:.3g}")

    ex1 = MechanismConfig(eta=0.5, D=2, epsilon=1.0, N=3)
    prog = general_program(3, ex1)
    gsol = solve_simplex(prog.lp)
    if gsol.status is not Status.OPTIMAL:
        failures.append(f"example general LP status {gsol.status.value}")
    else:
        for n, pmf in induced_pmfs(prog, gsol).items():
            rep = validate_properties(pmf, tol=1e-9)
            if not rep.passed:
                failures.append(f"example general LP column n={n} fails {rep.violations}")
    return {
        "configs": configs,
        "seed": seed,
        "max_delta_gap": max_delta_gap,
        "max_alpha_gap": max_alpha_gap,
        "sandwich_checked": sandwiches,
        "example_general_lp": gsol.status.value,
        "example_general_delta": gsol.optimum,
        "failures": failures,
        "passed": not failures,
    }


def cmd_verify(spec: RunSpec) -> tuple[int, str]:
    if spec.configs < 1:
        raise UsageError("--configs must be positive")
    if spec.matrix is not None:
        if spec.eps is None:
            raise UsageError("--matrix needs --eps")
        try:
            with open(spec.matrix) as fh:
                matrix = MechanismMatrix.from_json_dict(json.load(fh))
        except (OSError, ValueError, KeyError) as e:
            raise UsageError(f"cannot read matrix: {e}") from e
        problems = _matrix_problems(matrix, spec.eps)
        a = audit(matrix, spec.eps)
        report = {"matrix": spec.matrix, "audit": a.to_json_dict(), "failures": problems, "passed": not problems}
    else:
        report = verify_report(spec.configs, spec.seed)
    if spec.format == "json":
        text = _json(report)
    else:
        text = "".join(f"{k}: {fmt(v)}\n" for k, v in report.items() if k != "failures")
        text += "".join(f"FAIL {f}\n" for f in report["failures"])
    return (EXIT_OK if report["passed"] else EXIT_VERIFY), text


# ---- figure data ---------------------------------------------------------


def figure_bundle(spec: RunSpec) -> dict[str, str]:
    """CSV text for each figure, keyed by file name."""
    out = {}
    cfg = MechanismConfig(eta=0.8, D=6, epsilon=2.18)
    sol = optimal_alphas(cfg)
    ours = sol.noise_pmf()
    g = discrete_gaussian_pmf(sol.variance)
    # Gaussian tails past D are listed, not dropped
    K = max(cfg.D, g.truncation)
    rows = [(z, ours[z] if abs(z) <= cfg.D else 0.0, g[z]) for z in range(-K, K + 1)]
    out["fig1.csv"] = _csv(spec, ("offset", "our_mass", "gaussian_mass"), rows)

    eps_grid = np.linspace(0.0, 4.0, 81)
    out["fig2.csv"] = _csv(spec, SWEEP_HEADER, sweep_eps_rows(0.5, FIG2_D, eps_grid, spec.workers))

    eta_grid = np.linspace(0.05, 0.95, 91)
    rows = []
    for eps in FIG3_EPS:
        rows += sweep_eta_rows(eps, FIG3_D, eta_grid, spec.workers)
    out["fig3.csv"] = _csv(spec, SWEEP_HEADER, rows)

    cmp_grid = np.linspace(0.5, 4.0, 36)
    out["fig4.csv"] = spec.provenance() + "\n" + rows_to_csv(compare_mechanisms(0.5, 6, cmp_grid))
    return out


def cmd_figure_data(spec: RunSpec) -> tuple[int, str]:
    _need(spec, "out")
    os.makedirs(spec.out, exist_ok=True)
    bundle = figure_bundle(spec)
    for name, text in bundle.items():
        with open(os.path.join(spec.out, name), "w") as fh:
            fh.write(text)
    return EXIT_OK, "".join(os.path.join(spec.out, name) + "\n" for name in bundle)


HANDLERS = {
    "solve": cmd_solve,
    "sweep-eps": cmd_sweep_eps,
    "sweep-eta": cmd_sweep_eta,
    "compare-gaussian": cmd_compare_gaussian,
    "verify": cmd_verify,
    "sample": cmd_sample,
    "figure-data": cmd_figure_data,
}


# ---- argument parsing ----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="countdp", description="Optimal bounded integer noise for private counts.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--eta", type=float)
        s.add_argument("--D", type=int, nargs="+", default=[])
        s.add_argument("--eps", type=float)
        s.add_argument("--N", type=int)
        s.add_argument("--n", type=int, help="true count for sample (default D)")
        s.add_argument("--grid-start", type=float)
        s.add_argument("--grid-stop", type=float)
        s.add_argument("--grid-points", type=int)
        s.add_argument("--grid-scale", choices=("linear", "log"), default="linear")
        s.add_argument("--trials", type=int, default=10**6)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--window", type=int, default=3)
        s.add_argument("--streams", type=int, default=1)
        s.add_argument("--configs", type=int, default=500)
        s.add_argument("--matrix", help="JSON mechanism matrix to audit (verify)")
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--out")
        s.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def parse_spec(argv: Sequence[str]) -> RunSpec:
    ns = build_parser().parse_args(list(argv))
    d = vars(ns)
    d["D"] = tuple(d["D"])
    return RunSpec(**d)


def run(argv: Sequence[str]) -> tuple[int, str]:
    spec = parse_spec(argv)
    code, text = HANDLERS[spec.command](spec)
    if spec.out is not None and spec.command != "figure-data":
        with open(spec.out, "w") as fh:
            fh.write(text)
        text = ""
    return code, text


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        code, text = run(argv)
    except UsageError as e:
        print(f"countdp: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
