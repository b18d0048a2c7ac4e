"""Sweeps built from single runs: convergence tables, model comparison, local limit."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .config import RunConfig
from .diagnostics import count_local_extrema, l1_distance, l1_error
from .errors import ConfigError
from .kernel import quadrature_weights
from .scheme import comparison_lambda, run


def _run_job(job):
    """Worker entry point; kept at module level so it pickles."""
    model, kspec, grid, init, scheme, T, mode = job
    kernel = quadrature_weights(kspec, grid.h) if scheme.scheme != "godunov_local" else None
    lam = comparison_lambda(model, kernel, scheme) if mode == "shared" else None
    t0 = time.perf_counter()
    state, report = run(model, kernel, grid, init, scheme, T, lam=lam)
    report.trace = None
    return state, report, time.perf_counter() - t0


def _map(jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_job, jobs))


@dataclass
class ConvergenceResult:
    rows: list                     # dicts with n, h, scheme, l1_error, eoc, lam, tau, steps, seconds
    reference: object              # GridState
    reference_h: float
    reference_scheme: str
    reference_seconds: float
    reference_row: dict = field(default_factory=dict)
    violations: dict = field(default_factory=dict)

    def errors(self, scheme: str) -> list:
        return [r["l1_error"] for r in self.rows if r["scheme"] == scheme]

    def eocs(self, scheme: str) -> list:
        return [r["eoc"] for r in self.rows if r["scheme"] == scheme]

    @property
    def seconds(self) -> float:
        return self.reference_seconds + sum(r["seconds"] for r in self.rows)


def convergence_table(cfg: RunConfig, threads: int = 1) -> ConvergenceResult:
    """L1 errors against a fine reference solution.

    Every run, the reference included, uses the shared step
    ``tau = cfl_safety * min(Godunov bound, LxF bound) * h`` so the two schemes
    are compared on equal time steps.
    """
    conv = cfg.convergence
    if conv is None:
        raise ConfigError("missing [convergence] section", field="convergence")
    init = cfg.initial_data()
    ref_grid = cfg.grid(conv.h(conv.reference_level))
    ref_scheme = replace(cfg.scheme, scheme=conv.reference_scheme)
    jobs = [(cfg.model, cfg.kernel, ref_grid, init, ref_scheme, cfg.T, "shared")]
    keys = []
    for n in conv.levels:
        for s in conv.schemes:
            jobs.append((cfg.model, cfg.kernel, cfg.grid(conv.h(n)), init,
                         replace(cfg.scheme, scheme=s), cfg.T, "shared"))
            keys.append((n, s))
    results = _map(jobs, threads)

    ref_state, ref_report, ref_secs = results[0]
    violations = {f"reference:{k}": v for k, v in ref_report.violations.items() if v}
    rows, prev = [], {}
    for (n, s), (state, report, secs) in zip(keys, results[1:]):
        err = l1_error(state, ref_state)
        last = prev.get(s)
        eoc = math.log2(last / err) if last is not None and err > 0 and last > 0 else math.nan
        prev[s] = err
        rows.append({"n": n, "h": state.h, "scheme": s, "l1_error": err, "eoc": eoc,
                     "lam": report.lam, "tau": report.tau, "steps": report.steps, "seconds": secs})
        for k, v in report.violations.items():
            if v:
                violations[f"{s}@{n}:{k}"] = v
    ref_row = {"n": conv.reference_level, "h": ref_grid.h, "scheme": conv.reference_scheme,
               "lam": ref_report.lam, "tau": ref_report.tau, "steps": ref_report.steps}
    return ConvergenceResult(rows, ref_state, ref_grid.h, conv.reference_scheme, ref_secs,
                             ref_row, violations)


def write_convergence_csv(result: ConvergenceResult, path) -> None:
    with open(path, "w") as fh:
        fh.write("n,h,scheme,l1_error,eoc\n")
        for r in result.rows:
            fh.write(f"{r['n']},{r['h']!r},{r['scheme']},{r['l1_error']!r},{r['eoc']!r}\n")


def write_steps_csv(result: ConvergenceResult, path) -> None:
    """Time-step bookkeeping of a convergence sweep, reference first."""
    with open(path, "w") as fh:
        fh.write("n,h,scheme,lambda,tau,steps\n")
        for r in [result.reference_row] + result.rows:
            fh.write(f"{r['n']},{r['h']!r},{r['scheme']},{r['lam']!r},{r['tau']!r},{r['steps']}\n")


@dataclass
class ComparisonResult:
    states: dict                   # variant -> GridState
    extrema: dict                  # variant -> number of local extrema
    l1_distance: float
    reports: dict


def compare_models(cfg: RunConfig, threads: int = 1) -> ComparisonResult:
    """Run the Godunov scheme for both model variants on the same data."""
    init = cfg.initial_data()
    grid = cfg.grid()
    scheme = replace(cfg.scheme, scheme="godunov")
    variants = ("mean_velocity", "mean_density")
    jobs = [(replace(cfg.model, variant=v), cfg.kernel, grid, init, scheme, cfg.T, "own")
            for v in variants]
    results = _map(jobs, threads)
    states = {v: r[0] for v, r in zip(variants, results)}
    reports = {v: r[1] for v, r in zip(variants, results)}
    extrema = {v: count_local_extrema(s.rho) for v, s in states.items()}
    dist = l1_distance(states["mean_velocity"], states["mean_density"])
    return ComparisonResult(states, extrema, dist, reports)


@dataclass
class LocalLimitResult:
    local: object                  # GridState of the local scheme
    states: dict                   # eta -> GridState
    rows: list                     # (eta, l1_distance)
    reports: dict


def local_limit(cfg: RunConfig, threads: int = 1) -> LocalLimitResult:
    """Distance between non-local Godunov solutions and the local one as ``eta`` shrinks.

    Each run uses the bound of its own scheme, so the local step is set by
    ``max |f'|`` and each non-local step by its kernel.
    """
    if cfg.local_limit is None:
        raise ConfigError("missing [local_limit] section", field="local_limit")
    init = cfg.initial_data()
    grid = cfg.grid()
    etas = tuple(cfg.local_limit.etas)
    jobs = [(cfg.model, cfg.kernel, grid, init, replace(cfg.scheme, scheme="godunov_local"), cfg.T, "own")]
    for eta in etas:
        jobs.append((cfg.model, replace(cfg.kernel, eta=eta), grid, init,
                     replace(cfg.scheme, scheme="godunov"), cfg.T, "own"))
    results = _map(jobs, threads)
    local_state = results[0][0]
    states = {eta: r[0] for eta, r in zip(etas, results[1:])}
    reports = {"local": results[0][1]}
    reports.update({eta: r[1] for eta, r in zip(etas, results[1:])})
    rows = [(eta, l1_distance(states[eta], local_state)) for eta in etas]
    return LocalLimitResult(local_state, states, rows, reports)


def single_run(cfg: RunConfig, entropy_check: bool = False):
    """One run as described by ``cfg``; returns ``(state, report)``."""
    kernel = None if cfg.scheme.scheme == "godunov_local" else quadrature_weights(cfg.kernel, cfg.h)
    return run(cfg.model, kernel, cfg.grid(), cfg.initial_data(), cfg.scheme, cfg.T,
               entropy_check=entropy_check)


__all__ = ["ConvergenceResult", "ComparisonResult", "LocalLimitResult", "compare_models",
           "convergence_table", "local_limit", "single_run", "write_convergence_csv",
           "write_steps_csv"]
