"""Error measures and runtime checks of the analytical properties of the scheme."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import IncompatibleGrids
from .grid import GridState
from .model import ModelSpec, compute_norms

N_KAPPA = 21


def _values(state) -> np.ndarray:
    return state.rho if isinstance(state, GridState) else np.asarray(state, dtype=float)


def total_variation(state) -> float:
    """Periodic total variation ``sum_j |rho_{j+1} - rho_j|``."""
    rho = _values(state)
    return float(np.sum(np.abs(np.roll(rho, -1) - rho)))


def l1_distance(a: GridState, b: GridState) -> float:
    """``h * sum |a - b|`` for two states on the same grid."""
    if a.grid != b.grid:
        raise IncompatibleGrids("states live on different grids")
    return a.h * float(np.sum(np.abs(a.rho - b.rho)))


def l1_error(coarse: GridState, reference: GridState) -> float:
    """L1 distance with the reference sampled at the coarse cell centers.

    The reference width must divide the coarse width; coarse center ``j h``
    is then reference center ``j r`` with ``r = h / h_ref``.
    """
    if abs(coarse.grid.length - reference.grid.length) > 1e-12 * coarse.grid.length:
        raise IncompatibleGrids(
            f"domain lengths differ: {coarse.grid.length} vs {reference.grid.length}")
    ratio = reference.grid.n_cells / coarse.grid.n_cells
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > 1e-9 * ratio:
        raise IncompatibleGrids(f"reference/coarse cell ratio {ratio} is not an integer")
    sampled = reference.rho[::r]
    return coarse.h * float(np.sum(np.abs(coarse.rho - sampled)))


def count_local_extrema(rho, tol: float | None = None) -> int:
    """Number of strict local extrema of a periodic profile.

    Jumps of size ``tol`` or less are treated as flat, so plateaus count once.
    The default ``tol`` is ``1e-6`` times the range of ``rho``, which ignores
    round-off ripples in nearly constant regions.
    """
    rho = np.asarray(rho, dtype=float)
    if tol is None:
        tol = 1e-6 * float(np.ptp(rho)) if rho.size else 0.0
    d = np.diff(rho, append=rho[:1])
    s = np.sign(np.where(np.abs(d) > tol, d, 0.0))
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s != np.roll(s, 1)))


# -- entropy inequality -----------------------------------------------------

def kappa_levels(model: ModelSpec, rho, rho_next, n_kappa: int = N_KAPPA) -> np.ndarray:
    """Entropy levels per cell, shape ``(n_kappa + 3, M)``.

    A uniform grid on ``[0, rho_max]`` plus the stencil values
    ``rho_{j-1}, rho_j`` and ``rho_j^{n+1}``, where the Kruzkov entropy kinks.
    """
    m = rho.shape[0]
    base = np.linspace(0.0, model.rho_max, n_kappa)
    grid = np.broadcast_to(base[:, None], (n_kappa, m))
    return np.vstack([grid, np.roll(rho, 1)[None, :], rho[None, :], rho_next[None, :]])


@dataclass(frozen=True)
class EntropyResidualReport:
    max_residual: float
    argmax: tuple          # (step index, cell index, kappa)
    samples_checked: int

    def ok(self, tol: float = 1e-12) -> bool:
        return self.max_residual <= tol


def step_entropy_residual(rho, rho_next, vface, lam, model: ModelSpec,
                          n_kappa: int = N_KAPPA) -> tuple:
    """Max entropy residual of one Godunov step: ``(value, cell, kappa, n_samples)``."""
    kap = kappa_levels(model, rho, rho_next, n_kappa)
    val, i, j = kernels.entropy_residual_max(rho, rho_next, vface, lam, kap, model.g.coef)
    return val, j, float(kap[i, j]), kap.size


def entropy_residuals(trace, model: ModelSpec, n_kappa: int = N_KAPPA) -> EntropyResidualReport:
    """Evaluate the inequality over a trace of ``(rho, vface, rho_next, lam)`` steps."""
    best, where, count = -math.inf, (None, None, None), 0
    for n, (rho, vface, rho_next, lam) in enumerate(trace):
        val, j, kap, cnt = step_entropy_residual(rho, rho_next, vface, lam, model, n_kappa)
        count += cnt
        if val > best:
            best, where = val, (n, j, kap)
    return EntropyResidualReport(best, where, count)


# -- stability constants ----------------------------------------------------

def safe_exp(x: float) -> float:
    """``exp(x)`` that returns ``inf`` instead of overflowing; the bounds are then vacuous."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class StabilityConstants:
    C_bv: float
    K: float
    spacetime_bound: float


def bv_growth_constant(model: ModelSpec, kernel) -> float:
    """``w(0) (|v'| |g| rho_max + |v| |g'|)``: per-unit-time TV growth rate."""
    nm = compute_norms(model)
    return kernel.w_at_zero * (nm.dv_sup * nm.g_sup * model.rho_max + nm.v_sup * nm.dg_sup)


def lipschitz_constant(model: ModelSpec, kernel, tv_sup: float, g_sup: float,
                       g_l1_sup: float) -> float:
    """L1-stability rate ``K`` from the sup over time of TV, ``|g(rho)|_inf`` and ``|g(rho)|_1``."""
    nm = compute_norms(model)
    return nm.dv_sup * (kernel.w_at_zero * (nm.dg_sup * tv_sup + 2.0 * g_sup)
                        + kernel.spec.dw_sup * g_l1_sup)


def spacetime_tv(report) -> float:
    """Discrete space-time total variation of a run on ``[0, T]``.

    Space part weights ``TV(rho^n)`` by the length of step ``n``; the time part
    counts the jumps at the interior time levels only.
    """
    hist = report.history
    tv = np.asarray(hist["tv"])
    dts = np.asarray(hist["dt"])[1:]
    jumps = np.asarray(hist["time_jump"])[1:]
    space = float(np.sum(dts * tv[:-1]))
    time = float(np.sum(jumps[:-1])) if jumps.size > 1 else 0.0
    return space + time


def stability_constants(model: ModelSpec, kernel, report) -> StabilityConstants:
    nm = compute_norms(model)
    hist = report.history
    c_bv = bv_growth_constant(model, kernel)
    k = lipschitz_constant(model, kernel, float(np.max(hist["tv"])), float(np.max(hist["g_sup"])),
                           float(np.max(hist["g_l1"])))
    T = report.final.time
    tv0 = hist["tv"][0]
    bound = T * safe_exp(c_bv * T) * (1.0 + kernel.w0 * nm.dv_sup * nm.g_sup
                                      + nm.v_sup * nm.dg_sup) * tv0
    return StabilityConstants(c_bv, k, bound)


def lipschitz_stability_check(model: ModelSpec, kernel_spec, grid, init_a, init_b, T: float,
                              config=None) -> tuple:
    """Run the Godunov scheme on two initial data; return ``(lhs, rhs)``.

    ``lhs`` is the L1 distance at ``T``, ``rhs = exp(K T)`` times the initial
    distance with ``K`` taken from the first run's history.
    """
    from .grid import project_initial
    from .kernel import quadrature_weights
    from .scheme import SchemeConfig, run

    config = config or SchemeConfig("godunov")
    kern = quadrature_weights(kernel_spec, grid.h)
    a, rep_a = run(model, kern, grid, init_a, config, T, checks=False)
    b, _ = run(model, kern, grid, init_b, config, T, checks=False)
    d0 = l1_distance(project_initial(init_a, grid), project_initial(init_b, grid))
    consts = stability_constants(model, kern, rep_a)
    return l1_distance(a, b), safe_exp(consts.K * T) * d0
