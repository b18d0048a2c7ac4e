"""Time steppers for the non-local (and local) LWR models.

``godunov``
    flux ``V_{j+1/2} g(rho_j)`` with the downstream average taken over cells
    ``j+1 .. j+N``.
``lxf``
    central flux plus viscosity ``alpha``, cell-centered averages over
    cells ``j .. j+N-1``.
``godunov_local``
    classical Godunov scheme for ``f(rho) = g(rho) v(rho)``.
"""
from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as dg
from ._backend import kernels
from ._poly import critical_points, sup_abs
from .errors import CflViolation, ConfigError, DegenerateModel, KernelGridMismatch, NonUnimodalFlux
from .grid import Grid1D, GridState, project_initial, total_mass
from .kernel import DiscreteKernel
from .model import ModelSpec, compute_norms

SCHEMES = ("godunov", "lxf", "godunov_local")
BACKENDS = ("direct", "fast")
DEFAULT_LXF_COURANT = 1.0 / 3.0

CFL_RTOL = 1e-12
MAX_PRINCIPLE_SLACK = 1e-14
MASS_RTOL = 1e-11
ENTROPY_TOL = 1e-12
TV_SLACK = 1e-13


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme choice and time-step policy.

    ``lxf_courant`` bounds ``lambda * alpha`` for the LxF scheme; ``lxf_alpha``
    defaults to ``|v|_inf |g'|_inf``.
    """

    scheme: str = "godunov"
    cfl_safety: float = 1.0
    backend: str = "fast"
    lxf_alpha: float | None = None
    lxf_courant: float = DEFAULT_LXF_COURANT

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}",
                              field="scheme.name")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}", field="scheme.backend")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ConfigError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}",
                              field="scheme.cfl_safety")
        if self.lxf_alpha is not None and self.lxf_alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.lxf_alpha}", field="scheme.alpha")
        if not 0.0 < self.lxf_courant <= 1.0:
            raise ConfigError(f"lxf_courant must lie in (0, 1], got {self.lxf_courant}",
                              field="scheme.lxf_courant")


@dataclass(frozen=True)
class StepContext:
    model: ModelSpec
    kernel: DiscreteKernel | None
    lam: float
    tau: float
    backend: str = "fast"
    alpha: float | None = None


# -- time-step bounds -------------------------------------------------------

def cfl_lambda_godunov(model: ModelSpec, kernel: DiscreteKernel) -> float:
    """``1 / (gamma_0 |v'| |g| + |v| |g'|)``; ``inf`` when the denominator vanishes."""
    nm = compute_norms(model)
    denom = kernel.gamma0 * nm.dv_sup * nm.g_sup + nm.v_sup * nm.dg_sup
    return math.inf if denom == 0 else 1.0 / denom


def lxf_alpha(model: ModelSpec, config: SchemeConfig | None = None) -> float:
    if config is not None and config.lxf_alpha is not None:
        return float(config.lxf_alpha)
    nm = compute_norms(model)
    return nm.v_sup * nm.dg_sup


def cfl_lambda_lxf(model: ModelSpec, kernel: DiscreteKernel | None = None,
                   alpha: float | None = None, courant: float = DEFAULT_LXF_COURANT) -> float:
    a = lxf_alpha(model) if alpha is None else alpha
    return math.inf if a == 0 else courant / a


def cfl_lambda_local(model: ModelSpec) -> float:
    fmax = sup_abs(model.local_flux.deriv(), 0.0, model.rho_max)
    return math.inf if fmax == 0 else 1.0 / fmax


def scheme_lambda(model: ModelSpec, kernel: DiscreteKernel | None, config: SchemeConfig) -> float:
    """Unscaled stability bound on ``tau / h`` of the configured scheme."""
    if config.scheme == "godunov":
        return cfl_lambda_godunov(model, kernel)
    if config.scheme == "lxf":
        return cfl_lambda_lxf(model, kernel, lxf_alpha(model, config), config.lxf_courant)
    return cfl_lambda_local(model)


def comparison_lambda(model: ModelSpec, kernel: DiscreteKernel, config: SchemeConfig) -> float:
    """Shared ``tau / h`` when Godunov and LxF are compared on one scenario."""
    lam = min(cfl_lambda_godunov(model, kernel),
              cfl_lambda_lxf(model, kernel, lxf_alpha(model, config), config.lxf_courant))
    return config.cfl_safety * lam


# -- convolution --------------------------------------------------------------

def correlate(x: np.ndarray, kernel: DiscreteKernel, offset: int, backend: str = "fast") -> np.ndarray:
    """Periodic ``sum_k gamma_k x[j + k + offset]``."""
    if backend == "direct":
        return kernels.correlate_direct(x, kernel.gamma, offset)
    if backend == "fast":
        m = x.shape[0]
        return np.fft.irfft(kernel.spectrum(m, offset) * np.fft.rfft(x), n=m)
    raise ConfigError(f"unknown backend {backend!r}", field="scheme.backend")


def _check_kernel(grid: Grid1D, kernel: DiscreteKernel) -> None:
    if abs(kernel.h - grid.h) > 1e-9 * grid.h:
        raise KernelGridMismatch(f"kernel built for h={kernel.h!r}, grid has h={grid.h!r}")


def _velocity(rho, model: ModelSpec, kernel: DiscreteKernel, offset: int, backend: str):
    if model.variant == "mean_velocity":
        V = correlate(model.v(rho), kernel, offset, backend)
        if backend == "fast":
            # transform round-off only; the exact sum is a convex combination
            np.clip(V, 0.0, kernel.w0 * float(model.v(0.0)), out=V)
        return V
    R = correlate(rho, kernel, offset, backend)
    np.clip(R, 0.0, kernel.w0 * model.rho_max, out=R)
    return model.v(R)


def convolve_velocity(state: GridState, model: ModelSpec, kernel: DiscreteKernel,
                      backend: str = "fast") -> np.ndarray:
    """Interface velocities ``V_{j+1/2}`` from cells ``j+1 .. j+N``."""
    _check_kernel(state.grid, kernel)
    return _velocity(state.rho, model, kernel, 1, backend)


def cell_velocity(state: GridState, model: ModelSpec, kernel: DiscreteKernel,
                  backend: str = "fast") -> np.ndarray:
    """Cell velocities ``V_j`` from cells ``j .. j+N-1`` (LxF discretisation)."""
    _check_kernel(state.grid, kernel)
    return _velocity(state.rho, model, kernel, 0, backend)


# -- fluxes and steps -------------------------------------------------------

def godunov_flux(rho_left, V, model: ModelSpec):
    """Godunov flux of ``V g(.)`` for ``V >= 0`` and non-decreasing ``g``: ``V g(rho_left)``."""
    return V * model.g(rho_left)


def _require(lam: float, bound: float, name: str) -> None:
    if lam > bound * (1.0 + CFL_RTOL):
        raise CflViolation(f"lambda={lam!r} exceeds the {name} bound {bound!r}")


def _godunov_parts(state: GridState, ctx: StepContext):
    V = convolve_velocity(state, ctx.model, ctx.kernel, ctx.backend)
    flux = godunov_flux(state.rho, V, ctx.model)
    return V, flux, kernels.conservative_update(state.rho, flux, ctx.lam)


def step_godunov(state: GridState, ctx: StepContext) -> GridState:
    _require(ctx.lam, cfl_lambda_godunov(ctx.model, ctx.kernel), "Godunov CFL")
    _, _, rho = _godunov_parts(state, ctx)
    return GridState(state.grid, rho, state.time + ctx.tau)


def _lxf_alpha_of(ctx: StepContext) -> float:
    return lxf_alpha(ctx.model) if ctx.alpha is None else ctx.alpha


def step_lxf(state: GridState, ctx: StepContext) -> GridState:
    alpha = _lxf_alpha_of(ctx)
    _require(ctx.lam * alpha, 1.0, "LxF (lambda * alpha)")
    V = cell_velocity(state, ctx.model, ctx.kernel, ctx.backend)
    f = V * ctx.model.g(state.rho)
    rho = kernels.lxf_update(state.rho, f, ctx.lam, alpha)
    return GridState(state.grid, rho, state.time + ctx.tau)


def local_flux_peak(model: ModelSpec) -> float:
    """Location of the maximum of ``f = g v`` on ``[0, rho_max]``.

    Raise NonUnimodalFlux unless ``f'`` changes sign at most once, from + to -.
    """
    f = model.local_flux
    df = f.deriv()
    rho = np.linspace(0.0, model.rho_max, 1001)
    d = df(rho)
    scale = max(float(np.max(np.abs(d))), 1e-300)
    s = np.sign(np.where(np.abs(d) > 1e-12 * scale, d, 0.0))
    s = s[s != 0]
    changes = np.count_nonzero(s[1:] != s[:-1])
    if changes > 1 or (changes == 1 and s[0] < 0):
        raise NonUnimodalFlux("local flux g*v is not unimodal on [0, rho_max]")
    cand = [0.0, model.rho_max] + critical_points(f, 0.0, model.rho_max)
    return max(cand, key=lambda r: float(f(r)))


def local_godunov_flux(rho_l, rho_r, model: ModelSpec, peak: float | None = None):
    """Classical Godunov flux for a unimodal ``f``."""
    f = model.local_flux
    if peak is None:
        peak = local_flux_peak(model)
    rho_l = np.asarray(rho_l, dtype=float)
    rho_r = np.asarray(rho_r, dtype=float)
    fl, fr = f(rho_l), f(rho_r)
    fmax = np.where((rho_r <= peak) & (peak <= rho_l), float(f(peak)), np.maximum(fl, fr))
    return np.where(rho_l <= rho_r, np.minimum(fl, fr), fmax)


def step_local_godunov(state: GridState, ctx: StepContext, peak: float | None = None) -> GridState:
    _require(ctx.lam, cfl_lambda_local(ctx.model), "local Godunov CFL")
    flux = local_godunov_flux(state.rho, np.roll(state.rho, -1), ctx.model, peak)
    rho = kernels.conservative_update(state.rho, flux, ctx.lam)
    return GridState(state.grid, rho, state.time + ctx.tau)


# -- time loop ---------------------------------------------------------------

@dataclass
class RunReport:
    """Per-step diagnostics and invariant-check outcome of one run."""

    final: GridState
    scheme: str
    lam: float
    tau: float
    steps: int
    history: dict
    timings: dict
    violations: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)
    entropy: dg.EntropyResidualReport | None = None
    trace: list | None = None
    rows: list | None = None

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def flag(self, name: str, message: str) -> None:
        self.violations[name] = self.violations.get(name, 0) + 1
        if len(self.messages) < 20:
            self.messages.append(message)

    def write_diagnostics_csv(self, path) -> None:
        cols = ("step", "time", "mass", "tv", "min_rho", "max_rho", "max_entropy_residual")
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for i in range(len(self.history["step"])):
                row = []
                for c in cols:
                    val = self.history[c][i]
                    row.append(str(int(val)) if c == "step" else repr(float(val)))
                fh.write(",".join(row) + "\n")


def _record(hist, state, model, step, dt, jump, resid):
    rho = state.rho
    g = model.g(rho)
    hist["step"].append(step)
    hist["time"].append(state.time)
    hist["dt"].append(dt)
    hist["mass"].append(total_mass(state))
    hist["tv"].append(dg.total_variation(rho))
    hist["min_rho"].append(float(rho.min()))
    hist["max_rho"].append(float(rho.max()))
    hist["g_sup"].append(float(np.max(np.abs(g))))
    hist["g_l1"].append(state.h * float(np.sum(np.abs(g))))
    hist["time_jump"].append(jump)
    hist["max_entropy_residual"].append(resid)


def run(model: ModelSpec, kernel: DiscreteKernel | None, grid: Grid1D, init, config: SchemeConfig,
        T: float, *, lam: float | None = None, checks: bool = True, entropy_check: bool = False,
        keep_trace: bool = False):
    """Advance the projected initial data to time ``T`` exactly.

    The step is ``tau = lam * h`` with ``lam`` defaulting to
    ``cfl_safety`` times the scheme's bound; the last step is shortened to
    land on ``T``.  Returns ``(final_state, RunReport)``.  Invariant checks
    never raise; failures are counted in ``report.violations``.
    """
    if T < 0:
        raise ConfigError(f"final time must be >= 0, got {T}", field="run.T")
    if config.scheme != "godunov_local":
        if kernel is None:
            raise ConfigError("non-local schemes need a kernel", field="kernel")
        _check_kernel(grid, kernel)
    bound = scheme_lambda(model, kernel, config)
    if lam is None:
        lam = config.cfl_safety * bound
    if not math.isfinite(lam):
        raise DegenerateModel("no finite CFL bound; pass an explicit lambda")
    if config.scheme == "lxf":
        _require(lam * lxf_alpha(model, config), 1.0, "LxF (lambda * alpha)")
    else:
        _require(lam, bound, f"{config.scheme} CFL")

    h = grid.h
    tau = lam * h
    state = project_initial(init, grid) if not isinstance(init, GridState) else init.copy()
    t0 = state.time
    hist = {k: [] for k in ("step", "time", "dt", "mass", "tv", "min_rho", "max_rho", "g_sup",
                            "g_l1", "time_jump", "max_entropy_residual")}
    _record(hist, state, model, 0, 0.0, 0.0, math.nan)
    timings = {"convolution": 0.0, "flux": 0.0, "update": 0.0}
    report = RunReport(state, config.scheme, lam, tau, 0, hist, timings,
                       trace=[] if keep_trace else None)

    n_steps = 0 if T - t0 <= 0 else int(math.ceil((T - t0) / tau - 1e-9))
    godunov = config.scheme == "godunov"
    alpha = lxf_alpha(model, config)
    peak = local_flux_peak(model) if config.scheme == "godunov_local" else None
    c_bv = dg.bv_growth_constant(model, kernel) if godunov else 0.0
    v0 = float(model.v(0.0))
    worst_entropy = (-math.inf, (None, None, None), 0)

    for n in range(n_steps):
        dt = tau if n < n_steps - 1 else (T - t0) - (n_steps - 1) * tau
        lam_n = dt / h
        rho = state.rho
        c0 = _time.perf_counter()
        if config.scheme == "godunov_local":
            c1 = c0
            flux = local_godunov_flux(rho, np.roll(rho, -1), model, peak)
            c2 = _time.perf_counter()
            new = kernels.conservative_update(rho, flux, lam_n)
        elif godunov:
            V = _velocity(rho, model, kernel, 1, config.backend)
            c1 = _time.perf_counter()
            flux = godunov_flux(rho, V, model)
            c2 = _time.perf_counter()
            new = kernels.conservative_update(rho, flux, lam_n)
        else:
            V = _velocity(rho, model, kernel, 0, config.backend)
            c1 = _time.perf_counter()
            flux = V * model.g(rho)
            c2 = _time.perf_counter()
            new = kernels.lxf_update(rho, flux, lam_n, alpha)
        c3 = _time.perf_counter()
        timings["convolution"] += c1 - c0
        timings["flux"] += c2 - c1
        timings["update"] += c3 - c2

        resid = math.nan
        if godunov and entropy_check:
            resid, j, kap, cnt = dg.step_entropy_residual(rho, new, V, lam_n, model)
            if resid > worst_entropy[0]:
                worst_entropy = (resid, (n, j, kap), worst_entropy[2] + cnt)
            else:
                worst_entropy = (worst_entropy[0], worst_entropy[1], worst_entropy[2] + cnt)
            if checks and resid > ENTROPY_TOL:
                report.flag("entropy", f"step {n}: entropy residual {resid:.3e} at cell {j}")
        if keep_trace:
            report.trace.append((rho, V if config.scheme != "godunov_local" else flux, new, lam_n))

        new_state = GridState(grid, new, t0 + (n + 1) * tau if n < n_steps - 1 else T)
        _record(hist, new_state, model, n + 1, dt, h * float(np.sum(np.abs(new - rho))), resid)

        if checks and godunov:
            if new.min() < rho.min() - MAX_PRINCIPLE_SLACK or new.max() > rho.max() + MAX_PRINCIPLE_SLACK:
                report.flag("max_principle", f"step {n}: range [{new.min()!r}, {new.max()!r}] "
                            f"leaves [{rho.min()!r}, {rho.max()!r}]")
            if flux.min() < 0.0:
                report.flag("negative_flux", f"step {n}: flux {flux.min()!r} < 0")
            if V.min() < 0.0 or V.max() > v0 * (1.0 + 1e-14):
                report.flag("velocity_bounds", f"step {n}: V outside [0, v(0)]")
            tv_old, tv_new = hist["tv"][-2], hist["tv"][-1]
            if tv_new > (1.0 + dt * c_bv) * tv_old + TV_SLACK:
                report.flag("tv_growth", f"step {n}: TV {tv_new!r} > (1 + tau C) {tv_old!r}")
        state = new_state

    report.final = state
    report.steps = n_steps
    if godunov and entropy_check:
        report.entropy = dg.EntropyResidualReport(*worst_entropy)
    if checks:
        m0, m1 = hist["mass"][0], hist["mass"][-1]
        if abs(m1 - m0) > MASS_RTOL * max(abs(m0), 1e-300):
            report.flag("mass", f"mass drifted from {m0!r} to {m1!r}")
        if godunov and hist["tv"][-1] > dg.safe_exp(c_bv * (state.time - t0)) * hist["tv"][0] + TV_SLACK:
            report.flag("tv_bound", "final TV exceeds exp(C T) TV(rho_0)")
    return state, report
