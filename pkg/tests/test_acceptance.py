"""End-to-end acceptance criteria, one test and one printed PASS/FAIL line each.

Reference values are the expected L1 errors for the jam scenario; the
tolerances below are the pinned acceptance tolerances.
"""
import math
import time

import numpy as np
import pytest

from conftest import CONFIGS, random_kernel, random_model
from nonlocal_godunov import (Grid1D, GridState, KernelSpec, ModelSpec, PiecewiseConstant,
                              SchemeConfig, VelocityFn, convolve_velocity, godunov_flux, run)
from nonlocal_godunov import config as cfgmod
from nonlocal_godunov import diagnostics as dg
from nonlocal_godunov.experiments import convergence_table, local_limit
from nonlocal_godunov.grid import plateau
from nonlocal_godunov.kernel import quadrature_weights

pytestmark = pytest.mark.acceptance

LINEAR_GODUNOV = [9.38e-03, 6.97e-03, 4.29e-03, 3.00e-03, 1.96e-03]
LINEAR_LXF = [1.99e-02, 1.30e-02, 9.31e-03, 6.41e-03, 4.27e-03]
NONLINEAR_GODUNOV = [1.77e-02, 1.24e-02, 8.49e-03, 5.18e-03, 3.29e-03]
LOCAL_LIMIT = [4.46e-02, 6.85e-03, 9.90e-04, 1.60e-04]

GODUNOV_RTOL = 0.15
LXF_RTOL = 0.25
LOCAL_LIMIT_RTOL = 0.20
CONVERGENCE_BUDGET_S = 600
LOCAL_LIMIT_BUDGET_S = 900
PROPERTY_BUDGET_S = 30
EOC_RANGE = (0.3, 1.2)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number} ({title}): {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def linear_table():
    return convergence_table(cfgmod.load(CONFIGS / "linear_convergence.ini"))


@pytest.fixture(scope="module")
def nonlinear_table():
    return convergence_table(cfgmod.load(CONFIGS / "nonlinear_convergence.ini"))


def ratios(got, expected):
    return [g / e for g, e in zip(got, expected)]


def within(got, expected, rtol):
    return all(abs(r - 1) <= rtol for r in ratios(got, expected))


def fmt(values):
    return "[" + ", ".join(f"{v:.3f}" for v in values) + "]"


def test_criterion_1_linear_convergence(linear_table, report):
    res = linear_table
    god, lxf = res.errors("godunov")[:5], res.errors("lxf")[:5]
    ok_g = within(god, LINEAR_GODUNOV, GODUNOV_RTOL)
    ok_l = within(lxf, LINEAR_LXF, LXF_RTOL)
    ok_t = res.seconds <= CONVERGENCE_BUDGET_S
    ok = report(1, "linear velocity error table", ok_g and ok_l and ok_t and not res.violations,
                f"godunov/expected={fmt(ratios(god, LINEAR_GODUNOV))} "
                f"lxf/expected={fmt(ratios(lxf, LINEAR_LXF))} "
                f"runtime={res.seconds:.1f}s backend=fast reference h={res.reference_h:g}")
    assert ok


def test_criterion_2_nonlinear_convergence(nonlinear_table, report):
    res = nonlinear_table
    god = res.errors("godunov")[:5]
    ok = report(2, "nonlinear velocity error table",
                within(god, NONLINEAR_GODUNOV, GODUNOV_RTOL) and res.seconds <= CONVERGENCE_BUDGET_S
                and not res.violations,
                f"godunov/expected={fmt(ratios(god, NONLINEAR_GODUNOV))} "
                f"lxf n=0 error={res.errors('lxf')[0]:.3e} runtime={res.seconds:.1f}s")
    assert ok


def test_criterion_3_decay_and_order(linear_table, nonlinear_table, report):
    details, ok = [], True
    for name, res in (("linear", linear_table), ("nonlinear", nonlinear_table)):
        god, lxf = res.errors("godunov"), res.errors("lxf")
        dec = all(b < a for e in (god, lxf) for a, b in zip(e, e[1:]))
        better = all(g < l for g, l in zip(god, lxf))
        eocs = [e for s in ("godunov", "lxf") for e in res.eocs(s) if not math.isnan(e)]
        in_range = all(EOC_RANGE[0] <= e <= EOC_RANGE[1] for e in eocs)
        ok &= dec and better and in_range
        details.append(f"{name}: decreasing={dec} godunov<lxf={better} "
                       f"eoc in [{min(eocs):.2f}, {max(eocs):.2f}]")
    assert report(3, "monotone decay and order", ok, "; ".join(details))


def test_criterion_4_local_limit(report):
    cfg = cfgmod.load(CONFIGS / "local_limit.ini")
    t0 = time.perf_counter()
    res = local_limit(cfg)
    secs = time.perf_counter() - t0
    d = [dist for _, dist in res.rows]
    dec = all(b < a for a, b in zip(d, d[1:]))
    bad = {k: v for r in res.reports.values() for k, v in r.violations.items() if v}
    ok = report(4, "local limit", within(d, LOCAL_LIMIT, LOCAL_LIMIT_RTOL) and dec
                and secs <= LOCAL_LIMIT_BUDGET_S and not bad,
                f"distances={['%.3e' % x for x in d]} ratios={fmt(ratios(d, LOCAL_LIMIT))} "
                f"decreasing={dec} runtime={secs:.1f}s")
    assert ok


def _scenario(rng, variant):
    m = int(rng.integers(16, 513))
    g = Grid1D(1.0, m)
    model = random_model(rng, variant)
    k = quadrature_weights(random_kernel(rng, g.h, 32), g.h)
    lo, hi = sorted(rng.uniform(0, 1, 2))
    init = GridState(g, rng.uniform(lo, hi, m))
    return model, k, g, init


def test_criterion_5_property_suite(report):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    fails = []

    # mass, every scheme
    worst_mass = 0.0
    for scheme in ("godunov", "lxf", "godunov_local"):
        for variant in ("mean_velocity", "mean_density"):
            model, k, g, init = _scenario(rng, variant)
            state, _ = run(model, k, g, init, SchemeConfig(scheme), 0.1, checks=False)
            m0 = init.rho.sum()
            worst_mass = max(worst_mass, abs(state.rho.sum() - m0) / m0)
    if worst_mass > 1e-11:
        fails.append(f"mass drift {worst_mass:.2e}")

    # 50 randomized Godunov runs: max principle, flux sign, velocity range, TV growth
    counts = {}
    for i in range(50):
        model, k, g, init = _scenario(rng, ("mean_velocity", "mean_density")[i % 2])
        safety = float(rng.uniform(0.2, 1.0))
        _, rep = run(model, k, g, init, SchemeConfig(cfl_safety=safety), 0.1)
        for name, c in rep.violations.items():
            counts[name] = counts.get(name, 0) + c
    if counts:
        fails.append(f"invariant violations {counts}")

    # entropy inequality on 10 randomized runs
    worst_entropy = -math.inf
    for i in range(10):
        model, k, g, init = _scenario(rng, ("mean_velocity", "mean_density")[i % 2])
        _, rep = run(model, k, g, init, SchemeConfig(), 0.05, entropy_check=True)
        worst_entropy = max(worst_entropy, rep.entropy.max_residual)
    if worst_entropy > 1e-12:
        fails.append(f"entropy residual {worst_entropy:.2e}")

    # affine coincidence and backend agreement
    g = Grid1D(1.0, 256)
    k = quadrature_weights(KernelSpec("parabola", 0.125), g.h)
    a, _ = run(ModelSpec("mean_velocity"), k, g, plateau(), SchemeConfig(backend="direct"), 0.1)
    b, _ = run(ModelSpec("mean_density"), k, g, plateau(), SchemeConfig(backend="direct"), 0.1)
    coincide = float(np.max(np.abs(a.rho - b.rho)))
    if coincide > 1e-12:
        fails.append(f"affine variants differ by {coincide:.2e}")
    p5 = ModelSpec(velocity=VelocityFn("power", 5))
    c, _ = run(p5, k, g, plateau(), SchemeConfig(backend="fast"), 0.1)
    d, _ = run(p5, k, g, plateau(), SchemeConfig(backend="direct"), 0.1)
    backend_gap = float(np.max(np.abs(c.rho - d.rho)))
    if backend_gap > 1e-9:
        fails.append(f"fast vs direct {backend_gap:.2e}")

    # weight additivity and mass for every kernel family
    families = [KernelSpec("constant", 0.1), KernelSpec("parabola", 0.1),
                KernelSpec("polynomial", 0.1, coefficients=(20.0, -200.0))]
    for spec in families:
        for n in (1, 3, 10, 64):
            coarse = quadrature_weights(spec, 0.1 / n).gamma
            fine = quadrature_weights(spec, 0.1 / (2 * n)).gamma
            if (abs(coarse.sum() - spec.w0) > 4e-16 * n
                    or np.max(np.abs(fine[0::2] + fine[1::2] - coarse)) > 1e-15):
                fails.append(f"weights of {spec.family} at N={n}")

    # L1 stability on paired data
    pairs = [
        (ModelSpec(), KernelSpec("parabola", 0.1), plateau(), plateau(high=0.9), 0.05),
        (ModelSpec(), KernelSpec("parabola", 0.1), plateau(), plateau(high=0.9), 0.1),
        (p5, KernelSpec("constant", 0.1), plateau(), plateau(high=0.9), 0.05),
        (p5, KernelSpec("constant", 0.1), plateau(low=0.2, high=0.7),
         plateau(low=0.21, high=0.71), 0.1),
        (ModelSpec(velocity=VelocityFn("power", 2)), KernelSpec("parabola", 0.05),
         PiecewiseConstant([(0.0, 0.1), (0.25, 0.6), (0.5, 0.3)]),
         PiecewiseConstant([(0.0, 0.15), (0.3, 0.6), (0.55, 0.3)]), 0.1),
    ]
    worst_ratio = 0.0
    for model, spec, ia, ib, T in pairs:
        lhs, rhs = dg.lipschitz_stability_check(model, spec, Grid1D(1.0, 200), ia, ib, T)
        worst_ratio = max(worst_ratio, lhs / rhs)
    if worst_ratio > 1.05:
        fails.append(f"L1 stability lhs/rhs {worst_ratio:.3f}")

    secs = time.perf_counter() - t0
    if secs > PROPERTY_BUDGET_S:
        fails.append(f"runtime {secs:.1f}s")
    ok = report(5, "property suite", not fails,
                f"mass drift {worst_mass:.1e}, max entropy residual {worst_entropy:.1e}, "
                f"affine gap {coincide:.1e}, backend gap {backend_gap:.1e}, "
                f"worst lhs/rhs {worst_ratio:.2e}, runtime {secs:.1f}s"
                + (f"; failures: {fails}" if fails else ""))
    assert ok


def test_criterion_6_oracles(report):
    rng = np.random.default_rng(11)
    model = ModelSpec(velocity=VelocityFn("power", 3))
    worst_flux = 0.0
    for _ in range(100):
        rl, rr, V = rng.random(3)
        s = np.linspace(min(rl, rr), max(rl, rr), 10**4)
        vals = V * model.g(s)
        oracle = vals.min() if rl <= rr else vals.max()
        worst_flux = max(worst_flux, abs(float(godunov_flux(rl, V, model)) - oracle))

    worst_conv = 0.0
    for m, n in [(9, 4), (50, 7), (128, 128), (300, 30)]:
        g = Grid1D(1.0, m)
        k = quadrature_weights(KernelSpec("parabola", n / m), g.h)
        rho = rng.random(m)
        vr = 1 - rho**3
        literal = np.array([sum(k.gamma[i] * vr[(j + i + 1) % m] for i in range(n))
                            for j in range(m)])
        for backend in ("direct", "fast"):
            got = convolve_velocity(GridState(g, rho), model, k, backend)
            worst_conv = max(worst_conv, float(np.max(np.abs(got - literal))))
    ok = report(6, "oracle equivalence", worst_flux <= 1e-12 and worst_conv <= 1e-12,
                f"flux gap {worst_flux:.1e}, convolution gap {worst_conv:.1e}")
    assert ok
