"""Time the compiled inner loops against the numpy fallback.

    python3 benchmarks/bench_kernels.py --cells 3200 25600 --support 0.1

Also times the FFT correlation used by the ``fast`` backend, for reference.
"""
import argparse
import timeit

import numpy as np

from nonlocal_godunov import KernelSpec, ModelSpec
from nonlocal_godunov._backend import compiled, fallback
from nonlocal_godunov.diagnostics import kappa_levels
from nonlocal_godunov.kernel import quadrature_weights
from nonlocal_godunov.scheme import correlate


def best_of(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.Timer(fn).repeat(repeat=repeat, number=n)) / n


def cases(m, eta, rng):
    kernel = quadrature_weights(KernelSpec("parabola", eta), 1.0 / m)
    rho = rng.random(m)
    flux = rng.random(m)
    nxt = rng.random(m)
    model = ModelSpec()
    kap = kappa_levels(model, rho, nxt)
    coef = model.g.coef
    return {
        "correlate_direct": lambda mod: mod.correlate_direct(rho, kernel.gamma, 1),
        "conservative_update": lambda mod: mod.conservative_update(rho, flux, 0.5),
        "lxf_update": lambda mod: mod.lxf_update(rho, flux, 0.3, 1.0),
        "entropy_residual_max": lambda mod: mod.entropy_residual_max(rho, nxt, flux, 0.5, kap, coef),
    }, (lambda: correlate(rho, kernel, 1, "fast")), kernel.n_cells


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, nargs="+", default=[800, 3200, 25600])
    ap.add_argument("--support", type=float, default=0.1, help="kernel support on a unit domain")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled extension not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22} {'M':>6} {'N':>5} {'compiled':>12} {'numpy':>12} {'speedup':>8}")
    for m in args.cells:
        table, fft, n = cases(m, args.support, rng)
        for name, call in table.items():
            t_py = best_of(lambda: call(fallback), args.repeat)
            if compiled is not None:
                t_c = best_of(lambda: call(compiled), args.repeat)
                print(f"{name:<22} {m:>6} {n:>5} {t_c * 1e3:>10.3f}ms {t_py * 1e3:>10.3f}ms "
                      f"{t_py / t_c:>7.1f}x")
            else:
                print(f"{name:<22} {m:>6} {n:>5} {'-':>12} {t_py * 1e3:>10.3f}ms {'-':>8}")
        t_fft = best_of(fft, args.repeat)
        print(f"{'correlate (fft)':<22} {m:>6} {n:>5} {t_fft * 1e3:>10.3f}ms")


if __name__ == "__main__":
    main()
