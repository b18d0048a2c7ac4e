"""Command-line entry point ``nonlocal-lwr``.

Exit status: 0 on success, 2 for configuration errors, 3 when no admissible
time step exists, 4 when an enabled invariant check failed.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import config as cfgmod
from . import experiments as ex
from .errors import CflViolation, ConfigError, DegenerateModel, NonlocalError
from .grid import write_profile_csv
from .model import validate_hypotheses
from .plotting import profile_series, write_chart

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CFL = 3
EXIT_INVARIANT = 4

log = logging.getLogger("nonlocal_godunov")


def _load(args) -> cfgmod.RunConfig:
    cfg = cfgmod.load(args.config)
    scheme = cfg.scheme
    if args.backend is not None:
        scheme = replace(scheme, backend=args.backend)
    if args.cfl_safety is not None:
        scheme = cfgmod.with_field("scheme.cfl_safety", replace, scheme, cfl_safety=args.cfl_safety)
    if args.entropy_check:
        cfg = replace(cfg, output=replace(cfg.output, entropy_check=True))
    return replace(cfg, scheme=scheme)


def _require_hypotheses(cfg, scheme: str) -> None:
    """Godunov schemes need (H2); LxF runs only log violations."""
    rep = validate_hypotheses(cfg.model)
    if rep.ok:
        return
    msg = "; ".join(rep.violations())
    if scheme == "lxf":
        log.warning("model hypotheses violated (recorded for LxF): %s", msg)
        return
    raise ConfigError(f"model hypotheses violated: {msg}", field="model")


def _print_violations(violations: dict) -> None:
    for name, count in sorted(violations.items()):
        print(f"invariant check failed: {name} ({count} occurrences)")


def cmd_run(args) -> int:
    cfg = _load(args)
    _require_hypotheses(cfg, cfg.scheme.scheme)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    state, report = ex.single_run(cfg, entropy_check=cfg.output.entropy_check)
    state.to_csv(out / cfg.output.profile)
    if cfg.output.diagnostics:
        report.write_diagnostics_csv(out / cfg.output.diagnostics)
    if cfg.output.plot:
        write_chart(out / cfg.output.plot, [(cfg.scheme.scheme, state.grid.centers, state.rho)],
                    title=f"t = {state.time:g}", xlabel="x", ylabel="rho")
    print(f"scheme={report.scheme} cells={state.grid.n_cells} lambda={report.lam:.6g} "
          f"tau={report.tau:.6g} steps={report.steps}")
    t = report.timings
    print(f"timings: convolution={t['convolution']:.3f}s flux={t['flux']:.3f}s "
          f"update={t['update']:.3f}s")
    if report.entropy is not None:
        print(f"max entropy residual {report.entropy.max_residual:.3e} "
              f"at (step, cell, kappa)={report.entropy.argmax}")
    if not report.ok:
        _print_violations(report.violations)
        for m in report.messages:
            print(f"  {m}")
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _load(args)
    for s in cfg.convergence.schemes if cfg.convergence else ():
        _require_hypotheses(cfg, s)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = ex.convergence_table(cfg, threads=args.threads)
    ex.write_convergence_csv(res, out / "convergence.csv")
    ex.write_steps_csv(res, out / "convergence_steps.csv")
    write_chart(out / "convergence.svg",
                [(s, [r["h"] for r in res.rows if r["scheme"] == s], res.errors(s))
                 for s in cfg.convergence.schemes],
                title="L1 error", xlabel="h", ylabel="error", logx=True, logy=True)
    print(f"reference: {res.reference_scheme} h={res.reference_h!r} "
          f"lambda={res.reference_row['lam']:.6g}")
    print("n  h           scheme    l1_error     eoc")
    for r in res.rows:
        eoc = "" if math.isnan(r["eoc"]) else f"{r['eoc']:.3f}"
        print(f"{r['n']:<2} {r['h']:<11.6g} {r['scheme']:<9} {r['l1_error']:<12.4e} {eoc}")
    if res.violations:
        _print_violations(res.violations)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_compare_models(args) -> int:
    cfg = _load(args)
    _require_hypotheses(cfg, "godunov")
    if cfg.model.velocity.family == "affine":
        log.warning("affine velocity: both variants produce the same profile")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = ex.compare_models(cfg, threads=args.threads)
    for variant, state in res.states.items():
        state.to_csv(out / f"profile_{variant}.csv")
    with open(out / "compare_models.csv", "w") as fh:
        fh.write("variant,local_extrema,l1_distance\n")
        for variant in res.states:
            fh.write(f"{variant},{res.extrema[variant]},{res.l1_distance!r}\n")
    write_chart(out / "compare_models.svg", profile_series(res.states),
                title="mean velocity vs mean density", xlabel="x", ylabel="rho")
    for variant in res.states:
        print(f"{variant}: local extrema={res.extrema[variant]}")
    print(f"L1 distance {res.l1_distance:.4e}")
    bad = {f"{v}:{k}": c for v, r in res.reports.items() for k, c in r.violations.items() if c}
    if bad:
        _print_violations(bad)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_local_limit(args) -> int:
    cfg = _load(args)
    _require_hypotheses(cfg, "godunov")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = ex.local_limit(cfg, threads=args.threads)
    with open(out / "local_limit.csv", "w") as fh:
        fh.write("eta,l1_distance\n")
        for eta, d in res.rows:
            fh.write(f"{eta!r},{d!r}\n")
    write_profile_csv(out / "profile_local.csv", res.local.grid.centers, res.local.rho)
    series = [("local", res.local.grid.centers, res.local.rho)]
    series += [(f"eta={eta:g}", s.grid.centers, s.rho) for eta, s in res.states.items()]
    write_chart(out / "local_limit.svg", series, title="local limit", xlabel="x", ylabel="rho")
    for eta, d in res.rows:
        print(f"eta={eta:<8g} l1_distance={d:.4e}")
    bad = {f"{e}:{k}": c for e, r in res.reports.items() for k, c in r.violations.items() if c}
    if bad:
        _print_violations(bad)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    rep = validate_hypotheses(cfg.model)
    print(f"config ok: {args.config}")
    if rep.ok:
        print("hypotheses H1, H2 hold")
        return EXIT_OK
    for v in rep.violations():
        print(f"violation: {v}")
    if cfg.scheme.scheme == "lxf" and rep.h1_ok:
        print("LxF runs proceed; the violation is recorded only")
        return EXIT_OK
    return EXIT_INVARIANT


COMMANDS = {
    "run": (cmd_run, "single run; writes the final profile"),
    "convergence": (cmd_convergence, "L1 error table against a fine reference"),
    "compare-models": (cmd_compare_models, "mean-velocity vs mean-density profiles"),
    "local-limit": (cmd_local_limit, "distance to the local model as eta shrinks"),
    "validate": (cmd_validate, "check the config and the model hypotheses"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocal-lwr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment description (INI)")
        p.add_argument("--out-dir", default=".", help="directory for CSV/SVG outputs")
        p.add_argument("--threads", type=int, default=1, help="parallel runs in sweeps")
        p.add_argument("--entropy-check", action="store_true",
                       help="evaluate the discrete entropy inequality every step")
        p.add_argument("--backend", choices=("direct", "fast"), default=None)
        p.add_argument("--cfl-safety", type=float, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except (CflViolation, DegenerateModel) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CFL
    except (ConfigError, NonlocalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
