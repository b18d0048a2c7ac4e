"""Experiment description files.

A config is an INI document with one section per component::

    [model]      variant, velocity, velocity_exponent, velocity_coefficients,
                 flux, flux_coefficients, rho_max
    [kernel]     family, eta, w0, coefficients
    [grid]       length, h
    [initial]    kind (piecewise | constant | table), breakpoints, value, path
    [scheme]     name, cfl_safety, backend, alpha, lxf_courant
    [run]        T
    [output]     profile, diagnostics, plot, entropy_check
    [convergence] h_base, levels, reference_level, reference_scheme, schemes
    [local_limit] etas

Numbers may be written as fractions (``1/3``).  Breakpoints are
``position:value`` pairs separated by commas.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .grid import Grid1D, PiecewiseConstant, Profile, read_profile_csv
from .kernel import KernelSpec, support_cells
from .model import FluxGFn, ModelSpec, VelocityFn
from .scheme import DEFAULT_LXF_COURANT, SchemeConfig


def parse_number(text: str, fld: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}", field=fld) from None


def parse_list(text: str, fld: str) -> tuple:
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    return tuple(parse_number(s, fld) for s in items)


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_list(xs) -> str:
    return ", ".join(_fmt(x) for x in xs)


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "piecewise"
    breakpoints: tuple = ((0.0, 1.0 / 3.0), (1.0 / 3.0, 1.0), (2.0 / 3.0, 1.0 / 3.0))
    value: float | None = None
    path: str | None = None

    def build(self, length: float, base_dir: Path | None = None):
        if self.kind == "piecewise":
            return PiecewiseConstant(self.breakpoints)
        if self.kind == "constant":
            return PiecewiseConstant.constant(self.value)
        p = Path(self.path)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        x, rho = read_profile_csv(p)
        return Profile.from_table(x, rho, length)


@dataclass(frozen=True)
class OutputSpec:
    profile: str = "profile.csv"
    diagnostics: str | None = None
    plot: str | None = None
    entropy_check: bool = False


@dataclass(frozen=True)
class ConvergenceSpec:
    h_base: float = 0.02
    levels: tuple = (0, 1, 2, 3, 4, 5, 6)
    reference_level: int = 9
    reference_scheme: str = "lxf"
    schemes: tuple = ("godunov", "lxf")

    def h(self, level: int) -> float:
        return self.h_base * 2.0 ** (-level)


@dataclass(frozen=True)
class LocalLimitSpec:
    etas: tuple = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec = ModelSpec()
    kernel: KernelSpec = KernelSpec("parabola", 0.1)
    length: float = 1.0
    h: float = 0.01
    initial: InitialSpec = InitialSpec()
    scheme: SchemeConfig = SchemeConfig()
    T: float = 0.1
    output: OutputSpec = OutputSpec()
    convergence: ConvergenceSpec | None = None
    local_limit: LocalLimitSpec | None = None
    base_dir: Path | None = field(default=None, compare=False)

    def grid(self, h: float | None = None) -> Grid1D:
        return Grid1D.from_h(self.length, self.h if h is None else h)

    def initial_data(self):
        return self.initial.build(self.length, self.base_dir)

    def with_kernel(self, **changes) -> "RunConfig":
        return replace(self, kernel=replace(self.kernel, **changes))

    def validate(self) -> None:
        """Cross-field checks that single components cannot do themselves."""
        with_field("kernel", self.kernel.validate)
        self.grid()
        support_cells(self.kernel.eta, self.h)
        if self.T < 0:
            raise ConfigError(f"must be >= 0, got {self.T}", field="run.T")
        if self.initial.kind == "piecewise":
            for p, v in self.initial.breakpoints:
                if not 0 <= p < self.length:
                    raise ConfigError(f"position {p} outside [0, {self.length})",
                                      field="initial.breakpoints")
                if not 0 <= v <= self.model.rho_max:
                    raise ConfigError(f"value {v} outside [0, {self.model.rho_max}]",
                                      field="initial.breakpoints")
        if self.initial.kind == "constant" and not 0 <= self.initial.value <= self.model.rho_max:
            raise ConfigError(f"value {self.initial.value} outside [0, rho_max]", field="initial.value")
        if self.convergence is not None:
            c = self.convergence
            for lvl in c.levels:
                if lvl > c.reference_level:
                    raise ConfigError(f"level {lvl} is finer than the reference level",
                                      field="convergence.levels")
                support_cells(self.kernel.eta, c.h(lvl))
                Grid1D.from_h(self.length, c.h(lvl))
            support_cells(self.kernel.eta, c.h(c.reference_level))
            Grid1D.from_h(self.length, c.h(c.reference_level))
        if self.local_limit is not None:
            for eta in self.local_limit.etas:
                support_cells(eta, self.h)


# -- parsing ---------------------------------------------------------------

class _Section:
    def __init__(self, parser, name):
        self.name = name
        self.data = parser[name] if parser.has_section(name) else {}

    def has(self, key):
        return key in self.data and str(self.data[key]).strip() != ""

    def str(self, key, default=None):
        if not self.has(key):
            if default is None:
                raise ConfigError("missing required key", field=f"{self.name}.{key}")
            return default
        return str(self.data[key]).strip()

    def num(self, key, default=None):
        if not self.has(key):
            if default is None:
                raise ConfigError("missing required key", field=f"{self.name}.{key}")
            return default
        return parse_number(self.data[key], f"{self.name}.{key}")

    def opt_num(self, key):
        return parse_number(self.data[key], f"{self.name}.{key}") if self.has(key) else None

    def nums(self, key, default=()):
        return parse_list(self.data[key], f"{self.name}.{key}") if self.has(key) else default

    def boolean(self, key, default=False):
        if not self.has(key):
            return default
        val = str(self.data[key]).strip().lower()
        if val in ("1", "true", "yes", "on"):
            return True
        if val in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {val!r}", field=f"{self.name}.{key}")


def _parse_breakpoints(text: str) -> tuple:
    out = []
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(f"expected position:value, got {item!r}", field="initial.breakpoints")
        p, v = item.split(":", 1)
        out.append((parse_number(p, "initial.breakpoints"), parse_number(v, "initial.breakpoints")))
    return tuple(out)


def with_field(fld, fn, *args, **kwargs):
    """Re-raise component errors with the config field attached."""
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), field=fld) from None


def loads(text: str, base_dir: Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    m = _Section(parser, "model")
    vel = with_field("model.velocity", VelocityFn, m.str("velocity", "affine"),
                int(m.num("velocity_exponent", 1)), m.nums("velocity_coefficients"))
    flux = with_field("model.flux", FluxGFn, m.str("flux", "identity"), m.nums("flux_coefficients"))
    model = with_field("model", ModelSpec, m.str("variant", "mean_velocity"), vel, flux, m.num("rho_max", 1.0))

    k = _Section(parser, "kernel")
    kernel = with_field("kernel", KernelSpec, k.str("family"), k.num("eta"), k.num("w0", 1.0),
                   k.nums("coefficients"))

    g = _Section(parser, "grid")
    length, h = g.num("length", 1.0), g.num("h")

    i = _Section(parser, "initial")
    kind = i.str("kind", "piecewise")
    if kind == "piecewise":
        initial = InitialSpec(kind, _parse_breakpoints(i.str("breakpoints")))
        with_field("initial.breakpoints", PiecewiseConstant, initial.breakpoints)
    elif kind == "constant":
        initial = InitialSpec(kind, (), i.num("value"))
    elif kind == "table":
        initial = InitialSpec(kind, (), None, i.str("path"))
    else:
        raise ConfigError(f"unknown kind {kind!r}", field="initial.kind")

    s = _Section(parser, "scheme")
    scheme = with_field("scheme", SchemeConfig, s.str("name", "godunov"), s.num("cfl_safety", 1.0),
                   s.str("backend", "fast"), s.opt_num("alpha"),
                   s.num("lxf_courant", DEFAULT_LXF_COURANT))

    T = _Section(parser, "run").num("T")

    o = _Section(parser, "output")
    output = OutputSpec(o.str("profile", "profile.csv"), o.str("diagnostics", "") or None,
                        o.str("plot", "") or None, o.boolean("entropy_check"))

    conv = None
    if parser.has_section("convergence"):
        c = _Section(parser, "convergence")
        levels = tuple(int(x) for x in c.nums("levels", (0, 1, 2, 3, 4, 5, 6)))
        schemes = tuple(x.strip() for x in c.str("schemes", "godunov, lxf").split(",") if x.strip())
        conv = ConvergenceSpec(c.num("h_base", 0.02), levels, int(c.num("reference_level", 9)),
                               c.str("reference_scheme", "lxf"), schemes)
        for sch in schemes + (conv.reference_scheme,):
            with_field("convergence.schemes", SchemeConfig, sch)

    local = None
    if parser.has_section("local_limit"):
        local = LocalLimitSpec(_Section(parser, "local_limit").nums("etas", (1e-1, 1e-2, 1e-3, 1e-4)))

    cfg = RunConfig(model, kernel, length, h, initial, scheme, T, output, conv, local, base_dir)
    cfg.validate()
    return cfg


def load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return loads(text, base_dir=path.parent)


def dumps(cfg: RunConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    mdl = cfg.model
    model = {"variant": mdl.variant, "velocity": mdl.velocity.family}
    if mdl.velocity.family == "power":
        model["velocity_exponent"] = str(mdl.velocity.exponent)
    if mdl.velocity.family == "polynomial":
        model["velocity_coefficients"] = _fmt_list(mdl.velocity.coefficients)
    model["flux"] = mdl.flux_g.family
    if mdl.flux_g.family == "polynomial":
        model["flux_coefficients"] = _fmt_list(mdl.flux_g.coefficients)
    model["rho_max"] = _fmt(mdl.rho_max)
    parser["model"] = model

    kernel = {"family": cfg.kernel.family, "eta": _fmt(cfg.kernel.eta), "w0": _fmt(cfg.kernel.w0)}
    if cfg.kernel.family == "polynomial":
        kernel["coefficients"] = _fmt_list(cfg.kernel.coefficients)
    parser["kernel"] = kernel
    parser["grid"] = {"length": _fmt(cfg.length), "h": _fmt(cfg.h)}

    ini = cfg.initial
    initial = {"kind": ini.kind}
    if ini.kind == "piecewise":
        initial["breakpoints"] = ", ".join(f"{_fmt(p)}:{_fmt(v)}" for p, v in ini.breakpoints)
    elif ini.kind == "constant":
        initial["value"] = _fmt(ini.value)
    else:
        initial["path"] = ini.path
    parser["initial"] = initial

    sc = cfg.scheme
    scheme = {"name": sc.scheme, "cfl_safety": _fmt(sc.cfl_safety), "backend": sc.backend,
              "lxf_courant": _fmt(sc.lxf_courant)}
    if sc.lxf_alpha is not None:
        scheme["alpha"] = _fmt(sc.lxf_alpha)
    parser["scheme"] = scheme
    parser["run"] = {"T": _fmt(cfg.T)}

    out = {"profile": cfg.output.profile, "entropy_check": str(cfg.output.entropy_check).lower()}
    if cfg.output.diagnostics:
        out["diagnostics"] = cfg.output.diagnostics
    if cfg.output.plot:
        out["plot"] = cfg.output.plot
    parser["output"] = out

    if cfg.convergence is not None:
        c = cfg.convergence
        parser["convergence"] = {
            "h_base": _fmt(c.h_base),
            "levels": ", ".join(str(int(x)) for x in c.levels),
            "reference_level": str(int(c.reference_level)),
            "reference_scheme": c.reference_scheme,
            "schemes": ", ".join(c.schemes),
        }
    if cfg.local_limit is not None:
        parser["local_limit"] = {"etas": _fmt_list(cfg.local_limit.etas)}

    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
