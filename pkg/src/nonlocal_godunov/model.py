"""Velocity law, flux factor and the norm constants derived from them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from ._poly import sup_abs
from .errors import ConfigError, OutOfRange

VARIANTS = ("mean_velocity", "mean_density")
VELOCITY_FAMILIES = ("affine", "power", "polynomial")
FLUX_FAMILIES = ("identity", "polynomial")

RANGE_SLACK = 1e-12
N_HYPOTHESIS_SAMPLES = 1001


@dataclass(frozen=True)
class VelocityFn:
    """``affine``: ``1 - rho``; ``power``: ``1 - rho**exponent``; ``polynomial``: coefficients."""

    family: str = "affine"
    exponent: int = 1
    coefficients: tuple = ()

    def __post_init__(self):
        if self.family not in VELOCITY_FAMILIES:
            raise ConfigError(f"unknown velocity family {self.family!r}", field="model.velocity")
        if self.family == "power" and (int(self.exponent) != self.exponent or self.exponent < 1):
            raise ConfigError(f"exponent must be a positive integer, got {self.exponent!r}",
                              field="model.velocity_exponent")
        if self.family == "polynomial" and len(self.coefficients) == 0:
            raise ConfigError("polynomial velocity needs coefficients", field="model.velocity_coefficients")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "exponent", int(self.exponent))

    @property
    def polynomial(self) -> Polynomial:
        if self.family == "affine":
            return Polynomial([1.0, -1.0])
        if self.family == "power":
            coef = np.zeros(self.exponent + 1)
            coef[0], coef[-1] = 1.0, -1.0
            return Polynomial(coef)
        return Polynomial(self.coefficients)


@dataclass(frozen=True)
class FluxGFn:
    family: str = "identity"
    coefficients: tuple = ()

    def __post_init__(self):
        if self.family not in FLUX_FAMILIES:
            raise ConfigError(f"unknown flux family {self.family!r}", field="model.flux")
        if self.family == "polynomial" and len(self.coefficients) == 0:
            raise ConfigError("polynomial flux needs coefficients", field="model.flux_coefficients")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    @property
    def polynomial(self) -> Polynomial:
        if self.family == "identity":
            return Polynomial([0.0, 1.0])
        return Polynomial(self.coefficients)


@dataclass(frozen=True)
class ModelNorms:
    v_sup: float
    dv_sup: float
    g_sup: float
    dg_sup: float


@dataclass(frozen=True)
class ModelSpec:
    """Flux ``g(rho) * V`` where ``V`` averages ``v(rho)`` (mean velocity) or
    evaluates ``v`` at the averaged density (mean density)."""

    variant: str = "mean_velocity"
    velocity: VelocityFn = VelocityFn()
    flux_g: FluxGFn = FluxGFn()
    rho_max: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown model variant {self.variant!r}", field="model.variant")
        if not self.rho_max > 0:
            raise ConfigError(f"rho_max must be positive, got {self.rho_max}", field="model.rho_max")
        # polynomials are rebuilt on every property access otherwise
        object.__setattr__(self, "_v", self.velocity.polynomial)
        object.__setattr__(self, "_g", self.flux_g.polynomial)
        object.__setattr__(self, "_dv", self._v.deriv())
        object.__setattr__(self, "_dg", self._g.deriv())

    @property
    def v(self) -> Polynomial:
        return self._v

    @property
    def g(self) -> Polynomial:
        return self._g

    @property
    def dv(self) -> Polynomial:
        return self._dv

    @property
    def dg(self) -> Polynomial:
        return self._dg

    @property
    def local_flux(self) -> Polynomial:
        """``f(rho) = g(rho) v(rho)`` of the local LWR limit."""
        return self._g * self._v

    def clamp(self, rho):
        """Clamp to ``[0, rho_max]``; raise OutOfRange beyond a 1e-12 slack."""
        r = np.asarray(rho, dtype=float)
        if np.any(r < -RANGE_SLACK) or np.any(r > self.rho_max + RANGE_SLACK):
            raise OutOfRange(f"density outside [0, {self.rho_max}]: "
                             f"min={r.min()!r}, max={r.max()!r}")
        return np.clip(r, 0.0, self.rho_max)


def eval_v(model: ModelSpec, rho):
    return model.v(model.clamp(rho))


def eval_dv(model: ModelSpec, rho):
    return model.dv(model.clamp(rho))


def eval_g(model: ModelSpec, rho):
    return model.g(model.clamp(rho))


def eval_dg(model: ModelSpec, rho):
    return model.dg(model.clamp(rho))


def compute_norms(model: ModelSpec) -> ModelNorms:
    """Sup norms of ``v, v', g, g'`` on ``[0, rho_max]``."""
    rmax = model.rho_max
    vel = model.velocity
    if vel.family == "affine":
        v_sup, dv_sup = max(1.0, abs(1.0 - rmax)), 1.0
    elif vel.family == "power":
        p = vel.exponent
        v_sup, dv_sup = max(1.0, abs(1.0 - rmax**p)), p * rmax ** (p - 1)
    else:
        v_sup, dv_sup = sup_abs(model.v, 0.0, rmax), sup_abs(model.dv, 0.0, rmax)
    if model.flux_g.family == "identity":
        g_sup, dg_sup = rmax, 1.0
    else:
        g_sup, dg_sup = sup_abs(model.g, 0.0, rmax), sup_abs(model.dg, 0.0, rmax)
    return ModelNorms(float(v_sup), float(dv_sup), float(g_sup), float(dg_sup))


@dataclass(frozen=True)
class HypothesisReport:
    """First violating density per condition, ``None`` when satisfied."""

    v_negative: float | None
    v_increasing: float | None
    g_negative: float | None
    g_decreasing: float | None

    @property
    def h1_ok(self) -> bool:
        return self.v_negative is None and self.v_increasing is None and self.g_negative is None

    @property
    def h2_ok(self) -> bool:
        return self.h1_ok and self.g_decreasing is None

    @property
    def ok(self) -> bool:
        return self.h2_ok

    def violations(self) -> list:
        out = []
        for name, label in (("v_negative", "H1: v < 0"), ("v_increasing", "H1: v' > 0"),
                            ("g_negative", "H1: g < 0"), ("g_decreasing", "H2: g' < 0")):
            at = getattr(self, name)
            if at is not None:
                out.append(f"{label} at rho={at:.6g}")
        return out


def validate_hypotheses(model: ModelSpec, tol: float = 1e-12) -> HypothesisReport:
    rho = np.linspace(0.0, model.rho_max, N_HYPOTHESIS_SAMPLES)

    def first(mask):
        return float(rho[np.argmax(mask)]) if np.any(mask) else None

    return HypothesisReport(
        v_negative=first(model.v(rho) < -tol),
        v_increasing=first(model.dv(rho) > tol),
        g_negative=first(model.g(rho) < -tol),
        g_decreasing=first(model.dg(rho) < -tol),
    )
