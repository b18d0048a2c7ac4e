"""Look-ahead kernels and their cell-integrated weights.

A kernel ``w`` lives on ``[0, eta]``, is non-negative, non-increasing and has
total mass ``w0``.  The schemes never evaluate ``w`` pointwise; they use the
exact cell integrals ``gamma_k = int_{kh}^{(k+1)h} w(y) dy``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from ._poly import sup_abs
from .errors import InvalidKernel, NonDivisibleEta

KERNEL_FAMILIES = ("constant", "parabola", "polynomial")

# relative tolerance on eta/h being an integer
DIVISIBILITY_RTOL = 1e-9
# number of samples for the monotonicity / sign checks
N_CHECK_SAMPLES = 1001


@dataclass(frozen=True)
class KernelSpec:
    """Continuous kernel description.

    ``family`` is one of ``constant`` (``w0/eta``), ``parabola``
    (``3 w0 (eta^2 - x^2) / (2 eta^3)``) or ``polynomial``; for the last one
    ``coefficients`` holds the ascending monomial coefficients in ``x``.
    """

    family: str
    eta: float
    w0: float = 1.0
    coefficients: tuple = ()

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise InvalidKernel(f"unknown kernel family {self.family!r}")
        if not self.eta > 0:
            raise InvalidKernel(f"eta must be positive, got {self.eta}")
        if not self.w0 > 0:
            raise InvalidKernel(f"w0 must be positive, got {self.w0}")
        if self.family == "polynomial":
            if len(self.coefficients) == 0:
                raise InvalidKernel("polynomial kernel needs coefficients")
            object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    @property
    def polynomial(self) -> Polynomial:
        eta, w0 = self.eta, self.w0
        if self.family == "constant":
            return Polynomial([w0 / eta])
        if self.family == "parabola":
            return Polynomial([1.5 * w0 / eta, 0.0, -1.5 * w0 / eta**3])
        return Polynomial(self.coefficients)

    def __call__(self, x):
        return self.polynomial(x)

    @property
    def w_at_zero(self) -> float:
        return float(self.polynomial(0.0))

    @property
    def dw_sup(self) -> float:
        """Sup norm of ``w'`` on ``[0, eta]``."""
        if self.family == "constant":
            return 0.0
        if self.family == "parabola":
            # |w'(x)| = 3 w0 x / eta^3, largest at x = eta
            return 3.0 * self.w0 / self.eta**2
        return sup_abs(self.polynomial.deriv(), 0.0, self.eta)

    def total_mass(self) -> float:
        p = self.polynomial.integ()
        return float(p(self.eta) - p(0.0))

    def validate(self) -> None:
        """Check non-negativity, monotonicity and unit mass; raise InvalidKernel."""
        x = np.linspace(0.0, self.eta, N_CHECK_SAMPLES)
        w = self.polynomial(x)
        scale = max(abs(self.w_at_zero), self.w0 / self.eta)
        if np.any(w < -1e-12 * scale):
            bad = x[np.argmax(w < -1e-12 * scale)]
            raise InvalidKernel(f"kernel is negative at x={bad:.6g}")
        dw = self.polynomial.deriv()(x)
        if np.any(dw > 1e-12 * scale / self.eta):
            bad = x[np.argmax(dw > 1e-12 * scale / self.eta)]
            raise InvalidKernel(f"kernel is increasing at x={bad:.6g}")
        mass = self.total_mass()
        if abs(mass - self.w0) > 1e-12 * self.w0:
            raise InvalidKernel(f"kernel mass {mass!r} differs from w0={self.w0!r}")


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Cell weights ``gamma_0 .. gamma_{N-1}`` for a grid of width ``h``."""

    n_cells: int
    gamma: np.ndarray
    h: float
    w_at_zero: float
    spec: KernelSpec
    _spectra: dict = field(default_factory=dict, repr=False)

    @property
    def gamma0(self) -> float:
        return float(self.gamma[0])

    @property
    def w0(self) -> float:
        return self.spec.w0

    def spectrum(self, n: int, offset: int) -> np.ndarray:
        """Real FFT of the weights scattered onto a periodic grid of ``n`` cells.

        Entry ``(k + offset) mod n`` carries ``gamma_k``, so that
        ``irfft(conj(spectrum) * rfft(x))`` is ``sum_k gamma_k x[j + k + offset]``.
        """
        key = (n, offset)
        spec = self._spectra.get(key)
        if spec is None:
            scattered = np.zeros(n)
            idx = (np.arange(self.n_cells) + offset) % n
            np.add.at(scattered, idx, self.gamma)
            spec = np.conj(np.fft.rfft(scattered))
            self._spectra[key] = spec
        return spec


def support_cells(eta: float, h: float) -> int:
    """Number of cells ``N = eta / h``; raise NonDivisibleEta unless integral."""
    if not h > 0:
        raise NonDivisibleEta(f"cell width must be positive, got {h}", field="grid.h")
    ratio = eta / h
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > DIVISIBILITY_RTOL * ratio:
        raise NonDivisibleEta(
            f"kernel.eta={eta!r} is not an integer multiple of grid.h={h!r} (ratio {ratio!r})",
            field="kernel.eta/grid.h",
        )
    return n


def quadrature_weights(spec: KernelSpec, h: float) -> DiscreteKernel:
    """Exact cell integrals of the kernel, renormalised to sum to ``w0``."""
    spec.validate()
    n = support_cells(spec.eta, h)
    k = np.arange(n, dtype=float)
    if spec.family == "constant":
        gamma = np.full(n, spec.w0 / n)
    elif spec.family == "parabola":
        # int_{kh}^{(k+1)h} 3(eta^2 - y^2)/(2 eta^3) dy with eta = N h
        gamma = spec.w0 * (3.0 * n * n - (3.0 * k * k + 3.0 * k + 1.0)) / (2.0 * float(n) ** 3)
    else:
        anti = spec.polynomial.integ()
        edges = np.arange(n + 1, dtype=float) * (spec.eta / n)
        vals = anti(edges)
        gamma = np.diff(vals)
    if np.any(gamma < 0):
        raise InvalidKernel(f"negative weight gamma_{int(np.argmin(gamma))}={gamma.min()!r}")
    gamma = gamma * (spec.w0 / gamma.sum())
    gamma.setflags(write=False)
    return DiscreteKernel(n_cells=n, gamma=gamma, h=float(h), w_at_zero=spec.w_at_zero, spec=spec)


def lxf_point_weights(spec: KernelSpec, h: float) -> np.ndarray:
    """Point samples ``w(k h)``, ``k = 0 .. N-1`` (left Riemann weights)."""
    spec.validate()
    n = support_cells(spec.eta, h)
    return spec.polynomial(np.arange(n) * (spec.eta / n))

