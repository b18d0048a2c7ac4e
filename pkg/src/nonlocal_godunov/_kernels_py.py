"""Pure numpy implementations of the inner-loop kernels.

Same signatures and summation order as the compiled ``_kernels`` module, which
is preferred when it was built (see ``_backend``).
"""
import numpy as np
from numpy.polynomial import polynomial as P


def correlate_direct(x, gamma, offset):
    """``out[j] = sum_k gamma[k] * x[(j + k + offset) % M]``, summed in k order."""
    x = np.ascontiguousarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x.shape[0]
    for k, gk in enumerate(gamma):
        out += gk * np.roll(x, -((k + offset) % m))
    return out


def conservative_update(rho, flux, lam):
    """``rho[j] - lam * (flux[j] - flux[j-1])``; ``flux[j]`` sits at ``x_{j+1/2}``."""
    return rho - lam * (flux - np.roll(flux, 1))


def lxf_update(rho, f, lam, alpha):
    left = np.roll(rho, 1)
    right = np.roll(rho, -1)
    return (rho + 0.5 * lam * alpha * (left - 2.0 * rho + right)
            + 0.5 * lam * (np.roll(f, 1) - np.roll(f, -1)))


def entropy_residuals(rho, rho_next, vface, lam, kappa, g_coef):
    """Left-hand side of the discrete Kruzkov inequality for every (kappa, j).

    ``kappa`` has shape ``(K, M)`` so each cell may use its own entropy levels.
    """
    g = lambda u: P.polyval(u, g_coef)
    vleft = np.roll(vface, 1)
    rho_left = np.roll(rho, 1)
    fr = vface * (g(np.maximum(rho, kappa)) - g(np.minimum(rho, kappa)))
    fl = vleft * (g(np.maximum(rho_left, kappa)) - g(np.minimum(rho_left, kappa)))
    diff = rho_next - kappa
    return (np.abs(diff) - np.abs(rho - kappa) + lam * (fr - fl)
            + lam * np.sign(diff) * g(kappa) * (vface - vleft))


def entropy_residual_max(rho, rho_next, vface, lam, kappa, g_coef):
    """``(max residual, kappa row, cell)`` over a ``(K, M)`` kappa array."""
    r = entropy_residuals(rho, rho_next, vface, lam, kappa, g_coef)
    i = int(np.argmax(r))
    k, j = divmod(i, r.shape[1])
    return float(r[k, j]), k, j
