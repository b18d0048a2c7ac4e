"""Small helpers for polynomial extrema on an interval."""
import numpy as np
from numpy.polynomial import Polynomial

DENSE_SAMPLES = 10_001


def critical_points(p: Polynomial, a: float, b: float) -> list:
    """Real roots of ``p'`` inside ``[a, b]``."""
    dp = p.deriv()
    if dp.degree() < 1:
        return []
    out = []
    for r in dp.roots():
        if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)) and a <= r.real <= b:
            out.append(float(r.real))
    return out


def sup_abs(p: Polynomial, a: float, b: float) -> float:
    """``max |p|`` on ``[a, b]``: endpoints, critical points, plus a dense sample."""
    x = np.concatenate([[a, b], critical_points(p, a, b), np.linspace(a, b, DENSE_SAMPLES)])
    return float(np.max(np.abs(p(x))))
