import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_godunov import _backend
from nonlocal_godunov._backend import fallback
from nonlocal_godunov.diagnostics import kappa_levels
from nonlocal_godunov.model import ModelSpec, VelocityFn

compiled = _backend.compiled
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")

arrays = st.integers(2, 300).flatmap(
    lambda m: st.lists(st.floats(0.0, 1.0), min_size=m, max_size=m).map(np.array))


@needs_compiled
@given(x=arrays, n=st.integers(1, 40), offset=st.integers(0, 3), seed=st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_correlate_parity(x, n, offset, seed):
    gamma = np.random.default_rng(seed).random(n)
    np.testing.assert_array_equal(compiled.correlate_direct(x, gamma, offset),
                                  fallback.correlate_direct(x, gamma, offset))


@needs_compiled
@given(rho=arrays, lam=st.floats(0.0, 1.0), alpha=st.floats(0.0, 2.0), seed=st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_update_parity(rho, lam, alpha, seed):
    flux = np.random.default_rng(seed).random(rho.shape[0])
    np.testing.assert_array_equal(compiled.conservative_update(rho, flux, lam),
                                  fallback.conservative_update(rho, flux, lam))
    np.testing.assert_allclose(compiled.lxf_update(rho, flux, lam, alpha),
                               fallback.lxf_update(rho, flux, lam, alpha), rtol=0, atol=1e-15)


@needs_compiled
@pytest.mark.parametrize("velocity", [VelocityFn(), VelocityFn("power", 5)])
def test_entropy_parity(rng, velocity):
    model = ModelSpec(velocity=velocity)
    for m in (3, 17, 128):
        rho, nxt, V = rng.random(m), rng.random(m), rng.random(m)
        kap = kappa_levels(model, rho, nxt)
        a = compiled.entropy_residual_max(rho, nxt, V, 0.4, kap, model.g.coef)
        b = fallback.entropy_residual_max(rho, nxt, V, 0.4, kap, model.g.coef)
        assert a[0] == pytest.approx(b[0], abs=1e-15)
        assert a[1:] == b[1:]


def test_pure_mode_selects_fallback():
    env = dict(os.environ, NONLOCAL_GODUNOV_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from nonlocal_godunov import _backend; print(_backend.HAVE_COMPILED, "
         "_backend.kernels.__name__)"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "nonlocal_godunov._kernels_py"]


def test_selected_backend_is_consistent():
    assert _backend.HAVE_COMPILED == (compiled is not None)
    assert _backend.kernels is (compiled if compiled is not None else fallback)
