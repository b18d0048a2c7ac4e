from pathlib import Path

import numpy as np
import pytest

from nonlocal_godunov import KernelSpec, ModelSpec, VelocityFn, plateau

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
DATA = ROOT / "tests" / "data"


@pytest.fixture
def linear_model():
    return ModelSpec()


@pytest.fixture
def power5_model():
    return ModelSpec(velocity=VelocityFn("power", 5))


@pytest.fixture
def jam():
    return plateau()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_model(rng, variant="mean_velocity"):
    """Random model satisfying the hypotheses: decreasing v >= 0, increasing g >= 0."""
    if rng.random() < 0.5:
        vel = VelocityFn("power", int(rng.integers(1, 6)))
    else:
        a = rng.uniform(0.1, 1.0)
        vel = VelocityFn("polynomial", coefficients=(1.0, -a, a - 1.0))  # 1 - a r - (1-a) r^2
    return ModelSpec(variant=variant, velocity=vel)


def random_kernel(rng, h, max_cells=8):
    n = int(rng.integers(1, max_cells + 1))
    family = ("constant", "parabola")[int(rng.integers(0, 2))]
    return KernelSpec(family, n * h)
