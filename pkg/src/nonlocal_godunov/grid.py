"""Periodic finite-volume grid, initial-data projection and state snapshots.

Cell ``j`` covers ``[(j - 1/2) h, (j + 1/2) h)`` and has its center at ``j h``;
the periodic domain is therefore ``[-h/2, L - h/2)``.  Grids whose widths
differ by an integer factor share the coarse cell centers, which is what
:func:`nonlocal_godunov.diagnostics.l1_error` samples at.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError

GRID_RTOL = 1e-9


@dataclass(frozen=True)
class Grid1D:
    length: float
    n_cells: int

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigError(f"length must be positive, got {self.length}", field="grid.length")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ConfigError(f"n_cells must be a positive integer, got {self.n_cells}", field="grid.h")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @classmethod
    def from_h(cls, length: float, h: float) -> "Grid1D":
        if not h > 0:
            raise ConfigError(f"cell width must be positive, got {h}", field="grid.h")
        ratio = length / h
        m = int(round(ratio))
        if m < 1 or abs(ratio - m) > GRID_RTOL * ratio:
            raise ConfigError(f"grid.length={length!r} is not an integer multiple of grid.h={h!r}",
                              field="grid.h")
        return cls(length, m)

    @property
    def h(self) -> float:
        return self.length / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return np.arange(self.n_cells) * self.h

    @property
    def interfaces(self) -> np.ndarray:
        """Right interfaces ``x_{j+1/2}``."""
        return (np.arange(self.n_cells) + 0.5) * self.h

    def neighbor(self, j: int, k: int) -> int:
        return (j + k) % self.n_cells


@dataclass
class GridState:
    grid: Grid1D
    rho: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        if self.rho.shape != (self.grid.n_cells,):
            raise ValueError(f"rho has shape {self.rho.shape}, expected ({self.grid.n_cells},)")
        if not np.all(np.isfinite(self.rho)):
            raise ValueError("rho contains non-finite entries")

    @property
    def h(self) -> float:
        return self.grid.h

    def copy(self) -> "GridState":
        return GridState(self.grid, self.rho.copy(), self.time)

    def to_csv(self, path) -> None:
        write_profile_csv(path, self.grid.centers, self.rho)


def write_profile_csv(path, x, rho) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "rho"])
        for xi, ri in zip(x, rho):
            w.writerow([repr(float(xi)), repr(float(ri))])


def read_profile_csv(path) -> tuple:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def total_mass(state: GridState) -> float:
    return float(np.sum(state.rho)) * state.h


# -- initial data -----------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseConstant:
    """Periodic step function.

    ``breakpoints`` is a sequence of ``(position, value)``: ``value`` holds
    from ``position`` up to the next breakpoint; the last value wraps around
    to the first breakpoint.  Positions are taken modulo the domain length.
    """

    breakpoints: tuple

    def __post_init__(self):
        bps = tuple((float(p), float(v)) for p, v in self.breakpoints)
        if not bps:
            raise ConfigError("need at least one breakpoint", field="initial.breakpoints")
        pos = [p for p, _ in bps]
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ConfigError("breakpoints must be strictly increasing", field="initial.breakpoints")
        object.__setattr__(self, "breakpoints", bps)

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls(((0.0, value),))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.breakpoints])

    def __call__(self, x):
        pos = np.array([p for p, _ in self.breakpoints])
        vals = self.values
        idx = np.searchsorted(pos, np.asarray(x, dtype=float), side="right") - 1
        # left of the first breakpoint belongs to the wrapped last piece
        return vals[idx]


@dataclass(frozen=True)
class Profile:
    """Arbitrary profile ``func(x)`` averaged by a composite midpoint rule."""

    func: Callable = field(compare=False)
    subpoints: int = 64
    name: str = "profile"

    @classmethod
    def from_table(cls, x, rho, length: float) -> "Profile":
        x = np.asarray(x, dtype=float)
        rho = np.asarray(rho, dtype=float)
        return cls(lambda s: np.interp(s, x, rho, period=length), name="table")


def plateau(low: float = 1.0 / 3.0, high: float = 1.0, start: float = 1.0 / 3.0,
            end: float = 2.0 / 3.0) -> PiecewiseConstant:
    """``high`` on ``[start, end]`` and ``low`` elsewhere (a single traffic jam)."""
    return PiecewiseConstant(((0.0, low), (start, high), (end, low)))


def project_initial(data, grid: Grid1D) -> GridState:
    """Cell averages of the initial datum at ``t = 0``."""
    if isinstance(data, PiecewiseConstant):
        rho = _project_piecewise(data, grid)
    elif isinstance(data, Profile):
        rho = _project_profile(data, grid)
    else:
        raise TypeError(f"unsupported initial data {type(data).__name__}")
    return GridState(grid, rho, 0.0)


def _project_piecewise(data: PiecewiseConstant, grid: Grid1D) -> np.ndarray:
    L, h, m = grid.length, grid.h, grid.n_cells
    pos = np.array([p for p, _ in data.breakpoints]) % L
    if np.any(pos[:-1] > pos[1:]):
        raise ConfigError("breakpoints must lie inside [0, L)", field="initial.breakpoints")

    def value(x):
        return data(np.mod(x, L))

    rho = value(grid.centers).astype(float)
    # breakpoints strictly inside a cell split that cell
    split = {}
    for p in pos:
        s = p / h + 0.5            # cell coordinate; cell j spans [j, j+1)
        j = int(np.floor(s))
        t = s - j
        if t <= 0.0:
            continue               # on an interface: no split
        split.setdefault(j % m, []).append(t)
    for j, ts in split.items():
        ts = sorted(ts)
        edges = [0.0] + ts + [1.0]
        a = (j - 0.5) * h
        acc = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi > lo:
                acc += (hi - lo) * float(value(a + 0.5 * (lo + hi) * h))
        rho[j] = acc
    return rho


def _project_profile(data: Profile, grid: Grid1D) -> np.ndarray:
    h, m, q = grid.h, grid.n_cells, int(data.subpoints)
    offsets = (np.arange(q) + 0.5) / q - 0.5
    x = (np.arange(m)[:, None] + offsets[None, :]) * h
    vals = np.asarray(data.func(np.mod(x, grid.length)), dtype=float)
    return vals.mean(axis=1)
