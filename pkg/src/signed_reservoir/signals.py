"""Input and training signals: Lorenz trajectories, the quadratic random-input
map, uniform drive for memory runs, and standardization.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .errors import DivergenceError, SpecError, ZeroVarianceError
from .seeding import rng


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly sampled real signal."""

    samples: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise SpecError("TimeSeries needs a non-empty 1-D sample array")
        if not self.step > 0:
            raise SpecError(f"step must be positive, got {self.step}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    def __getitem__(self, item):
        return self.samples[item]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "value"])
            for i, v in enumerate(self.samples):
                writer.writerow([i, repr(float(v))])

    @classmethod
    def from_csv(cls, path: str | Path, step: float = 1.0) -> "TimeSeries":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        return cls(np.array([float(r[1]) for r in rows]), step)


@dataclass(frozen=True)
class LorenzParams:
    c1: float = 10.0
    c2: float = 28.0
    c3: float = 8.0 / 3.0
    ts: float = 0.02
    init: tuple[float, float, float] = (1.0, 1.0, 1.0)
    n_steps: int = 12000
    # integration steps discarded before recording so data sits on the attractor
    pretransient: int = 5000

    def __post_init__(self):
        if not self.ts > 0:
            raise SpecError("ts must be positive")
        if self.n_steps <= 0:
            raise SpecError("n_steps must be positive")
        if self.pretransient < 0:
            raise SpecError("pretransient must be non-negative")
        if len(self.init) != 3:
            raise SpecError("init must be a 3-vector")


@dataclass(frozen=True)
class MapParams:
    n_steps: int = 12000
    y0: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_steps <= 0:
            raise SpecError("n_steps must be positive")


@numba.njit(cache=True)
def _lorenz_rhs(x, y, z, c1, c2, c3):
    return c1 * y - c1 * x, x * (c2 - z) - y, x * y - c3 * z


@numba.njit(cache=True)
def _lorenz_rk4(x, y, z, c1, c2, c3, h, n_skip, n_keep, out):
    # returns -1 on success, else the index of the first non-finite step
    total = n_skip + n_keep
    for n in range(total):
        k1x, k1y, k1z = _lorenz_rhs(x, y, z, c1, c2, c3)
        k2x, k2y, k2z = _lorenz_rhs(x + 0.5 * h * k1x, y + 0.5 * h * k1y, z + 0.5 * h * k1z, c1, c2, c3)
        k3x, k3y, k3z = _lorenz_rhs(x + 0.5 * h * k2x, y + 0.5 * h * k2y, z + 0.5 * h * k2z, c1, c2, c3)
        k4x, k4y, k4z = _lorenz_rhs(x + h * k3x, y + h * k3y, z + h * k3z, c1, c2, c3)
        x = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z = z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            return n
        if n >= n_skip:
            k = n - n_skip
            out[k, 0] = x
            out[k, 1] = y
            out[k, 2] = z
    return -1


def lorenz_generate(params: LorenzParams = LorenzParams()) -> tuple[TimeSeries, TimeSeries, TimeSeries]:
    """Integrate the Lorenz system with fixed-step RK4.

    The first ``params.pretransient`` steps are discarded; the returned
    series hold the next ``params.n_steps`` states, one per integration step.
    """
    out = np.empty((params.n_steps, 3))
    x0, y0, z0 = (float(v) for v in params.init)
    bad = _lorenz_rk4(x0, y0, z0, params.c1, params.c2, params.c3, params.ts,
                      params.pretransient, params.n_steps, out)
    if bad >= 0:
        raise DivergenceError(f"Lorenz integration diverged at step {bad}", step=int(bad))
    return tuple(TimeSeries(out[:, i].copy(), params.ts) for i in range(3))


def lorenz_init_from_seed(seed: int) -> tuple[float, float, float]:
    """Seed-derived initial condition for test trajectories."""
    g = rng(seed)
    return tuple(float(v) for v in g.uniform(-10.0, 10.0, 3) + np.array([0.0, 0.0, 25.0]))


def map_generate(params: MapParams = MapParams(), x: np.ndarray | None = None) -> tuple[TimeSeries, TimeSeries]:
    """Quadratic map driven by a random signal.

    ``x(k)`` is uniform on [0, 0.5] from the seeded generator unless an
    explicit drive ``x`` is given. ``y`` obeys
    ``y(k+1) = 0.3 y(k) + 0.05 y(k)^2 + 1.5 x(k)^2 + 0.1`` with ``y(0) = y0``.
    """
    if x is None:
        x = rng(params.rng_seed).uniform(0.0, 0.5, params.n_steps)
    else:
        x = np.asarray(x, dtype=float)
        if x.shape != (params.n_steps,):
            raise SpecError("explicit drive must have n_steps samples")
    y = np.empty(params.n_steps)
    yk = float(params.y0)
    for k in range(params.n_steps):
        y[k] = yk
        yk = 0.3 * yk + 0.05 * yk * yk + 1.5 * x[k] * x[k] + 0.1
    return TimeSeries(x), TimeSeries(y)


def standardize(s: TimeSeries | np.ndarray) -> TimeSeries:
    """Subtract the mean and scale to unit population standard deviation."""
    step = s.step if isinstance(s, TimeSeries) else 1.0
    v = np.asarray(s.samples if isinstance(s, TimeSeries) else s, dtype=float)
    if v.size < 2:
        raise ZeroVarianceError("need at least two samples to standardize")
    centered = v - v.mean()
    sd = centered.std()
    if sd == 0.0 or sd <= 1e-300:
        raise ZeroVarianceError("series has zero variance")
    out = centered / sd
    # one correction pass pulls mean/std to within rounding of 0 and 1
    out = out - out.mean()
    out = out / out.std()
    return TimeSeries(out, step)


def uniform_drive(n: int, seed: int) -> TimeSeries:
    """I.i.d. samples uniform on [-1, 1]."""
    if n <= 0:
        raise SpecError("n must be positive")
    return TimeSeries(rng(seed).uniform(-1.0, 1.0, n))
