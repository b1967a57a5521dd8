"""Named grid-function generators and the seeded test-function family."""
from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .grid import Ball, Grid, ball_mask


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based stream ``index`` of the global ``seed`` (Philox)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def _point(grid: Grid, c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.shape != (grid.n,):
        raise ConfigurationError(f"center must have {grid.n} coordinates")
    return c


def bump(grid: Grid, center, width: float) -> np.ndarray:
    """Smooth bump ``exp(-1/(1 - |x-c|**2/width**2))`` supported in ``B(c, width)``."""
    if not width > 0:
        raise ConfigurationError("bump width must be positive")
    q = np.sum((grid.centers - _point(grid, center)) ** 2, axis=1) / width**2
    out = np.zeros(grid.size)
    inside = q < 1
    out[inside] = np.exp(1 - 1 / (1 - q[inside]))
    return out


def indicator(grid: Grid, center, radius: float) -> np.ndarray:
    return ball_mask(grid, Ball(tuple(_point(grid, center)), radius)).astype(float)


def interval_indicator(grid: Grid, a: float, b: float) -> np.ndarray:
    """``chi_[a,b]`` on the first coordinate (cell centers in the closed interval)."""
    x = grid.centers[:, 0]
    return ((x >= a) & (x <= b)).astype(float)


def random_bandlimited(grid: Grid, seed: int, cutoff: int = 4, index: int = 0) -> np.ndarray:
    """Random trigonometric polynomial with frequencies ``|k| <= cutoff`` on the box."""
    rng = rng_for(seed, index)
    ks = np.arange(-cutoff, cutoff + 1)
    freqs = np.stack(np.meshgrid(*([ks] * grid.n), indexing="ij"), axis=-1).reshape(-1, grid.n)
    amp = rng.standard_normal(len(freqs)) / (1 + np.sum(freqs**2, axis=1))
    phase = rng.uniform(0, 2 * np.pi, len(freqs))
    arg = np.pi / grid.L * grid.centers @ freqs.T + phase
    return np.cos(arg) @ amp


def log_abs(grid: Grid, center=None) -> np.ndarray:
    c = np.zeros(grid.n) if center is None else _point(grid, center)
    return 0.5 * np.log(np.sum((grid.centers - c) ** 2, axis=1))


def linear(grid: Grid, slope=1.0, offset: float = 0.0) -> np.ndarray:
    slope = np.broadcast_to(np.asarray(slope, dtype=float), (grid.n,))
    return grid.centers @ slope + offset


GENERATORS = {
    "bump": bump,
    "indicator": indicator,
    "random_bandlimited": random_bandlimited,
    "log_abs": log_abs,
    "linear": linear,
}


def make_function(grid: Grid, spec: dict) -> np.ndarray:
    """Build a grid function from ``{"kind": name, **params}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in GENERATORS:
        raise ConfigurationError(f"unknown function generator {kind!r}")
    try:
        return GENERATORS[kind](grid, **spec)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {kind}: {exc}") from None


def test_family(grid: Grid, seed: int, count: int = 50, support=None) -> list[np.ndarray]:
    """Deterministic mix of bumps, ball indicators and band-limited functions.

    ``support`` (a boolean cell mask) restricts every function to it.
    """
    out = []
    for k in range(count):
        rng = rng_for(seed, k)
        kind = k % 3
        c = rng.uniform(-0.7, 0.7, grid.n) * grid.L
        width = rng.uniform(0.05, 0.5) * grid.L
        if kind == 0:
            f = bump(grid, c, width)
        elif kind == 1:
            f = indicator(grid, c, width)
        else:
            f = random_bandlimited(grid, seed, cutoff=int(rng.integers(1, 6)), index=10_000 + k)
        if support is not None:
            f = np.where(support, f, 0.0)
        if not np.any(f):
            f = np.where(support, 1.0, 0.0) if support is not None else np.ones(grid.size)
        out.append(f)
    return out


test_family.__test__ = False  # not a pytest test
