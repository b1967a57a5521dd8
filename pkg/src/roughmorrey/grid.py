"""Uniform grids on a truncated box, balls, ball families and circle quadrature.

All functions in the package live on the cell centers of a :class:`Grid`.
Centers sit at ``(k + 1/2) h - L`` along each axis, so the origin is never a
sample point and power weights or homogeneous kernels never get evaluated at
their singularity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError

# Relative slack of the open-ball test: cells whose squared distance is within
# this fraction of r**2 count as lying on the sphere and are excluded.
BALL_RTOL = 1e-10

UNIT_BALL_VOLUME = {1: 2.0, 2: math.pi}
SPHERE_MEASURE = {1: 2.0, 2: 2.0 * math.pi}


def lebesgue_ball_measure(n, r):
    """Return ``v_n r**n`` with ``v_1 = 2`` and ``v_2 = pi``."""
    if n not in UNIT_BALL_VOLUME:
        raise DomainError(f"dimension must be 1 or 2, got {n}")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("ball radius must be positive")
    out = UNIT_BALL_VOLUME[n] * r**n
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on ``[-L, L]^n``."""

    n: int
    L: float
    h: float

    @cached_property
    def cells_per_axis(self) -> int:
        return int(round(2 * self.L / self.h))

    @property
    def size(self) -> int:
        return self.cells_per_axis**self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @cached_property
    def index(self) -> np.ndarray:
        """Integer multi-index of every cell, shape ``(size, n)``, C order."""
        m = self.cells_per_axis
        axes = np.meshgrid(*([np.arange(m)] * self.n), indexing="ij")
        idx = np.stack([a.ravel() for a in axes], axis=1)
        idx.flags.writeable = False
        return idx

    @cached_property
    def centers(self) -> np.ndarray:
        """Cell centers, shape ``(size, n)``."""
        c = (self.index + 0.5) * self.h - self.L
        c.flags.writeable = False
        return c

    def contains(self, point) -> bool:
        """True when ``point`` lies in the closed box ``[-L, L]^n``."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        return bool(np.all(np.abs(point) <= self.L))

    def nearest_cell(self, point) -> int:
        """Flat index of the cell whose center is closest to ``point``."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        k = np.clip(np.floor((point + self.L) / self.h), 0, self.cells_per_axis - 1)
        return int(np.ravel_multi_index(k.astype(int), (self.cells_per_axis,) * self.n))

    def coordinate(self, axis: int = 0) -> np.ndarray:
        return self.centers[:, axis]


def make_grid(n: int, L: float, h: float) -> Grid:
    """Build a grid with ``(2L/h)**n`` cells.

    Raises :class:`ConfigurationError` unless ``n`` is 1 or 2, ``0 < h < L``
    and ``2L/h`` is an even integer.
    """
    if n not in (1, 2):
        raise ConfigurationError(f"dimension must be 1 or 2, got {n}")
    if not (L > 0 and h > 0):
        raise ConfigurationError("half-width L and spacing h must be positive")
    if h >= L:
        raise ConfigurationError(f"spacing h={h} must be smaller than half-width L={L}")
    ratio = 2 * L / h
    m = int(round(ratio))
    if abs(ratio - m) > 1e-9 * max(1.0, ratio) or m % 2:
        raise ConfigurationError(f"2L/h = {ratio:g} must be an even integer")
    return Grid(int(n), float(L), float(h))


@dataclass(frozen=True)
class Ball:
    """Open ball ``B(center, radius)``."""

    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))

    def doubled(self, factor: float = 2.0) -> "Ball":
        return Ball(self.center, factor * self.radius)


def _sq_dist(grid: Grid, point) -> np.ndarray:
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.shape != (grid.n,):
        raise DomainError(f"point must have {grid.n} coordinates")
    return np.sum((grid.centers - point) ** 2, axis=1)


def ball_cells(grid: Grid, ball: Ball) -> np.ndarray:
    """Flat indices of cells whose center lies strictly inside ``ball``."""
    d2 = _sq_dist(grid, ball.center)
    return np.flatnonzero(d2 < ball.radius**2 * (1 - BALL_RTOL))


def ball_mask(grid: Grid, ball: Ball) -> np.ndarray:
    d2 = _sq_dist(grid, ball.center)
    return d2 < ball.radius**2 * (1 - BALL_RTOL)


def discrete_measure(grid: Grid, cells) -> float:
    return len(cells) * grid.cell_volume


def dyadic_radii(grid: Grid, r_min: float | None = None, r_max: float | None = None) -> np.ndarray:
    """``{h, 2h, 4h, ...}`` up to ``2L`` (or the given bounds)."""
    r = grid.h if r_min is None else float(r_min)
    top = 2 * grid.L if r_max is None else float(r_max)
    out = []
    while r <= top * (1 + 1e-12):
        out.append(r)
        r *= 2
    return np.array(out)


class BallFamily:
    """All balls ``B(c, r)`` for ``c`` in ``centers`` and ``r`` in ``radii``.

    Ball quantities are indexed ``[i, j]`` with ``i`` the center and ``j`` the
    radius.  Cells are sorted by distance from each center once; every ball of
    that center is then a prefix of the sorted order, so ball sums for all
    radii come from a single cumulative sum.
    """

    def __init__(self, grid: Grid, centers, radii):
        centers = np.asarray(centers, dtype=float)
        if centers.ndim == 1:
            centers = centers.reshape(-1, grid.n) if grid.n > 1 else centers[:, None]
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        if centers.shape[0] == 0 or radii.size == 0:
            raise ConfigurationError("ball family must be nonempty")
        if centers.shape[1] != grid.n:
            raise ConfigurationError("center dimension does not match the grid")
        if np.any(radii <= 0):
            raise ConfigurationError("radii must be positive")
        if np.any(np.diff(radii) <= 0):
            raise ConfigurationError("radii must be strictly increasing")
        self.grid = grid
        self.centers = centers
        self.radii = radii
        self._order = None
        self._sorted_d2 = None

    def __repr__(self):
        return f"BallFamily({len(self.centers)} centers x {len(self.radii)} radii)"

    @property
    def shape(self):
        return (len(self.centers), len(self.radii))

    def _sort(self):
        if self._order is None:
            d2 = np.sum((self.grid.centers[None, :, :] - self.centers[:, None, :]) ** 2, axis=2)
            order = np.argsort(d2, axis=1, kind="stable")
            self._order = order
            self._sorted_d2 = np.take_along_axis(d2, order, axis=1)
        return self._order, self._sorted_d2

    @property
    def order(self) -> np.ndarray:
        return self._sort()[0]

    @cached_property
    def counts(self) -> np.ndarray:
        """Number of cells in each ball, shape ``(k, m)``."""
        _, sd2 = self._sort()
        bounds = self.radii**2 * (1 - BALL_RTOL)
        return np.stack([np.searchsorted(row, bounds, side="left") for row in sd2])

    @property
    def measures(self) -> np.ndarray:
        """Discrete Lebesgue measure ``count * h**n`` of each ball."""
        return self.counts * self.grid.cell_volume

    def with_radii(self, radii) -> "BallFamily":
        """Same centers, new radii; reuses the distance sort."""
        fam = BallFamily(self.grid, self.centers, radii)
        fam._order, fam._sorted_d2 = self._sort()
        return fam

    def ball_sums(self, values) -> np.ndarray:
        """``sum_{cells in B} values`` for every ball (no cell-volume factor)."""
        values = np.asarray(values, dtype=float)
        order, _ = self._sort()
        cum = np.concatenate([np.zeros((order.shape[0], 1)), np.cumsum(values[order], axis=1)], axis=1)
        return np.take_along_axis(cum, self.counts, axis=1)

    def ball_mins(self, values) -> np.ndarray:
        """Minimum of ``values`` over every ball; ``inf`` for empty balls."""
        values = np.asarray(values, dtype=float)
        order, _ = self._sort()
        run = np.concatenate(
            [np.full((order.shape[0], 1), np.inf), np.minimum.accumulate(values[order], axis=1)], axis=1
        )
        return np.take_along_axis(run, self.counts, axis=1)

    def cells(self, i: int, j: int) -> np.ndarray:
        return self.order[i, : self.counts[i, j]]

    def ball(self, i: int, j: int) -> Ball:
        return Ball(tuple(self.centers[i]), float(self.radii[j]))

    def inside_box(self, scale: float = 1.0) -> np.ndarray:
        """Mask of balls whose dilate ``B(c, scale r)`` lies in the closed box."""
        reach = np.max(np.abs(self.centers), axis=1)[:, None] + scale * self.radii[None, :]
        return reach <= self.grid.L * (1 + 1e-12)

    def __iter__(self):
        for i in range(len(self.centers)):
            for j in range(len(self.radii)):
                yield i, j


def dyadic_family(grid: Grid, stride: int = 1, radii=None, r_max: float | None = None) -> BallFamily:
    """Family centered at every ``stride``-th cell center along each axis."""
    if stride < 1:
        raise ConfigurationError("center stride must be >= 1")
    m = grid.cells_per_axis
    keep = np.arange(stride // 2, m, stride)
    mask = np.all(np.isin(grid.index, keep), axis=1)
    centers = grid.centers[mask]
    if radii is None:
        radii = dyadic_radii(grid, r_max=r_max)
    return BallFamily(grid, centers, radii)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes on the unit sphere with weights summing to its surface measure."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> float:
        return SPHERE_MEASURE[self.n]

    def nearest(self, points) -> np.ndarray:
        """Index of the node nearest to the direction ``x/|x|`` of each point."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None] if self.n == 1 else points[None, :]
        if np.any(np.all(points == 0, axis=1)):
            raise DomainError("direction of the zero vector is undefined")
        if self.n == 1:
            return (points[:, 0] > 0).astype(int)
        theta = np.arctan2(points[:, 1], points[:, 0])
        step = 2 * np.pi / self.size
        return np.rint(theta / step).astype(int) % self.size


def sphere_quadrature(n: int, N: int = 256) -> SphereQuadrature:
    """``S^0 = {-1, +1}`` with unit weights, or ``N`` equispaced angles on the circle."""
    if n == 1:
        return SphereQuadrature(1, np.array([[-1.0], [1.0]]), np.array([1.0, 1.0]))
    if n == 2:
        if N < 2:
            raise ConfigurationError("circle quadrature needs at least 2 nodes")
        theta = 2 * np.pi * np.arange(N) / N
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return SphereQuadrature(2, nodes, np.full(N, 2 * np.pi / N))
    raise ConfigurationError(f"dimension must be 1 or 2, got {n}")
