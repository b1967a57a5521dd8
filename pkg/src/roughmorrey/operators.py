"""Maximal, singular and Marcinkiewicz operators as dense grid sums.

Every operator is evaluated directly: for a block of target cells the index
differences to all source cells are formed and the kernel is read from a
table precomputed on the difference lattice.  Sources outside the box are
zero.  Distances are compared in units of ``h`` with integer arithmetic, so
ball membership is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, KernelError, PreconditionError
from .grid import BALL_RTOL, Grid
from .kernels import SphereKernel, cancellation_defect, constant_kernel, lip_gamma_seminorm

KINDS = (
    "maximal",
    "rough_maximal",
    "singular",
    "singular_commutator",
    "maximal_commutator",
    "marcinkiewicz",
    "marcinkiewicz_commutator",
)
CANCELLING = ("singular", "singular_commutator", "marcinkiewicz", "marcinkiewicz_commutator")
COMMUTATORS = ("singular_commutator", "maximal_commutator", "marcinkiewicz_commutator")
DEFECT_TOL = 1e-10

# Upper bound on target-by-source entries held in memory at once.
_BLOCK_ENTRIES = 1 << 21


class _Lattice:
    """Kernel tables on the difference lattice ``{-(m-1), ..., m-1}^n``."""

    def __init__(self, grid: Grid):
        self.grid = grid
        m = grid.cells_per_axis
        self.m = m
        self.side = 2 * m - 1
        axes = np.meshgrid(*([np.arange(-(m - 1), m)] * grid.n), indexing="ij")
        self.delta = np.stack([a.ravel() for a in axes], axis=1)  # integer offsets
        self.d2 = np.sum(self.delta**2, axis=1)  # squared distance in units of h**2
        self.origin = int(np.flatnonzero(self.d2 == 0)[0])
        self._shells = {}

    def shell_table(self, bounds: np.ndarray) -> np.ndarray:
        """Index ``k`` with ``bounds[k-1] <= d2 < bounds[k]`` for every offset."""
        key = tuple(bounds)
        if key not in self._shells:
            self._shells = {key: np.searchsorted(bounds, self.d2, side="right")}
        return self._shells[key]

    def kernel_table(self, kernel: SphereKernel | None, power: int) -> np.ndarray:
        """``Omega(delta) / |delta h|**power`` with 0 at the origin."""
        out = np.zeros(len(self.d2))
        nz = self.d2 > 0
        omega = 1.0 if kernel is None else kernel(self.delta[nz].astype(float))
        out[nz] = omega / (np.sqrt(self.d2[nz]) * self.grid.h) ** power
        return out

    def flat(self, targets: np.ndarray) -> np.ndarray:
        """Difference-lattice indices for ``targets x all cells``."""
        idx = self.grid.index
        diff = idx[targets][:, None, :] - idx[None, :, :] + (self.m - 1)
        out = diff[..., 0]
        for a in range(1, self.grid.n):
            out = out * self.side + diff[..., a]
        return out

    def blocks(self, targets: np.ndarray):
        step = max(1, _BLOCK_ENTRIES // self.grid.size)
        for start in range(0, len(targets), step):
            tgt = targets[start:start + step]
            yield start, tgt, self.flat(tgt)


_LATTICES: dict = {}


def _lattice(grid: Grid) -> _Lattice:
    key = (grid.n, grid.L, grid.h)
    if key not in _LATTICES:
        _LATTICES.clear()  # keep one lattice; grids rarely alternate
        _LATTICES[key] = _Lattice(grid)
    return _LATTICES[key]


def _targets(grid: Grid, targets) -> np.ndarray:
    if targets is None:
        return np.arange(grid.size)
    return np.atleast_1d(np.asarray(targets, dtype=int))


def _radius_bounds(grid: Grid, radii) -> np.ndarray:
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if radii.size == 0:
        raise ConfigurationError("radius set must be nonempty")
    return (radii / grid.h) ** 2 * (1 - BALL_RTOL)


def lattice_ball_count(n: int, bound: float) -> int:
    """Number of integer vectors ``k`` in ``Z^n`` with ``|k|**2 < bound``.

    This is the discrete measure (in cells) of a ball centered at a cell on
    the unbounded lattice; functions vanish off the box, balls do not.
    """
    if bound <= 0:
        return 0
    r = int(np.floor(np.sqrt(bound))) + 1
    k = np.arange(-r, r + 1)
    if n == 1:
        return int(np.sum(k**2 < bound))
    return int(np.sum(k[:, None] ** 2 + k[None, :] ** 2 < bound))


def default_radii(grid: Grid) -> np.ndarray:
    """Dyadic radii ``h, 2h, ...`` up to the box diameter."""
    top = 2 * grid.L * np.sqrt(grid.n)
    k = int(np.ceil(np.log2(top / grid.h)))
    return grid.h * 2.0 ** np.arange(k + 1)


def _averaged_sup(grid, f, radii, targets, weight_table=None, b=None, exclude_center=False):
    """``max_t count(B(x,t))**-1 sum_{B(x,t)} a(x,y) |f(y)|`` over the radius set.

    ``count`` is the lattice count of the whole ball, including cells beyond
    the box where ``f`` is zero.
    """
    lat = _lattice(grid)
    tg = _targets(grid, targets)
    af = np.abs(np.asarray(f, dtype=float))
    b = None if b is None else np.asarray(b, dtype=float)
    bounds = np.sort(_radius_bounds(grid, radii))
    counts = [lattice_ball_count(grid.n, bd) for bd in bounds]
    shells = lat.shell_table(bounds)
    out = np.zeros(len(tg))
    for start, tgt, flat in lat.blocks(tg):
        vals = np.broadcast_to(af, flat.shape)
        if weight_table is not None:
            vals = vals * np.abs(weight_table[flat])
        elif exclude_center:
            vals = np.where(flat == lat.origin, 0.0, vals)
        if b is not None:
            vals = vals * np.abs(b[tgt][:, None] - b[None, :])
        # shell k holds cells with bounds[k-1] <= d2 < bounds[k]; one pass bins them all
        shell = shells[flat]
        nb = len(bounds) + 1
        rows = np.arange(len(tgt))[:, None] * nb
        binned = np.bincount((rows + shell).ravel(), weights=vals.ravel(), minlength=len(tgt) * nb)
        sums = np.cumsum(binned.reshape(len(tgt), nb), axis=1)[:, :-1]
        avgs = [sums[:, k] / cnt for k, cnt in enumerate(counts) if cnt > 0]
        out[start:start + len(tgt)] = np.max(avgs, axis=0) if avgs else 0.0
    return out


def maximal(f, grid: Grid, radii=None, targets=None, exclude_center: bool = False) -> np.ndarray:
    """Centered Hardy-Littlewood maximal function over a radius set.

    ``exclude_center`` drops the ``y = x`` cell from the sum (the count is
    unchanged), matching the convention of :func:`rough_maximal`.
    """
    radii = default_radii(grid) if radii is None else radii
    return _averaged_sup(grid, f, radii, targets, exclude_center=exclude_center)


def rough_maximal(kernel: SphereKernel, f, grid: Grid, radii=None, targets=None) -> np.ndarray:
    """``max_t |B(x,t)|**-1 sum_{B(x,t), y != x} |Omega(x-y)| |f(y)| h**n``."""
    radii = default_radii(grid) if radii is None else radii
    table = _lattice(grid).kernel_table(kernel, 0)
    return _averaged_sup(grid, f, radii, targets, weight_table=table)


def maximal_commutator(b, kernel: SphereKernel, f, grid: Grid, radii=None, targets=None) -> np.ndarray:
    """``max_t |B(x,t)|**-1 sum |b(x)-b(y)| |Omega(x-y)| |f(y)| h**n``."""
    radii = default_radii(grid) if radii is None else radii
    table = _lattice(grid).kernel_table(kernel, 0)
    return _averaged_sup(grid, f, radii, targets, weight_table=table, b=b)


def require_cancellation(kernel: SphereKernel) -> float:
    defect = cancellation_defect(kernel)
    if defect > DEFECT_TOL:
        raise KernelError(f"kernel {kernel.name!r} is not mean-zero on the sphere (defect {defect:.3e})", defect)
    return defect


def singular(kernel: SphereKernel, f, grid: Grid, targets=None, check: bool = True) -> np.ndarray:
    """``sum_{y != x} Omega(x-y) / |x-y|**n f(y) h**n``."""
    if check:
        require_cancellation(kernel)
    lat = _lattice(grid)
    table = lat.kernel_table(kernel, grid.n) * grid.cell_volume
    f = np.asarray(f, dtype=float)
    tg = _targets(grid, targets)
    out = np.zeros(len(tg))
    for start, tgt, flat in lat.blocks(tg):
        out[start:start + len(tgt)] = table[flat] @ f
    return out


def singular_commutator(b, kernel: SphereKernel, f, grid: Grid, targets=None, form: str = "kernel") -> np.ndarray:
    """``[b, T]f``; ``form`` is ``"kernel"`` (difference inside the sum) or ``"algebraic"``."""
    require_cancellation(kernel)
    b = np.asarray(b, dtype=float)
    f = np.asarray(f, dtype=float)
    tg = _targets(grid, targets)
    if form == "algebraic":
        return b[tg] * singular(kernel, f, grid, tg, check=False) - singular(kernel, b * f, grid, tg, check=False)
    if form != "kernel":
        raise ConfigurationError(f"unknown commutator form {form!r}")
    lat = _lattice(grid)
    table = lat.kernel_table(kernel, grid.n) * grid.cell_volume
    out = np.zeros(len(tg))
    for start, tgt, flat in lat.blocks(tg):
        out[start:start + len(tgt)] = ((b[tgt][:, None] - b[None, :]) * table[flat]) @ f
    return out


def default_t_grid(grid: Grid, exact: bool = False) -> np.ndarray:
    """Dyadic ``h * 2**k`` up to the box diameter, or every lattice distance."""
    if exact:
        d2 = np.unique(_lattice(grid).d2)
        return np.sqrt(d2[d2 > 0]) * grid.h
    return default_radii(grid)


def _marcinkiewicz(kernel, f, grid, t_grid, targets, b=None):
    t = np.atleast_1d(np.asarray(default_t_grid(grid) if t_grid is None else t_grid, dtype=float))
    if t.size == 0:
        raise ConfigurationError("t-grid must be nonempty")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise ConfigurationError("t-grid must be positive and strictly increasing")
    # exact integral of dt/t**3 over [t_k, t_{k+1}); the last cell runs to infinity
    upper = np.append(t[1:] ** -2.0, 0.0)
    dmeasure = (t**-2.0 - upper) / 2
    lat = _lattice(grid)
    table = lat.kernel_table(kernel, grid.n - 1) * grid.cell_volume
    f = np.asarray(f, dtype=float)
    bounds = (t / grid.h) ** 2 * (1 + BALL_RTOL)  # closed ball |x-y| <= t
    tg = _targets(grid, targets)
    out = np.zeros(len(tg))
    for start, tgt, flat in lat.blocks(tg):
        kv = table[flat]
        if b is not None:
            kv = kv * (b[tgt][:, None] - b[None, :])
        d2 = lat.d2[flat]
        acc = np.zeros(len(tgt))
        for bound, dm in zip(bounds, dmeasure):
            F = np.where(d2 <= bound, kv, 0.0) @ f
            acc += F**2 * dm
        out[start:start + len(tgt)] = np.sqrt(acc)
    return out


def marcinkiewicz(kernel: SphereKernel, f, grid: Grid, t_grid=None, targets=None) -> np.ndarray:
    """Square function of the truncations ``F_t`` against ``dt/t**3``.

    ``F_t`` is frozen at the left end of each t-cell; the ``dt/t**3`` mass of
    the cell is integrated exactly.
    """
    require_cancellation(kernel)
    return _marcinkiewicz(kernel, f, grid, t_grid, targets)


def marcinkiewicz_commutator(b, kernel: SphereKernel, f, grid: Grid, t_grid=None, targets=None) -> np.ndarray:
    require_cancellation(kernel)
    return _marcinkiewicz(kernel, f, grid, t_grid, targets, b=np.asarray(b, dtype=float))


def marcinkiewicz_conditions(kernel: SphereKernel, gamma: float = 1.0) -> dict:
    """Homogeneity holds by construction; cancellation is checked; Lipschitz is only reported."""
    defect = cancellation_defect(kernel)
    return {
        "homogeneous": True,
        "cancellation_defect": defect,
        "cancellation": defect <= DEFECT_TOL,
        "lip_gamma": gamma,
        "lip_seminorm": lip_gamma_seminorm(kernel, gamma) if kernel.quadrature.size > 1 else 0.0,
    }


@dataclass
class OperatorSpec:
    kind: str
    kernel: SphereKernel | None = None
    b: np.ndarray | None = field(default=None, repr=False)
    radii: np.ndarray | None = None
    t_grid: np.ndarray | None = None
    exclude_center: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown operator kind {self.kind!r}")
        if self.kind in COMMUTATORS and self.b is None:
            raise ConfigurationError(f"operator {self.kind!r} needs a symbol b")
        if self.kind != "maximal" and self.kernel is None:
            raise ConfigurationError(f"operator {self.kind!r} needs a kernel")
        if self.kind in CANCELLING:
            require_cancellation(self.kernel)

    @property
    def is_commutator(self) -> bool:
        return self.kind in COMMUTATORS

    @property
    def is_linear(self) -> bool:
        return self.kind in ("singular", "singular_commutator")


def apply(spec: OperatorSpec, f, grid: Grid, targets=None) -> np.ndarray:
    k = spec.kind
    if k == "maximal":
        return maximal(f, grid, spec.radii, targets, spec.exclude_center)
    if k == "rough_maximal":
        return rough_maximal(spec.kernel, f, grid, spec.radii, targets)
    if k == "maximal_commutator":
        return maximal_commutator(spec.b, spec.kernel, f, grid, spec.radii, targets)
    if k == "singular":
        return singular(spec.kernel, f, grid, targets)
    if k == "singular_commutator":
        return singular_commutator(spec.b, spec.kernel, f, grid, targets)
    if k == "marcinkiewicz":
        return marcinkiewicz(spec.kernel, f, grid, spec.t_grid, targets)
    return marcinkiewicz_commutator(spec.b, spec.kernel, f, grid, spec.t_grid, targets)


@dataclass(frozen=True)
class SizeCheck:
    value: float
    majorant: float

    @property
    def ratio(self) -> float:
        if self.majorant == 0:
            return 0.0
        return self.value / self.majorant


def size_condition_check(spec: OperatorSpec, f, x, grid: Grid) -> SizeCheck:
    """``|Tf(x)|`` against ``sum_{supp f} |Omega(x-y)| |x-y|**-n |f(y)| h**n``.

    ``x`` is a cell index or a point (snapped to its cell).  The support of
    ``f`` must stay at distance ``>= 2h`` from ``x``.  Commutator kinds insert
    ``|b(x) - b(y)|`` into the majorant.
    """
    f = np.asarray(f, dtype=float)
    cell = int(x) if np.ndim(x) == 0 and isinstance(x, (int, np.integer)) else grid.nearest_cell(x)
    supp = np.flatnonzero(f != 0)
    if supp.size == 0:
        return SizeCheck(0.0, 0.0)
    dist = np.sqrt(np.sum((grid.centers[supp] - grid.centers[cell]) ** 2, axis=1))
    if dist.min() < 2 * grid.h * (1 - BALL_RTOL):
        raise PreconditionError(f"x is within {dist.min():.3g} < 2h of supp f")
    kernel = spec.kernel if spec.kernel is not None else constant_kernel(grid.n)
    disp = grid.centers[cell] - grid.centers[supp]
    terms = np.abs(kernel(disp)) / dist**grid.n * np.abs(f[supp]) * grid.cell_volume
    if spec.is_commutator:
        b = np.asarray(spec.b, dtype=float)
        terms = terms * np.abs(b[cell] - b[supp])
    value = abs(float(apply(spec, f, grid, targets=[cell])[0]))
    return SizeCheck(value, float(terms.sum()))
