"""Rough kernels sampled on the unit sphere and their sphere-level checks."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, PreconditionError
from .grid import BALL_RTOL, Grid, SphereQuadrature, lebesgue_ball_measure, sphere_quadrature


@dataclass(frozen=True, eq=False)
class SphereKernel:
    """Values of a degree-zero homogeneous function at sphere quadrature nodes.

    The extension to ``R^n \\ {0}`` is ``x -> values[nearest node of x/|x|]``,
    so ``kernel(mu * x) == kernel(x)`` for every ``mu > 0`` by construction.
    """

    quadrature: SphereQuadrature
    values: np.ndarray
    s: float = np.inf
    gamma: float | None = None
    name: str = "custom"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.quadrature.size,):
            raise ConfigurationError(
                f"kernel needs {self.quadrature.size} node values, got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("kernel values must be finite")
        if not self.s > 1:
            raise ConfigurationError("integrability exponent s must exceed 1")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.quadrature.n

    def __call__(self, points) -> np.ndarray:
        return self.values[self.quadrature.nearest(points)]

    @property
    def is_constant_modulus(self) -> bool:
        return bool(np.all(np.abs(self.values) == np.abs(self.values[0])))


def evaluate(kernel: SphereKernel, x) -> float:
    """Value of the homogeneous extension at a nonzero point ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.all(x == 0):
        raise DomainError("kernel is undefined at the origin")
    return float(kernel(x[None, :])[0])


def ls_sphere_norm(kernel: SphereKernel, s: float) -> float:
    """``(sum_k w_k |Omega_k|**s)**(1/s)``; ``max |Omega|`` for ``s = inf``."""
    if not s > 1:
        raise DomainError("s must lie in (1, inf]")
    a = np.abs(kernel.values)
    if np.isinf(s):
        return float(a.max())
    return float(np.sum(kernel.quadrature.weights * a**s) ** (1.0 / s))


def cancellation_defect(kernel: SphereKernel) -> float:
    """``|sum_k w_k Omega_k|``; zero certifies the mean-zero condition."""
    return float(abs(np.sum(kernel.quadrature.weights * kernel.values)))


def lip_gamma_seminorm(kernel: SphereKernel, gamma: float) -> float:
    """Largest ``|Omega(x') - Omega(y')| / |x' - y'|**gamma`` over node pairs."""
    if not 0 < gamma <= 1:
        raise DomainError("gamma must lie in (0, 1]")
    nodes = kernel.quadrature.nodes
    if len(nodes) < 2:
        raise DomainError("need at least two nodes")
    i, j = np.triu_indices(len(nodes), k=1)
    chord = np.linalg.norm(nodes[i] - nodes[j], axis=1)
    diff = np.abs(kernel.values[i] - kernel.values[j])
    return float(np.max(diff / chord**gamma))


@dataclass(frozen=True)
class BallBound:
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else np.inf
        return self.lhs / self.rhs


def ls_ball_bound(kernel: SphereKernel, s: float, x, x0, t: float, grid: Grid) -> BallBound:
    """Both sides of ``||Omega(x - .)||_{L_s(B(x0,t))} <~ ||Omega||_{L_s(S)} |B(x0,2t)|^{1/s}``.

    The right side is written with the exact polar-coordinates constant,
    ``||Omega||_{L_s(S)} (|B(x0, 2t)| / sigma(S))^{1/s}``, which equals the
    middle term of the continuum chain.  The cell ``y = x`` is skipped.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if np.sum((x - x0) ** 2) >= t**2:
        raise PreconditionError("x must lie in B(x0, t)")
    d2 = np.sum((grid.centers - x0) ** 2, axis=1)
    cells = np.flatnonzero(d2 < t**2 * (1 - BALL_RTOL))
    disp = x - grid.centers[cells]
    disp = disp[np.any(disp != 0, axis=1)]
    vals = np.abs(kernel(disp)) if len(disp) else np.zeros(0)
    sigma = kernel.quadrature.total
    if np.isinf(s):
        lhs = float(vals.max()) if len(vals) else 0.0
        rhs = ls_sphere_norm(kernel, s)
    else:
        lhs = float(np.sum(vals**s) * grid.cell_volume) ** (1.0 / s)
        rhs = ls_sphere_norm(kernel, s) * (lebesgue_ball_measure(grid.n, 2 * t) / sigma) ** (1.0 / s)
    return BallBound(lhs, rhs)


# --- kernel library -------------------------------------------------------

def _angles(quad: SphereQuadrature) -> np.ndarray:
    return np.arctan2(quad.nodes[:, 1], quad.nodes[:, 0])


def _clean_sign(v: np.ndarray) -> np.ndarray:
    # Nodes on the zero set (cos theta = +-1e-16 at quarter turns) get 0.
    return np.where(np.abs(v) < 1e-12, 0.0, np.sign(v))


def constant_kernel(n: int, N: int = 256, s: float = np.inf) -> SphereKernel:
    q = sphere_quadrature(n, N)
    return SphereKernel(q, np.ones(q.size), s=s, gamma=1.0, name="one")


def sign_kernel(n: int, N: int = 256, s: float = np.inf) -> SphereKernel:
    """``sign(x_1)``: the Hilbert-transform kernel for ``n = 1``."""
    q = sphere_quadrature(n, N)
    return SphereKernel(q, _clean_sign(q.nodes[:, 0]), s=s, name="sign")


def cos_kernel(N: int = 256, s: float = np.inf) -> SphereKernel:
    q = sphere_quadrature(2, N)
    return SphereKernel(q, np.cos(_angles(q)), s=s, gamma=1.0, name="cos")


def sin_kernel(N: int = 256, s: float = np.inf) -> SphereKernel:
    q = sphere_quadrature(2, N)
    return SphereKernel(q, np.sin(_angles(q)), s=s, gamma=1.0, name="sin")


def sign_cos_kernel(N: int = 256, s: float = np.inf) -> SphereKernel:
    q = sphere_quadrature(2, N)
    return SphereKernel(q, _clean_sign(np.cos(_angles(q))), s=s, name="sign_cos")


def kernel_from_values(n: int, values, s: float = np.inf, name: str = "custom") -> SphereKernel:
    values = np.asarray(values, dtype=float)
    q = sphere_quadrature(n, len(values) if n == 2 else 256)
    return SphereKernel(q, values, s=s, name=name)


def load_kernel_csv(path, n: int, s: float = np.inf, column: int = 0) -> SphereKernel:
    """Node values from one column of a CSV file (header line optional)."""
    rows = []
    with open(Path(path), newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append(float(row[column]))
            except ValueError:
                if rows:
                    raise ConfigurationError(f"{path}: non-numeric kernel value {row[column]!r}")
    return kernel_from_values(n, rows, s=s, name=Path(path).stem)


def make_kernel(name: str, n: int, N: int = 256, s: float = np.inf) -> SphereKernel:
    """Look up a library kernel by name."""
    if name in ("one", "constant"):
        return constant_kernel(n, N, s)
    if name == "sign":
        return sign_kernel(n, N, s)
    if n == 2:
        table = {"cos": cos_kernel, "sin": sin_kernel, "sign_cos": sign_cos_kernel}
        if name in table:
            return table[name](N, s)
    raise ConfigurationError(f"unknown kernel {name!r} for n={n}")
