"""Norms and space functionals on grid functions.

Grid functions are plain 1-d numpy arrays with one value per cell.  Sup-type
functionals are maxima over a :class:`~roughmorrey.grid.BallFamily` and come
back as :class:`NormReport` objects carrying the per-ball table.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, PreconditionError
from .grid import Ball, BallFamily, Grid, ball_cells, lebesgue_ball_measure
from .weights import Weight, conjugate, family_measures


def _values(w: Weight | None, grid: Grid) -> np.ndarray:
    return np.ones(grid.size) if w is None else w.values


def _region(grid: Grid, cells):
    return slice(None) if cells is None else np.asarray(cells, dtype=int)


def lp_w_norm(f, w: Weight | None, p: float, cells=None, grid: Grid | None = None) -> float:
    """``(sum_{region} |f|**p w h**n)**(1/p)``; ``w=None`` means Lebesgue measure."""
    if not 1 <= p < np.inf:
        raise DomainError("p must lie in [1, inf)")
    grid = grid or w.grid
    sel = _region(grid, cells)
    f = np.abs(np.asarray(f, dtype=float)[sel])
    wv = _values(w, grid)[sel]
    return float(np.sum(f**p * wv) * grid.cell_volume) ** (1.0 / p)


def weak_lp_w_norm(f, w: Weight | None, p: float, cells=None, grid: Grid | None = None) -> float:
    """``max_v v * w({|f| >= v})**(1/p)`` over the distinct values ``v`` of ``|f|``.

    For a grid simple function this equals ``sup_{t>0} t w({|f| > t})**(1/p)``.
    """
    if not 1 <= p < np.inf:
        raise DomainError("p must lie in [1, inf)")
    grid = grid or w.grid
    sel = _region(grid, cells)
    a = np.abs(np.asarray(f, dtype=float)[sel])
    wv = _values(w, grid)[sel] * grid.cell_volume
    levels, inverse = np.unique(a, return_inverse=True)
    mass = np.bincount(inverse.ravel(), weights=wv, minlength=len(levels))
    # w({|f| >= levels[k]}) = tail sum of the level masses
    tail = np.cumsum(mass[::-1])[::-1]
    cand = levels * tail ** (1.0 / p)
    return float(cand.max()) if cand.size else 0.0


@dataclass
class Rearrangement:
    """Non-increasing rearrangement as a step function.

    ``values[k]`` is taken on ``[edges[k], edges[k+1])``.
    """

    values: np.ndarray
    edges: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.edges, t, side="right") - 1
        inside = (k >= 0) & (k < len(self.values))
        return np.where(inside, self.values[np.clip(k, 0, max(len(self.values) - 1, 0))], 0.0)

    @property
    def total_measure(self) -> float:
        return float(self.edges[-1])

    def lp_norm(self, p: float) -> float:
        return float(np.sum(self.values**p * np.diff(self.edges))) ** (1.0 / p)

    def weak_norm(self, p: float) -> float:
        """``sup_{0 < t <= |E|} t**(1/p) g*(t)``, attained as ``t`` tends to a step's right edge."""
        if not len(self.values):
            return 0.0
        return float(np.max(self.edges[1:] ** (1.0 / p) * self.values))


def rearrangement(f, grid: Grid, cells=None, w: Weight | None = None) -> Rearrangement:
    """Sorted ``|f|`` with the (weighted) cell measures as step widths."""
    sel = _region(grid, cells)
    a = np.abs(np.asarray(f, dtype=float)[sel])
    mass = _values(w, grid)[sel] * grid.cell_volume
    order = np.argsort(-a, kind="stable")
    edges = np.concatenate([[0.0], np.cumsum(mass[order])])
    return Rearrangement(a[order], edges)


# --- ball tables ----------------------------------------------------------

def ball_lp_norms(f, w: Weight | None, p: float, family: BallFamily) -> np.ndarray:
    """``||f||_{L_{p,w}(B)}`` for every ball of the family."""
    grid = family.grid
    a = np.abs(np.asarray(f, dtype=float)) ** p * _values(w, grid)
    return (np.maximum(family.ball_sums(a), 0.0) * grid.cell_volume) ** (1.0 / p)


def ball_weak_norms(f, w: Weight | None, p: float, family: BallFamily) -> np.ndarray:
    grid = family.grid
    out = np.zeros(family.shape)
    for i, j in family:
        out[i, j] = weak_lp_w_norm(f, w, p, family.cells(i, j), grid)
    return out


def ball_measures(w: Weight | None, family: BallFamily) -> np.ndarray:
    if w is None:
        return family.measures.astype(float)
    return family_measures(w, family)


@dataclass(frozen=True, eq=False)
class PhiModel:
    """Growth function ``phi(x, r)`` of a generalized Morrey space.

    Forms: ``power`` (``r**beta``), ``kappa_weight``
    (``w(B(x,r))**((kappa-1)/p)``), ``inv_weight`` (``w(B(x,r))**(-1/p)``) and
    ``table`` (explicit per-ball values).  With ``exact=True`` the weight forms
    use closed-form ball measures of a tagged weight instead of cell sums.
    """

    form: str
    beta: float = 0.0
    kappa: float = 0.5
    weight: Weight | None = None
    table: np.ndarray | None = None
    exact: bool = False

    def __post_init__(self):
        if self.form not in ("power", "kappa_weight", "inv_weight", "table"):
            raise ConfigurationError(f"unknown phi form {self.form!r}")
        if self.form in ("kappa_weight", "inv_weight") and self.weight is None:
            raise ConfigurationError(f"phi form {self.form!r} needs a weight")
        if self.form == "kappa_weight" and not 0 < self.kappa < 1:
            raise ConfigurationError("kappa must lie in (0, 1)")
        if self.form == "table" and self.table is None:
            raise ConfigurationError("table phi needs values")

    def weight_measure(self, family: BallFamily) -> np.ndarray:
        if self.exact:
            w = self.weight
            return np.array(
                [[w.measure_exact(c, r) for r in family.radii] for c in family.centers]
            )
        return family_measures(self.weight, family)

    def evaluate(self, family: BallFamily, p: float) -> np.ndarray:
        k, m = family.shape
        if self.form == "power":
            return np.broadcast_to(family.radii[None, :] ** self.beta, (k, m)).copy()
        if self.form == "table":
            return np.broadcast_to(np.asarray(self.table, dtype=float), (k, m)).copy()
        wb = self.weight_measure(family)
        with np.errstate(divide="ignore"):
            if self.form == "kappa_weight":
                return wb ** ((self.kappa - 1) / p)
            return wb ** (-1.0 / p)

    def describe(self) -> str:
        if self.form == "power":
            return f"power({self.beta:g})"
        if self.form == "kappa_weight":
            return f"kappa_weight({self.kappa:g})"
        return self.form


def phi_power(beta: float) -> PhiModel:
    return PhiModel("power", beta=beta)


def phi_kappa(kappa: float, w: Weight, exact: bool = False) -> PhiModel:
    return PhiModel("kappa_weight", kappa=kappa, weight=w, exact=exact)


def phi_inv_weight(w: Weight, exact: bool = False) -> PhiModel:
    return PhiModel("inv_weight", weight=w, exact=exact)


@dataclass
class NormReport:
    value: float
    argmax_center: tuple
    argmax_radius: float
    per_ball: np.ndarray = field(repr=False)
    family: BallFamily | None = field(default=None, repr=False)

    def summary(self) -> dict:
        return {
            "value": self.value,
            "argmax_center": [float(c) for c in self.argmax_center],
            "argmax_radius": self.argmax_radius,
        }

    def to_csv(self) -> str:
        """One row per ball: center coordinates, radius, per-ball value."""
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        n = self.family.grid.n
        wr.writerow([f"center_{a}" for a in range(n)] + ["radius", "value"])
        for i, j in self.family:
            wr.writerow([repr(float(c)) for c in self.family.centers[i]]
                        + [repr(float(self.family.radii[j])), repr(float(self.per_ball[i, j]))])
        return buf.getvalue()


def _norm_report(table: np.ndarray, family: BallFamily) -> NormReport:
    table = np.where(np.isfinite(table), table, np.nan)
    if np.all(np.isnan(table)):
        return NormReport(0.0, tuple(family.centers[0]), float(family.radii[0]), table, family)
    i, j = np.unravel_index(np.nanargmax(table), table.shape)
    return NormReport(float(table[i, j]), tuple(family.centers[i]), float(family.radii[j]), table, family)


def generalized_weighted_morrey_norm(f, p: float, phi: PhiModel, w: Weight | None, family: BallFamily,
                                     weak: bool = False) -> NormReport:
    """``max_B phi(x,r)**-1 w(B)**(-1/p) ||f||_{L_{p,w}(B)}`` (weak norm if ``weak``).

    ``w=None`` gives the unweighted generalized Morrey norm with the
    ``|B|**(-1/p)`` normalization.  Empty balls are skipped.
    """
    if not 1 <= p < np.inf:
        raise DomainError("p must lie in [1, inf)")
    ph = phi.evaluate(family, p)
    if np.any(~(ph > 0)):
        raise ConfigurationError("phi must be positive on every family ball")
    local = ball_weak_norms(f, w, p, family) if weak else ball_lp_norms(f, w, p, family)
    wb = ball_measures(w, family)
    with np.errstate(divide="ignore", invalid="ignore"):
        table = np.where(family.counts > 0, local / ph / wb ** (1.0 / p), np.nan)
    return _norm_report(table, family)


def weighted_morrey_norm(f, p: float, kappa: float, w: Weight, family: BallFamily, weak: bool = False) -> NormReport:
    """``max_B w(B)**(-kappa/p) ||f||_{L_{p,w}(B)}``, coded ball by ball."""
    grid = family.grid
    table = np.full(family.shape, np.nan)
    for i, j in family:
        cells = ball_cells(grid, Ball(tuple(family.centers[i]), family.radii[j]))
        if len(cells) == 0:
            continue
        wb = float(np.sum(w.values[cells]) * grid.cell_volume)
        local = weak_lp_w_norm(f, w, p, cells) if weak else lp_w_norm(f, w, p, cells)
        table[i, j] = wb ** (-kappa / p) * local
    return _norm_report(table, family)


def weighted_lebesgue_norm(f, w: Weight, p: float) -> float:
    return lp_w_norm(f, w, p)


def classical_morrey_norm(f, p: float, lam: float, family: BallFamily, weak: bool = False) -> NormReport:
    """``max_B r**(-lam/p) ||f||_{L_p(B)}`` with ``0 <= lam <= n``."""
    grid = family.grid
    if not 0 <= lam <= grid.n:
        raise DomainError("lambda must lie in [0, n]")
    table = np.full(family.shape, np.nan)
    for i, j in family:
        r = family.radii[j]
        cells = ball_cells(grid, Ball(tuple(family.centers[i]), r))
        if len(cells) == 0:
            continue
        local = weak_lp_w_norm(f, None, p, cells, grid) if weak else lp_w_norm(f, None, p, cells, grid)
        table[i, j] = r ** (-lam / p) * local
    return _norm_report(table, family)


# --- BMO ------------------------------------------------------------------

def weighted_mean(b, w: Weight | None, cells, grid: Grid | None = None) -> float:
    """``b_{B,w} = w(B)**-1 sum_B b w h**n`` (plain mean for ``w=None``)."""
    grid = grid or w.grid
    cells = np.asarray(cells, dtype=int)
    if cells.size == 0:
        raise PreconditionError("mean over an empty ball")
    b = np.asarray(b, dtype=float)[cells]
    wv = _values(w, grid)[cells]
    return float(np.sum(b * wv) / np.sum(wv))


def _oscillation_table(b, family: BallFamily, w: Weight | None, p: float = 1.0, center_w: bool = True):
    grid = family.grid
    b = np.asarray(b, dtype=float)
    wv = _values(w, grid)
    table = np.full(family.shape, np.nan)
    for i, j in family:
        cells = family.cells(i, j)
        if len(cells) == 0:
            continue
        # differences from a reference cell: adding an exactly representable
        # constant to b then leaves every later operation bit-identical
        bb, ww = b[cells] - b[cells[0]], wv[cells]
        mean = np.sum(bb * ww) / np.sum(ww) if center_w else np.mean(bb)
        table[i, j] = (np.sum(np.abs(bb - mean) ** p * ww) / np.sum(ww)) ** (1.0 / p)
    return table


def bmo_norm(b, family: BallFamily) -> float:
    """``||b||_* = max_B avg_B |b - b_B|``."""
    return float(np.nanmax(_oscillation_table(b, family, None)))


def bmo_table(b, family: BallFamily) -> NormReport:
    return _norm_report(_oscillation_table(b, family, None), family)


def bmo_w_norm(b, w: Weight, family: BallFamily) -> float:
    """``max_B w(B)**-1 sum_B |b - b_{B,w}| w``."""
    return float(np.nanmax(_oscillation_table(b, family, w)))


@dataclass
class EquivalenceReport:
    lp_sup: float
    bmo: float
    p: float
    degenerate: bool = False  # 0/0 convention applied

    @property
    def ratio(self) -> float:
        if self.bmo == 0:
            return 1.0
        return self.lp_sup / self.bmo


def jn_lp_equivalence(b, p: float, family: BallFamily, w: Weight | None = None) -> EquivalenceReport:
    """``sup_B (avg_B |b - b_B|**p)**(1/p)`` against ``||b||_*``.

    With a weight the averages are ``w(B)**-1 int_B ... w`` while ``b_B`` stays
    the Lebesgue mean, as in the weighted John-Nirenberg consequence.
    """
    if not 1 <= p < np.inf:
        raise DomainError("p must lie in [1, inf)")
    bmo = bmo_norm(b, family)
    lp = float(np.nanmax(_oscillation_table(b, family, w, p, center_w=False)))
    return EquivalenceReport(lp, bmo, p, degenerate=(bmo == 0 and lp == 0))


@dataclass
class ShiftBound:
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else np.inf
        return self.lhs / self.rhs


def ball_shift_bound(b, w: Weight, p: float, x, r1: float, r2: float, bmo: float,
                     dual: bool = False) -> ShiftBound:
    """Oscillation of ``b`` on ``B(x, r1)`` about the ``w``-mean on ``B(x, r2)``.

    ``lhs = (w(B1)**-1 sum_{B1} |b - b_{B2,w}|**p w)**(1/p)``; with ``dual``
    the measure is ``w**(1-p')`` and the exponent ``p'``.  ``rhs`` is
    ``bmo * (1 + |ln(r1/r2)|)``.
    """
    grid = w.grid
    b = np.asarray(b, dtype=float)
    c1 = ball_cells(grid, Ball(tuple(np.atleast_1d(x)), r1))
    c2 = ball_cells(grid, Ball(tuple(np.atleast_1d(x)), r2))
    if len(c1) == 0 or len(c2) == 0:
        raise PreconditionError("both balls must contain cells")
    center = weighted_mean(b, w, c2)
    if dual:
        if not p > 1:
            raise DomainError("dual variant needs p > 1")
        q = conjugate(p)
        mv = w.values[c1] ** (1 - q)
    else:
        q = p
        mv = w.values[c1]
    lhs = (np.sum(np.abs(b[c1] - center) ** q * mv) / np.sum(mv)) ** (1.0 / q)
    return ShiftBound(float(lhs), float(bmo * (1 + abs(np.log(r1 / r2)))))


def ball_mean(b, grid: Grid, x, r: float) -> float:
    cells = ball_cells(grid, Ball(tuple(np.atleast_1d(x)), r))
    return weighted_mean(b, None, cells, grid)
