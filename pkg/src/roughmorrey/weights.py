"""Weights on a grid and Muckenhoupt-class machinery.

Characteristics are suprema over a :class:`~roughmorrey.grid.BallFamily` of
per-ball products of discrete averages.  Because every per-ball quantity is a
finite sum, identities such as the dual-weight relation hold exactly (up to
rounding) on the grid, not just asymptotically.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError, PreconditionError
from .grid import Ball, BallFamily, Grid, ball_cells, lebesgue_ball_measure

A_INFINITY_P_GRID = (1.25, 1.5, 2.0, 4.0, 8.0)


def conjugate(p: float) -> float:
    """Hölder conjugate ``p/(p-1)``; ``1 <-> inf``."""
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1)


@dataclass(frozen=True)
class PowerTag:
    """``w(x) = coef * |x - center|**alpha``."""

    alpha: float
    center: tuple = (0.0,)
    coef: float = 1.0


@dataclass(frozen=True, eq=False)
class Weight:
    grid: Grid
    values: np.ndarray
    tag: PowerTag | None = None
    name: str = "table"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ConfigurationError(f"weight needs {self.grid.size} cell values, got {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ConfigurationError("weight values must be positive and finite")
        object.__setattr__(self, "values", values)

    def power(self, exponent: float, name: str | None = None) -> "Weight":
        """``w**exponent`` with the analytic tag carried along."""
        tag = None
        if self.tag is not None:
            tag = PowerTag(self.tag.alpha * exponent, self.tag.center, self.tag.coef**exponent)
        return Weight(self.grid, self.values**exponent, tag, name or f"{self.name}^{exponent:g}")

    def scaled(self, c: float) -> "Weight":
        tag = None
        if self.tag is not None:
            tag = PowerTag(self.tag.alpha, self.tag.center, self.tag.coef * c)
        return Weight(self.grid, c * self.values, tag, f"{c:g}*{self.name}")

    def measure_exact(self, center, radius: float) -> float:
        """Continuum ``w(B(center, radius))`` over all of ``R^n`` (tagged weights only)."""
        if self.tag is None:
            raise PreconditionError("closed-form ball measure needs a power tag")
        return self.tag.coef * power_ball_integral(
            self.grid.n, self.tag.alpha, Ball(center, radius), self.tag.center
        )


def constant_weight(grid: Grid, c: float = 1.0) -> Weight:
    tag = PowerTag(0.0, (0.0,) * grid.n, float(c))
    return Weight(grid, np.full(grid.size, float(c)), tag, "one" if c == 1 else f"const({c:g})")


def power_weight(grid: Grid, alpha: float, center=None) -> Weight:
    """``|x - center|**alpha``; locally integrable iff ``alpha > -n``."""
    if not alpha > -grid.n:
        raise ConfigurationError(f"power weight needs alpha > -n, got {alpha}")
    center = np.zeros(grid.n) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
    r = np.linalg.norm(grid.centers - center, axis=1)
    if np.any(r == 0):
        raise ConfigurationError("power weight center coincides with a cell center")
    tag = PowerTag(float(alpha), tuple(float(c) for c in center))
    return Weight(grid, r**alpha, tag, f"|x|^{alpha:g}")


def table_weight(grid: Grid, values, name: str = "table") -> Weight:
    return Weight(grid, values, None, name)


def power_ball_integral(n: int, alpha: float, ball: Ball, weight_center=None) -> float:
    """``int_{B} |x - weight_center|**alpha dx`` in closed or quadrature form.

    One dimension uses the antiderivative ``sign(x)|x|**(alpha+1)/(alpha+1)``.
    Two dimensions integrate in polar coordinates about the weight center:
    the angular measure of the circle of radius ``rho`` inside the ball is an
    arccos, and the radial integral goes to :func:`scipy.integrate.quad`.
    """
    if not alpha > -n:
        raise DomainError("integral diverges for alpha <= -n")
    c = np.asarray(ball.center, dtype=float)
    wc = np.zeros(n) if weight_center is None else np.asarray(weight_center, dtype=float)
    r = ball.radius
    if n == 1:
        a, b = c[0] - r - wc[0], c[0] + r - wc[0]
        F = lambda x: math.copysign(abs(x) ** (alpha + 1), x) / (alpha + 1)
        return F(b) - F(a)
    d = float(np.linalg.norm(c - wc))
    if d == 0:
        return 2 * math.pi * r ** (alpha + 2) / (alpha + 2)

    def arc(rho):
        cosang = (rho * rho + d * d - r * r) / (2 * rho * d)
        return 2 * math.acos(min(1.0, max(-1.0, cosang)))

    total = 0.0
    lo = abs(d - r)
    if r > d:
        total += 2 * math.pi * lo ** (alpha + 2) / (alpha + 2)
    val, _ = integrate.quad(lambda rho: rho ** (alpha + 1) * arc(rho), lo, d + r, epsabs=0, epsrel=1e-12, limit=200)
    return total + val


def weight_measure(w: Weight, cells) -> float:
    """``w(E) = sum_{E} w h**n``; zero for the empty set."""
    cells = np.asarray(cells, dtype=int)
    if cells.size == 0:
        return 0.0
    return float(np.sum(w.values[cells]) * w.grid.cell_volume)


def family_measures(w: Weight, family: BallFamily) -> np.ndarray:
    """``w(B)`` for every ball of the family."""
    return family.ball_sums(w.values) * w.grid.cell_volume


def dual_weight(w: Weight, p: float) -> Weight:
    """``w**(1 - p')``, the weight dual to ``w`` in ``A_p``."""
    if not 1 < p < np.inf:
        raise DomainError("dual weight needs 1 < p < inf")
    return w.power(1 - conjugate(p), name=f"dual_{p:g}({w.name})")


@dataclass
class ApReport:
    p: float
    characteristic: float
    argmax_center: tuple
    argmax_radius: float
    per_ball: np.ndarray = field(repr=False)

    def as_dict(self):
        return {
            "p": self.p,
            "characteristic": self.characteristic,
            "argmax_center": list(self.argmax_center),
            "argmax_radius": self.argmax_radius,
        }


def _report(p, table, family) -> ApReport:
    if not np.any(np.isfinite(table)):
        raise ConfigurationError("no ball in the family has at least 2 cells")
    i, j = np.unravel_index(np.nanargmax(table), table.shape)
    return ApReport(p, float(table[i, j]), tuple(family.centers[i]), float(family.radii[j]), table)


def ap_per_ball(w: Weight, p: float, family: BallFamily) -> np.ndarray:
    """``(avg_B w)(avg_B w^{1-p'})^{p-1}`` per ball; NaN for balls with < 2 cells."""
    if not 1 < p < np.inf:
        raise DomainError("use a1_characteristic for p <= 1")
    counts = family.counts
    with np.errstate(invalid="ignore", divide="ignore"):
        avg_w = family.ball_sums(w.values) / counts
        avg_d = family.ball_sums(w.values ** (1 - conjugate(p))) / counts
        table = avg_w * avg_d ** (p - 1)
    return np.where(counts >= 2, table, np.nan)


def ap_characteristic(w: Weight, p: float, family: BallFamily) -> ApReport:
    """Discrete ``[w]_{A_p}`` as the maximum per-ball value over the family."""
    return _report(p, ap_per_ball(w, p, family), family)


def a1_per_ball(w: Weight, family: BallFamily) -> np.ndarray:
    counts = family.counts
    with np.errstate(invalid="ignore", divide="ignore"):
        table = family.ball_sums(w.values) / counts / family.ball_mins(w.values)
    return np.where(counts >= 2, table, np.nan)


def a1_characteristic(w: Weight, family: BallFamily) -> ApReport:
    """``max_B avg_B w / min_B w``."""
    return _report(1.0, a1_per_ball(w, family), family)


def class_characteristic(w: Weight, q: float, family: BallFamily) -> ApReport:
    """``A_q`` characteristic for any ``q >= 1`` (``A_1`` when ``q == 1``)."""
    if abs(q - 1) < 1e-14:
        return a1_characteristic(w, family)
    return ap_characteristic(w, q, family)


def a_infinity_characteristic(w: Weight, family: BallFamily, p_grid=A_INFINITY_P_GRID):
    """Minimum of ``[w]_{A_p}`` over a fixed exponent grid; returns ``(value, p)``."""
    best = None
    for p in p_grid:
        rep = ap_characteristic(w, p, family)
        if best is None or rep.characteristic < best[0]:
            best = (rep.characteristic, p)
    return best


def power_ap_closed_form(n: int, alpha: float, p: float) -> float:
    """Per-ball ``A_p`` value of ``|x|**alpha`` on balls centered at the origin.

    Both averages are ``n r**a / (n + a)``; the powers of ``r`` cancel.
    """
    beta = alpha * (1 - conjugate(p))
    if alpha <= -n or beta <= -n:
        return np.inf
    return n / (n + alpha) * (n / (n + beta)) ** (p - 1)


def ap_characteristic_exact(w: Weight, p: float, family: BallFamily) -> float:
    """``A_p`` supremum with closed-form ball integrals of a tagged power weight."""
    dual = dual_weight(w, p)
    best = 0.0
    for i, j in family:
        c, r = family.centers[i], family.radii[j]
        vol = lebesgue_ball_measure(w.grid.n, r)
        val = (w.measure_exact(c, r) / vol) * (dual.measure_exact(c, r) / vol) ** (p - 1)
        best = max(best, val)
    return best


@dataclass
class DoublingReport:
    max_ratio: float
    bound: float
    characteristic: float
    violations: int
    tested: int
    skipped: int
    ratios: np.ndarray = field(repr=False)
    exact_bound_violations: int = 0


def doubling_check(w: Weight, p: float, family: BallFamily, lam: float = 2.0) -> DoublingReport:
    """Compare ``w(lam B)/w(B)`` with ``lam**(n p) [w]_{A_p}``.

    Balls whose dilate leaves the box, or with fewer than 2 cells, are skipped
    and counted.  The characteristic is taken over the family enlarged by the
    dilated radii so that it covers every ``lam B``.  The report also counts
    violations of the bound the discrete Hölder argument gives exactly,
    ``(|lam B|_d / |B|_d)**p [w]_{A_p(lam B)}``.
    """
    big = family.with_radii(lam * family.radii)
    union = family.with_radii(np.union1d(family.radii, lam * family.radii))
    char = ap_characteristic(w, p, union).characteristic
    wb = family_measures(w, family)
    w2b = family_measures(w, big)
    ok = family.inside_box(lam) & (family.counts >= 2)
    ratios = np.where(ok, w2b / np.where(ok, wb, 1.0), np.nan)
    bound = lam ** (w.grid.n * p) * char
    per_big = ap_per_ball(w, p, big)
    exact = (big.counts / np.maximum(family.counts, 1)) ** p * per_big
    tested = int(ok.sum())
    return DoublingReport(
        max_ratio=float(np.nanmax(ratios)) if tested else 0.0,
        bound=float(bound),
        characteristic=float(char),
        violations=int(np.sum(ratios[ok] > bound)),
        tested=tested,
        skipped=int(ok.size - tested),
        ratios=ratios,
        exact_bound_violations=int(np.sum(ratios[ok] > exact[ok] * (1 + 1e-12))),
    )


@dataclass
class Relation:
    """One displayed relation evaluated on a ball."""

    label: str
    kind: str  # "identity" or "inequality"
    lhs: float
    rhs: float

    @property
    def constant(self) -> float:
        return self.lhs / self.rhs if self.rhs else np.inf

    @property
    def rel_error(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), abs(self.rhs), 1e-300)


def holder_identity_suite(w: Weight, p: float, s: float, ball: Ball) -> dict:
    """Evaluate the Hölder/duality relations between ``w`` and ``w^{1-p'}`` on one ball.

    Keys: ``"1"`` lower bound of the per-ball characteristic, ``"3"`` the
    ``L_{p'}`` bound of ``w^{-1/p}``, ``"6*"`` the ``L_inf`` form of
    ``1/essinf``, ``"7"``, ``"8a"``, ``"8b"``, ``"9"`` the algebraic identities
    for ``w^{1-p'}`` in ``A_{p'}`` and ``A_{p'/s'}``.
    """
    if not 1 < p < s:
        raise PreconditionError("need 1 < p < s")
    grid = w.grid
    cells = ball_cells(grid, ball)
    if len(cells) == 0:
        raise PreconditionError("ball contains no cells")
    hv = grid.cell_volume
    wv = w.values[cells]
    pp = conjugate(p)
    sp = conjugate(s)
    B = len(cells) * hv
    sigma = wv ** (1 - pp)

    def lnorm(v, q):
        return float(np.sum(v**q) * hv) ** (1.0 / q)

    w1 = float(np.sum(wv) * hv)
    sig1 = float(np.sum(sigma) * hv)

    def apb(v, q):
        # per-ball A_q value of the weight values v
        return (np.mean(v)) * np.mean(v ** (1 - conjugate(q))) ** (q - 1)

    char_p = apb(wv, p)
    out = {}
    out["1"] = Relation("1", "inequality", 1.0, char_p ** (1 / p))
    out["1-form"] = Relation("1-form", "identity", char_p ** (1 / p), w1 ** (1 / p) * lnorm(wv ** (-1 / p), pp) / B)
    out["3"] = Relation("3", "inequality", lnorm(wv ** (-1 / p), pp), B * w1 ** (-1 / p))
    out["6*"] = Relation("6*", "identity", float(np.max(1 / wv)), 1.0 / float(np.min(wv)))
    out["6*-bound"] = Relation("6*-bound", "inequality", float(np.max(1 / wv)), B / w1)
    char_dual_pp = apb(sigma, pp)
    out["7"] = Relation("7", "identity", char_dual_pp ** (1 / pp), sig1 ** (1 / pp) * lnorm(wv ** (1 / p), p) / B)
    q = pp / sp
    char_dual_q = apb(sigma, q)
    e = s * (p - 1) / (p * (s - 1))
    out["8a"] = Relation("8a", "identity", char_dual_q**e, sig1**e * lnorm(wv ** (sp / p), conjugate(q)) / B)
    ws = lnorm(wv, s / (s - p))
    out["8b"] = Relation("8b", "identity", char_dual_q ** (1 / pp), B ** (-(s - 1) / s) * sig1 ** (1 / pp) * ws ** (1 / p))
    out["9"] = Relation(
        "9",
        "identity",
        char_dual_q ** (1 / pp),
        B ** (1 / s) * char_dual_pp ** (1 / pp) / lnorm(wv ** (1 / p), p) * ws ** (1 / p),
    )
    return out


@dataclass
class SubsetReport:
    """Extremes of ``w(S)/w(B)`` against ``|S|/|B|`` over subsets ``S`` of a ball."""

    min_lower_slack: float  # min over S of (w(S)/w(B)) / (char**-1 (|S|/|B|)**exponent)
    exponent: float
    subsets: int
    fitted_delta: float
    fitted_C: float


def subset_measure_check(w: Weight, cells, characteristic: float, exponent: float, max_cells: int = 14) -> SubsetReport:
    """Exhaustive check of ``w(S)/w(B) >= (|S|/|B|)**exponent / characteristic``.

    With ``exponent = p`` this is the inequality the discrete Hölder argument
    gives for every ``A_p`` weight; ``exponent = 1`` is the ``A_1`` form.  The
    upper comparison ``w(S)/w(B) <= C (|S|/|B|)**delta`` is fitted, not asserted.
    """
    cells = np.asarray(cells, dtype=int)
    k = len(cells)
    if k == 0 or k > max_cells:
        raise PreconditionError(f"exhaustive subset scan needs 1..{max_cells} cells, got {k}")
    wv = w.values[cells]
    total = wv.sum()
    slack = np.inf
    fracs, ratios = [], []
    for size in range(1, k + 1):
        for S in itertools.combinations(range(k), size):
            ws = wv[list(S)].sum() / total
            frac = size / k
            slack = min(slack, ws / (frac**exponent / characteristic))
            if size < k:
                fracs.append(frac)
                ratios.append(ws)
    if fracs:
        # smallest delta with ratio <= C frac**delta where C makes the bound tight at frac -> 1
        fr, ra = np.array(fracs), np.array(ratios)
        delta = float(np.min(np.log(ra) / np.log(fr)))
        C = float(np.max(ra / fr**delta))
    else:
        delta, C = np.nan, np.nan
    return SubsetReport(float(slack), exponent, 2**k - 1, delta, C)
