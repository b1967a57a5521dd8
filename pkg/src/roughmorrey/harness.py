"""Verification engine: local lemma bounds, pair conditions, boundedness ratios.

Every check evaluates both sides of an inequality on the grid and reports
the ratio ``lhs/rhs``.  The maximum ratio over a family is the empirical
constant ``C_emp``.  Integrals ``int_a^inf ... dt/t`` are left Riemann sums
over dyadic ``t = a 2**k`` cut at ``T_max``; a doubling probe reruns the check
at ``2 T_max`` and the check is called stable when ``C_emp`` moves by at most
``STABILITY_TOL`` (relative).

Ball measures entering the right-hand sides use the closed form of a tagged
power weight over all of ``R^n`` (``exact``); untagged weights fall back to
cell sums over the box, which is recorded in the report provenance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .errors import ConfigurationError, GateError
from .grid import Ball, BallFamily, Grid, ball_cells
from .spaces import (
    PhiModel,
    ball_lp_norms,
    ball_weak_norms,
    bmo_norm,
    generalized_weighted_morrey_norm,
    weak_lp_w_norm,
)
from .weights import Weight, class_characteristic, conjugate, dual_weight

CASE_IDS = (
    "L2-strong", "L2-psmall", "L2-weak", "L5-strong", "L5-psmall",
    "Z316", "Z317", "Z47", "Z48", "T9-strong", "T9-weak", "T15",
    "LEM10", "STEP11", "STEP12",
)
STABILITY_TOL = 0.10
DEFAULT_CEILING = 1e3
# Discrete characteristics above this count as "not in the class" for untagged weights.
GATE_CEILING = 1e6
ASSUMPTION = "operator bounded on L_p(w) is assumed, not certified; its discrete norm is measured only"


def default_t_max(grid: Grid) -> float:
    return 4 * grid.L


# --- gates ----------------------------------------------------------------

def _power_in_class(alpha: float, n: int, q: float) -> bool:
    """``|x|**alpha`` lies in ``A_q`` iff ``-n < alpha < n(q-1)`` (``alpha <= 0`` for ``q = 1``)."""
    if q == 1:
        return -n < alpha <= 0
    return -n < alpha < n * (q - 1)


def weight_in_class(w: Weight, q: float, family: BallFamily | None = None) -> tuple[bool, float]:
    """Membership of ``w`` in ``A_q`` and the discrete characteristic on ``family``.

    Power weights are decided by their exponent; other weights by the
    discrete characteristic staying below ``GATE_CEILING``.
    """
    value = np.nan
    if family is not None:
        value = class_characteristic(w, q, family).characteristic
    if w.tag is not None:
        return _power_in_class(w.tag.alpha, w.grid.n, q), value
    if family is None:
        raise ConfigurationError("untagged weight needs a ball family for the class gate")
    return bool(np.isfinite(value) and value <= GATE_CEILING), value


def _s_prime(s: float) -> float:
    return conjugate(s)


def gate_strong(w: Weight, p: float, s: float, family=None) -> dict:
    """``p > 1``, ``s' <= p`` and ``w in A_{p/s'}``."""
    sp = _s_prime(s)
    if not p > 1:
        raise GateError(f"p = {p} must exceed 1", "p > 1")
    if sp > p:
        raise GateError(f"s' = {sp:g} exceeds p = {p:g}", "s' <= p")
    q = p / sp
    ok, value = weight_in_class(w, q, family)
    if not ok:
        raise GateError(f"weight {w.name} is not in A_{q:g}", "w in A_{p/s'}")
    return {"class": f"A_{q:g}", "characteristic": value}


def gate_psmall(w: Weight, p: float, s: float, family=None) -> dict:
    """``1 < p < s`` and ``w**(1-p') in A_{p'/s'}``."""
    if not 1 < p < s:
        raise GateError(f"need 1 < p < s, got p = {p:g}, s = {s:g}", "1 < p < s")
    q = conjugate(p) / _s_prime(s)
    dual = dual_weight(w, p)
    ok, value = weight_in_class(dual, q, family)
    if not ok:
        raise GateError(f"dual weight of {w.name} is not in A_{q:g}", "w^{1-p'} in A_{p'/s'}")
    return {"class": f"A_{q:g} (dual)", "characteristic": value}


def gate_weak(w: Weight, p: float, s: float, family=None) -> dict:
    """``p = 1``: ``s > 1`` and ``w in A_1``; ``p > 1`` falls back to the strong gates."""
    if p > 1:
        return gate_strong(w, p, s, family)
    if p != 1:
        raise GateError(f"p = {p} must be at least 1", "p >= 1")
    if not s > 1:
        raise GateError(f"s = {s} must exceed 1", "s > 1")
    ok, value = weight_in_class(w, 1.0, family)
    if not ok:
        raise GateError(f"weight {w.name} is not in A_1", "w in A_1")
    return {"class": "A_1", "characteristic": value}


# --- ball measures --------------------------------------------------------

def measure_table(w: Weight, centers, radii, mode: str = "w", p: float = 2.0, s: float = np.inf,
                  exact: bool = True) -> np.ndarray:
    """``W`` raised to the power ``p``: ``w(B)`` (``mode="w"``) or ``||w||_{L_q(B)}`` with ``q = s/(s-p)``.

    Shape ``(len(centers), len(radii))``.  ``exact`` uses closed forms over
    ``R^n`` when the weight is tagged.
    """
    centers = np.asarray(centers, dtype=float).reshape(-1, w.grid.n)
    radii = np.asarray(radii, dtype=float)
    if mode == "w":
        q = 1.0
    elif mode == "psmall":
        q = 1.0 if np.isinf(s) else s / (s - p)
    else:
        raise ConfigurationError(f"unknown measure mode {mode!r}")
    wq = w if q == 1 else w.power(q)
    if exact and w.tag is not None:
        out = np.array([[wq.measure_exact(tuple(c), r) for r in radii] for c in centers])
    else:
        fam = BallFamily(w.grid, centers, radii)
        out = fam.ball_sums(wq.values) * w.grid.cell_volume
    return out ** (1.0 / q)


def _t_sequences(radii, T_max):
    """Dyadic ``t_k = 2 r 2**k < T_max`` and ``ln`` widths, per radius."""
    seqs = []
    for r in radii:
        ts, t = [], 2 * r
        while t < T_max:
            ts.append(t)
            t *= 2
        ts = np.array(ts)
        if ts.size:
            upper = np.minimum(np.append(ts[1:], 2 * ts[-1]), T_max)
            widths = np.log(upper / ts)
        else:
            widths = np.zeros(0)
        seqs.append((ts, widths))
    return seqs


@dataclass
class _RhsContext:
    """Measure tables and t-grids shared by all test functions of a case."""

    family: BallFamily
    T_max: float
    p: float
    mode: str
    s: float
    w: Weight
    exact: bool
    log_factor: bool = False
    tset: np.ndarray = field(init=False)
    seqs: list = field(init=False)
    m_r: np.ndarray = field(init=False)
    m_t: np.ndarray = field(init=False)
    t_family: BallFamily | None = field(init=False)

    def __post_init__(self):
        self.seqs = _t_sequences(self.family.radii, self.T_max)
        allt = [ts for ts, _ in self.seqs if ts.size]
        self.tset = np.unique(np.concatenate(allt)) if allt else np.zeros(0)
        c = self.family.centers
        self.m_r = measure_table(self.w, c, self.family.radii, self.mode, self.p, self.s, self.exact)
        if self.tset.size:
            self.m_t = measure_table(self.w, c, self.tset, self.mode, self.p, self.s, self.exact)
            self.t_family = self.family.with_radii(self.tset)
        else:
            self.m_t = np.zeros((len(c), 0))
            self.t_family = None

    def integral(self, f) -> np.ndarray:
        """``int_{2r}^{T_max} ||f||_{L_{p,w}(B(x,t))} W(x,t)**(-1/p) [1 + ln(t/r)] dt/t`` per ball."""
        out = np.zeros(self.family.shape)
        if self.t_family is None:
            return out
        norms = ball_lp_norms(f, self.w, self.p, self.t_family)
        g = norms * self.m_t ** (-1.0 / self.p)
        for j, (ts, widths) in enumerate(self.seqs):
            if not ts.size:
                continue
            idx = np.searchsorted(self.tset, ts)
            wts = widths * (1 + np.log(ts / self.family.radii[j])) if self.log_factor else widths
            out[:, j] = g[:, idx] @ wts
        return out

    def rhs(self, f) -> np.ndarray:
        return self.m_r ** (1.0 / self.p) * self.integral(f)


def _ratio(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    return r


# --- cases and reports ----------------------------------------------------

@dataclass
class InequalityCase:
    """One inequality to verify over a ball family and a test-function family."""

    id: str
    functions: list = field(default_factory=list, repr=False)
    w: Weight | None = None
    p: float = 2.0
    s: float = np.inf
    operator: ops.OperatorSpec | None = None
    b: np.ndarray | None = field(default=None, repr=False)
    phi1: PhiModel | None = None
    phi2: PhiModel | None = None
    family: BallFamily | None = None
    T_max: float | None = None
    ceiling: float = DEFAULT_CEILING
    bmo: float | None = None
    exact: bool = True
    gate_family: BallFamily | None = None

    def __post_init__(self):
        if self.id not in CASE_IDS:
            raise ConfigurationError(f"unknown inequality id {self.id!r}")
        if self.family is None:
            raise ConfigurationError("case needs a ball family")
        if self.w is None:
            raise ConfigurationError("case needs a weight")
        if self.T_max is None:
            self.T_max = default_t_max(self.family.grid)
        if np.any(2 * self.family.radii >= self.T_max):
            raise ConfigurationError("family radii must satisfy 2r < T_max")

    def gates(self) -> dict:
        fam = self.gate_family
        i = self.id
        if i in ("L2-strong", "L5-strong", "Z316", "Z47", "T9-strong", "T15", "STEP11", "STEP12"):
            return gate_strong(self.w, self.p, self.s, fam)
        if i in ("L2-psmall", "L5-psmall", "Z317", "Z48", "LEM10"):
            return gate_psmall(self.w, self.p, self.s, fam)
        return gate_weak(self.w, self.p, self.s, fam)

    @property
    def mode(self) -> str:
        return "psmall" if self.id in ("L2-psmall", "L5-psmall", "Z317", "Z48") else "w"

    @property
    def grid(self) -> Grid:
        return self.family.grid


@dataclass
class VerificationReport:
    case: str
    ratios: np.ndarray = field(repr=False)  # (functions, centers, radii)
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    C_emp: float
    spread: float
    stable: bool | None
    drift: float
    T_max: float
    ceiling: float
    anomalies: int = 0
    gate: dict = field(default_factory=dict)
    provenance: list = field(default_factory=list)
    family: BallFamily | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return (
            bool(np.isfinite(self.C_emp))
            and self.C_emp <= self.ceiling
            and self.stable is not False
            and self.anomalies == 0
        )

    def summary(self) -> dict:
        return {
            "case": self.case,
            "C_emp": self.C_emp,
            "spread": self.spread,
            "stable": self.stable,
            "drift": self.drift,
            "T_max": self.T_max,
            "pass": self.passed,
            "anomalies": self.anomalies,
            "provenance": list(self.provenance),
        }

    def rows(self):
        """``(case, function, center..., radius, lhs, rhs, ratio)`` per (function, ball)."""
        fam = self.family
        for k in range(self.ratios.shape[0]):
            for i, j in fam:
                yield [self.case, k, *[float(c) for c in fam.centers[i]], float(fam.radii[j]),
                       float(self.lhs[k, i, j]), float(self.rhs[k, i, j]), float(self.ratios[k, i, j])]


def _per_function_spread(ratios: np.ndarray) -> float:
    """``max_f C_f / min_f C_f`` over functions with ``C_f > 0``."""
    per_f = np.array([np.nanmax(r) if np.any(np.isfinite(r)) else 0.0 for r in ratios])
    pos = per_f[per_f > 0]
    if pos.size == 0:
        return 1.0
    return float(pos.max() / pos.min())


def _c_emp(ratios) -> float:
    finite = ratios[~np.isnan(ratios)]
    return float(finite.max()) if finite.size else 0.0


def _provenance(case: InequalityCase) -> list:
    out = [ASSUMPTION, f"integrals truncated at T_max={case.T_max:g}"]
    if case.w.tag is None or not case.exact:
        out.append("ball measures in rhs are box-truncated cell sums")
    else:
        out.append("ball measures in rhs are closed-form over R^n")
    return out


def _local_lhs(Tf, w, p, family, weak):
    return ball_weak_norms(Tf, w, p, family) if weak else ball_lp_norms(Tf, w, p, family)


def _local_check(case: InequalityCase, weak: bool, commutator: bool, probe: bool) -> VerificationReport:
    gate = case.gates()
    if case.operator is None:
        raise ConfigurationError(f"case {case.id} needs an operator")
    if commutator and case.operator.b is None:
        raise ConfigurationError(f"case {case.id} needs an operator with symbol b")
    fam = case.family
    grid = case.grid
    bnorm = 1.0
    if commutator:
        bnorm = case.bmo if case.bmo is not None else bmo_norm(case.operator.b, fam)
    Tfs = [ops.apply(case.operator, f, grid) for f in case.functions]
    lhs = np.stack([_local_lhs(Tf, case.w, case.p, fam, weak) for Tf in Tfs])

    def run(T_max):
        ctx = _RhsContext(fam, T_max, case.p, case.mode, case.s, case.w, case.exact, log_factor=commutator)
        rhs = np.stack([bnorm * ctx.rhs(f) for f in case.functions])
        return rhs, _ratio(lhs, rhs)

    rhs, ratios = run(case.T_max)
    anomalies = int(np.sum(np.isinf(ratios)))
    C = _c_emp(ratios)
    stable, drift = None, np.nan
    if probe:
        _, r2 = run(2 * case.T_max)
        C2 = _c_emp(r2)
        drift = abs(C2 - C) / C if C > 0 else 0.0
        stable = bool(drift <= STABILITY_TOL)
    return VerificationReport(
        case.id, ratios, lhs, rhs, C, _per_function_spread(ratios), stable, float(drift),
        case.T_max, case.ceiling, anomalies, gate, _provenance(case), fam,
    )


def lemma2_local(case: InequalityCase, probe: bool = True) -> VerificationReport:
    """Local bound of ``||Tf||_{L_{p,w}(B)}`` by the ``dt/t`` integral of ball norms of ``f``.

    ``L2-weak`` uses the weak norm on the left; with ``p = 1`` this is the
    weak endpoint form, with ``p > 1`` it is compared against ``L2-strong``.
    """
    if case.id not in ("L2-strong", "L2-psmall", "L2-weak"):
        raise ConfigurationError(f"lemma2_local cannot run case {case.id}")
    return _local_check(case, weak=case.id == "L2-weak", commutator=False, probe=probe)


def lemma5_local(case: InequalityCase, probe: bool = True) -> VerificationReport:
    """Commutator version: rhs gains ``||b||_*`` and ``1 + ln(t/r)`` inside the integral."""
    if case.id not in ("L5-strong", "L5-psmall"):
        raise ConfigurationError(f"lemma5_local cannot run case {case.id}")
    if not case.p > 1:
        raise GateError("commutator lemma needs p > 1", "p > 1")
    return _local_check(case, weak=False, commutator=True, probe=probe)


# --- pair conditions ------------------------------------------------------

@dataclass
class ZygmundReport:
    case: str
    C_emp: float
    C_emp_doubled: float
    drift: float
    stable: bool
    table: np.ndarray = field(repr=False)  # integral / rhs factor, per (center, radius)
    boundary_essinf: int = 0
    gate: dict = field(default_factory=dict)
    ceiling: float = DEFAULT_CEILING

    @property
    def passed(self) -> bool:
        return self.stable and np.isfinite(self.C_emp) and self.C_emp <= self.ceiling

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "condition fails"

    def summary(self) -> dict:
        return {
            "case": self.case,
            "C_emp": self.C_emp,
            "C_emp_doubled": self.C_emp_doubled,
            "drift": self.drift,
            "stable": self.stable,
            "boundary_essinf": self.boundary_essinf,
            "pass": self.passed,
        }


def _dyadic_up_to(r0: float, T_max: float) -> np.ndarray:
    out, t = [], r0
    while t <= T_max * (1 + 1e-12):
        out.append(t)
        t *= 2
    return np.array(out)


def _phi_on(phi: PhiModel, family: BallFamily, p: float) -> np.ndarray:
    return phi.evaluate(family, p)


def zygmund_table(phi1, phi2, w, p, s, family: BallFamily, T_max: float, mode: str, log_factor: bool,
                  exact: bool = True):
    """Per-ball ``integral / phi2`` and the number of boundary-attained essinf values."""
    taus = _dyadic_up_to(float(family.radii.min()), T_max)
    radii_all = np.union1d(taus, family.radii)
    big = family.with_radii(radii_all)
    W = measure_table(w, family.centers, radii_all, mode, p, s, exact) ** (1.0 / p)
    f1 = _phi_on(phi1, big, p)
    f2 = _phi_on(phi2, family, p)
    if np.any(~(f2 > 0)):
        raise ConfigurationError("phi2 must be positive on the family")
    num = f1 * W
    table = np.zeros(family.shape)
    boundary = 0
    for j, r in enumerate(family.radii):
        ts = _dyadic_up_to(r, T_max)
        if ts.size < 2:
            continue
        idx = np.searchsorted(radii_all, ts)
        # essinf over tau in [t, T_max] on the dyadic grid: reverse running minimum
        sub = num[:, idx]
        ess = np.minimum.accumulate(sub[:, ::-1], axis=1)[:, ::-1]
        last = sub.shape[1] - 1
        at_edge = (sub[:, last:last + 1] <= ess) & (np.arange(sub.shape[1]) < last)
        boundary += int(np.sum(at_edge[:, :-1] & (sub[:, :-1] > ess[:, :-1])))
        integrand = ess[:, :-1] / W[:, idx[:-1]]
        widths = np.log(ts[1:] / ts[:-1])
        if log_factor:
            widths = widths * (1 + np.log(ts[:-1] / r))
        table[:, j] = integrand @ widths
    if mode == "psmall":
        wr = measure_table(w, family.centers, family.radii, "w", p, s, exact) ** (1.0 / p)
        Wr = W[:, np.searchsorted(radii_all, family.radii)]
        denom = f2 * wr / Wr
    else:
        denom = f2
    return table / denom, boundary


def zygmund_condition(case: InequalityCase) -> ZygmundReport:
    """Pair condition on ``(phi1, phi2)`` with a ``T_max`` doubling probe.

    The essinf runs over dyadic ``tau`` in ``[t, T_max]``; when the minimum
    sits at ``T_max`` strictly below interior values it is counted in
    ``boundary_essinf``.
    """
    if case.id not in ("Z316", "Z317", "Z47", "Z48"):
        raise ConfigurationError(f"zygmund_condition cannot run case {case.id}")
    if case.id in ("Z316", "Z47") and case.p == 1:
        raise GateError("pair condition for the strong theorem needs p != 1", "p != 1")
    gate = case.gates()
    if case.phi1 is None or case.phi2 is None:
        raise ConfigurationError("pair condition needs phi1 and phi2")
    log_factor = case.id in ("Z47", "Z48")
    args = (case.phi1, case.phi2, case.w, case.p, case.s, case.family)
    t1, boundary = zygmund_table(*args, case.T_max, case.mode, log_factor, case.exact)
    t2, _ = zygmund_table(*args, 2 * case.T_max, case.mode, log_factor, case.exact)
    C1, C2 = float(np.max(t1)), float(np.max(t2))
    drift = abs(C2 - C1) / C1 if C1 > 0 else 0.0
    return ZygmundReport(case.id, C1, C2, drift, bool(drift <= STABILITY_TOL), t1, boundary, gate, case.ceiling)


# --- theorem-level ratios -------------------------------------------------

@dataclass
class BoundednessReport:
    case: str
    ratios: np.ndarray
    max_ratio: float
    spread: float
    ceiling: float
    precondition: ZygmundReport | None = None
    skipped: int = 0
    trivial: bool = False

    @property
    def passed(self) -> bool:
        ok = np.isfinite(self.max_ratio) and self.spread <= self.ceiling
        if self.precondition is not None:
            ok = ok and self.precondition.stable
        return bool(ok)

    def summary(self) -> dict:
        return {
            "case": self.case,
            "max_ratio": self.max_ratio,
            "spread": self.spread,
            "skipped": self.skipped,
            "trivial": self.trivial,
            "precondition_stable": None if self.precondition is None else self.precondition.stable,
            "pass": self.passed,
        }


def boundedness_ratio(case: InequalityCase, check_condition: bool = True) -> BoundednessReport:
    """``||Tf||_{M_{p,phi2}(w)} / ||f||_{M_{p,phi1}(w)}`` over the test functions.

    ``T9-weak`` puts the weak norm in the numerator; ``T15`` multiplies the
    denominator by ``||b||_*`` (a zero ``||b||_*`` is a trivial pass).
    """
    if case.id not in ("T9-strong", "T9-weak", "T15"):
        raise ConfigurationError(f"boundedness_ratio cannot run case {case.id}")
    if case.operator is None or case.phi1 is None or case.phi2 is None:
        raise ConfigurationError("boundedness case needs operator, phi1 and phi2")
    case.gates()
    pre = None
    if check_condition:
        zid = "Z47" if case.id == "T15" else "Z316"
        if case.id == "T9-weak" and case.p == 1:
            t1, _ = zygmund_table(case.phi1, case.phi2, case.w, 1.0, case.s, case.family, case.T_max, "w", False, case.exact)
            t2, _ = zygmund_table(case.phi1, case.phi2, case.w, 1.0, case.s, case.family, 2 * case.T_max, "w", False, case.exact)
            C1, C2 = float(t1.max()), float(t2.max())
            drift = abs(C2 - C1) / C1 if C1 > 0 else 0.0
            pre = ZygmundReport("Z316", C1, C2, drift, drift <= STABILITY_TOL, t1)
        else:
            pre = zygmund_condition(InequalityCase(
                zid, w=case.w, p=case.p, s=case.s, phi1=case.phi1, phi2=case.phi2,
                family=case.family, T_max=case.T_max, exact=case.exact, gate_family=case.gate_family,
            ))
    weak = case.id == "T9-weak"
    bnorm = 1.0
    if case.id == "T15":
        if case.operator.b is None:
            raise ConfigurationError("T15 needs an operator with symbol b")
        bnorm = case.bmo if case.bmo is not None else bmo_norm(case.operator.b, case.family)
    grid = case.grid
    ratios, skipped = [], 0
    for f in case.functions:
        den = generalized_weighted_morrey_norm(f, case.p, case.phi1, case.w, case.family).value
        if den == 0:
            skipped += 1
            continue
        Tf = ops.apply(case.operator, f, grid)
        num = generalized_weighted_morrey_norm(Tf, case.p, case.phi2, case.w, case.family, weak=weak).value
        ratios.append(0.0 if bnorm == 0 and num == 0 else num / (bnorm * den))
    ratios = np.array(ratios)
    trivial = case.id == "T15" and bnorm == 0
    pos = ratios[ratios > 0]
    spread = float(pos.max() / pos.min()) if pos.size else 1.0
    mx = float(ratios.max()) if ratios.size else 0.0
    return BoundednessReport(case.id, ratios, mx, spread, case.ceiling, pre, skipped, trivial)


# --- Hölder lemma ---------------------------------------------------------

@dataclass(frozen=True)
class TripleReport:
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else np.inf
        return self.lhs / self.rhs


def lemma10_check(kernel, w: Weight, p: float, s: float, ball: Ball, y, gate_family=None) -> TripleReport:
    """``||Omega(.-y)||_{L_{p,w}(B)}`` against ``||Omega(.-y)||_{L_s(B)} ||w||_{L_{(s/p)'}(B)}**(1/p)``.

    Cells with ``x = y`` are dropped from the kernel sums.
    """
    if np.isinf(s):
        raise GateError("lemma needs finite s", "1 < p < s")
    gate_psmall(w, p, s, gate_family)
    grid = w.grid
    cells = ball_cells(grid, ball)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    disp = grid.centers[cells] - y
    keep = np.any(disp != 0, axis=1)
    om = np.zeros(len(cells))
    if np.any(keep):
        om[keep] = np.abs(kernel(disp[keep]))
    hv = grid.cell_volume
    lhs = float(np.sum(om**p * w.values[cells]) * hv) ** (1 / p)
    q = conjugate(s / p)
    ls = float(np.sum(om**s) * hv) ** (1 / s)
    wq = float(np.sum(w.values[cells] ** q) * hv) ** (1 / q)
    return TripleReport(lhs, ls * wq ** (1 / p))


# --- proof steps ----------------------------------------------------------

@dataclass
class StepReport:
    constants: dict
    composite: float
    composite_bound: float
    fubini_gap: float
    per_ball: dict = field(repr=False, default_factory=dict)
    per_ball_consistent: bool = True

    @property
    def consistent(self) -> bool:
        return self.per_ball_consistent and self.composite <= self.composite_bound * (1 + 1e-12)

    def summary(self) -> dict:
        return {"constants": dict(self.constants), "composite": self.composite,
                "composite_bound": self.composite_bound, "fubini_gap": self.fubini_gap,
                "consistent": self.consistent}


def fubini_orders(a, d, t_grid, n: int) -> tuple[float, float]:
    """Both orders of ``sum_y a_y sum_{k: t_k >= d_y} c_k`` with ``c_k = int_{t_k}^{t_{k+1}} dt/t**(n+1)``.

    The last cell runs to infinity.
    """
    t = np.asarray(t_grid, dtype=float)
    upper = np.append(t[1:] ** (-float(n)), 0.0)
    c = (t ** (-float(n)) - upper) / n
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    inner = np.array([c[t >= dy].sum() for dy in d])
    order_y = float(np.sum(a * inner))
    order_t = float(sum(ck * a[d <= tk].sum() for tk, ck in zip(t, c)))
    return order_y, order_t


def proof_step_suite(operator: ops.OperatorSpec, w: Weight, p: float, s: float, f, family: BallFamily,
                     T_max: float | None = None, exact: bool = True, gate_family=None) -> StepReport:
    """Empirical constants of the chained sub-bounds, ball by ball.

    ``f1`` is ``f`` on ``2B`` and ``f2`` the rest.  Steps: ``f1`` (local
    boundedness ``||Tf1||_{B} <= C ||f||_{2B}``), ``11`` (pointwise bound of
    ``Tf2`` on ``B`` by the ``dt/t`` integral), ``e312`` (norm of ``Tf2``),
    ``12`` (``||f||_{2B}`` by the integral), ``315`` (weak ``L_1`` norm of
    ``Tf1``; only when ``p = 1``) and the Fubini exchange as an identity.
    """
    grid = family.grid
    T_max = default_t_max(grid) if T_max is None else T_max
    if p > 1:
        gate_strong(w, p, s, gate_family)
    else:
        gate_weak(w, p, s, gate_family)
    f = np.asarray(f, dtype=float)
    ctx = _RhsContext(family, T_max, p, "w", s, w, exact)
    integral = ctx.integral(f)
    rhs = ctx.m_r ** (1.0 / p) * integral
    Tf = ops.apply(operator, f, grid)
    comp = _ratio(ball_lp_norms(Tf, w, p, family), rhs)
    fam2 = family.with_radii(2 * family.radii)
    norm_2b = ball_lp_norms(f, w, p, fam2)
    step = {k: np.full(family.shape, np.nan) for k in ("f1", "11", "e312", "12", "315")}
    kernel = operator.kernel
    gaps = []
    for i, j in family:
        cells = family.cells(i, j)
        if len(cells) == 0:
            continue
        inner = fam2.cells(i, j)
        f1 = np.zeros_like(f)
        f1[inner] = f[inner]
        f2 = f - f1
        Tf1 = ops.apply(operator, f1, grid, targets=cells)
        Tf2 = ops.apply(operator, f2, grid, targets=cells)
        wv = w.values[cells]
        hv = grid.cell_volume
        n1 = float(np.sum(np.abs(Tf1) ** p * wv) * hv) ** (1 / p)
        n2 = float(np.sum(np.abs(Tf2) ** p * wv) * hv) ** (1 / p)
        step["f1"][i, j] = _ratio(n1, norm_2b[i, j])
        step["11"][i, j] = _ratio(np.max(np.abs(Tf2)), integral[i, j])
        step["e312"][i, j] = _ratio(n2, rhs[i, j])
        step["12"][i, j] = _ratio(norm_2b[i, j], rhs[i, j])
        if p == 1:
            full = np.zeros(grid.size)
            full[cells] = Tf1
            step["315"][i, j] = _ratio(weak_lp_w_norm(full, w, 1.0, cells), rhs[i, j])
        # Fubini exchange at the ball center with |Omega| weights (the form of the first display step)
        src = np.flatnonzero(f2)
        if src.size and kernel is not None:
            x0 = family.centers[i]
            cell0 = cells[0]
            disp = grid.centers[cell0] - grid.centers[src]
            ok = np.any(disp != 0, axis=1)
            a = np.zeros(src.size)
            a[ok] = np.abs(f2[src][ok]) * np.abs(kernel(disp[ok])) * hv
            d = np.linalg.norm(grid.centers[src] - x0, axis=1)
            tg = _dyadic_up_to(2 * family.radii[j], 2 * T_max)
            y_first, t_first = fubini_orders(a, d, tg, grid.n)
            gaps.append(abs(y_first - t_first) / max(abs(y_first), 1e-300))
    consts = {k: (_c_emp(v) if np.any(~np.isnan(v)) else None) for k, v in step.items()}
    C = _c_emp(comp)
    # sublinearity: ||Tf||_B <= ||Tf1||_B + ||Tf2||_B <= (C_f1 C_12 + C_e312) * rhs
    bound_table = step["f1"] * step["12"] + step["e312"]
    bound = (consts["f1"] or 0.0) * (consts["12"] or 0.0) + (consts["e312"] or 0.0)
    per_ball_ok = bool(np.all((comp <= bound_table * (1 + 1e-12)) | np.isnan(bound_table)))
    return StepReport(consts, C, bound, float(max(gaps) if gaps else 0.0),
                      {**step, "composite": comp}, per_ball_ok)
