import numpy as np
import pytest

from roughmorrey import functions as F
from roughmorrey import spaces as S
from roughmorrey import weights as W
from roughmorrey.errors import ConfigurationError, DomainError
from roughmorrey.grid import Ball, BallFamily, ball_cells, dyadic_family, make_grid


def test_lp_norm_examples(grid1):
    one = np.ones(grid1.size)
    assert S.lp_w_norm(one, None, 3.0, grid=grid1) == pytest.approx(2 ** (1 / 3), rel=1e-14)
    w = W.power_weight(grid1, 0.3)
    cells = ball_cells(grid1, Ball((0.2,), 0.3))
    chi = np.zeros(grid1.size)
    chi[cells] = 1
    assert S.lp_w_norm(chi, w, 2.0) == pytest.approx(W.weight_measure(w, cells) ** 0.5, rel=1e-14)
    assert S.lp_w_norm(np.zeros(grid1.size), w, 2.0) == 0
    with pytest.raises(DomainError):
        S.lp_w_norm(one, w, 0.5)


def test_weak_norm_examples(grid1):
    w = W.power_weight(grid1, 0.3)
    A = ball_cells(grid1, Ball((0.0,), 0.2))
    B = ball_cells(grid1, Ball((0.0,), 0.5))
    chi = np.zeros(grid1.size)
    chi[B] = 1
    assert S.weak_lp_w_norm(chi, w, 2.0) == pytest.approx(W.weight_measure(w, B) ** 0.5, rel=1e-14)
    f = chi.copy()
    f[A] = 2
    expected = max(2 * W.weight_measure(w, A) ** 0.5, W.weight_measure(w, B) ** 0.5)
    assert S.weak_lp_w_norm(f, w, 2.0) == pytest.approx(expected, rel=1e-14)


def test_rearrangement_of_indicator(grid1):
    cells = ball_cells(grid1, Ball((0.1,), 0.25))
    chi = np.zeros(grid1.size)
    chi[cells] = 1
    g = S.rearrangement(chi, grid1)
    size = len(cells) * grid1.h
    assert g(0.0) == 1 and g(size * 0.99) == 1 and g(size * 1.01) == 0
    assert g.lp_norm(2.0) == pytest.approx(S.lp_w_norm(chi, None, 2.0, grid=grid1), rel=1e-14)


def test_rearrangement_norms_agree(grid1):
    f = F.random_bandlimited(grid1, seed=3)
    g = S.rearrangement(f, grid1)
    assert g.lp_norm(1.5) == pytest.approx(S.lp_w_norm(f, None, 1.5, grid=grid1), rel=1e-12)
    assert g.weak_norm(1.5) == pytest.approx(S.weak_lp_w_norm(f, None, 1.5, grid=grid1), rel=1e-12)


def test_phi_rejects_nonpositive(family1):
    w = W.power_weight(family1.grid, 0.3)
    f = np.ones(family1.grid.size)
    with pytest.raises(ConfigurationError):
        S.generalized_weighted_morrey_norm(f, 2.0, S.PhiModel("table", table=np.zeros(family1.shape)), w, family1)
    with pytest.raises(ConfigurationError):
        S.phi_kappa(1.5, w)


def test_reductions(family1):
    grid = family1.grid
    w = W.power_weight(grid, 0.3)
    f = F.bump(grid, [0.1], 0.4) + F.indicator(grid, [-0.3], 0.2)
    gen = S.generalized_weighted_morrey_norm(f, 2.0, S.phi_kappa(0.5, w), w, family1).value
    ref = S.weighted_morrey_norm(f, 2.0, 0.5, w, family1).value
    assert gen == pytest.approx(ref, rel=1e-10)
    gen_w = S.generalized_weighted_morrey_norm(f, 2.0, S.phi_kappa(0.5, w), w, family1, weak=True).value
    ref_w = S.weighted_morrey_norm(f, 2.0, 0.5, w, family1, weak=True).value
    assert gen_w == pytest.approx(ref_w, rel=1e-10)


def test_inverse_weight_gives_lebesgue_norm():
    grid = make_grid(1, 1.0, 2.0**-6)
    fam = BallFamily(grid, np.array([[0.0]]), np.array([0.25, 0.5, 2.0]))
    w = W.power_weight(grid, 0.3)
    f = F.bump(grid, [0.1], 0.4)
    gen = S.generalized_weighted_morrey_norm(f, 2.0, S.phi_inv_weight(w), w, fam).value
    assert gen == pytest.approx(S.weighted_lebesgue_norm(f, w, 2.0), rel=1e-12)


def test_classical_morrey(family1):
    grid = family1.grid
    one = np.ones(grid.size)
    big = BallFamily(grid, np.array([[0.0]]), np.array([0.25, 2.0]))
    assert S.classical_morrey_norm(one, 2.0, 0.0, big).value == pytest.approx(2 ** 0.5, rel=1e-12)
    # lambda = n: every ball contributes (v_n r^n)^{1/p} r^{-n/p}, up to lattice counting
    val = S.classical_morrey_norm(one, 2.0, 1.0, family1.with_radii(family1.radii[family1.radii >= 8 * grid.h]))
    assert val.value == pytest.approx(2 ** 0.5, rel=0.1)


def test_classical_vs_generalized_power(family1):
    grid = family1.grid
    f = F.bump(grid, [0.0], 0.5)
    lam, p = 0.5, 2.0
    gen = S.generalized_weighted_morrey_norm(f, p, S.phi_power((lam - 1) / p), None, family1).per_ball
    cls = S.classical_morrey_norm(f, p, lam, family1).per_ball
    # per ball the two differ by (r^n / |B|)^{1/p}, i.e. v_n^{-1/p} up to lattice counting
    r = family1.radii[None, :]
    factor = (r / (family1.counts * grid.h)) ** (1 / p)
    ok = family1.counts > 0
    assert np.allclose(gen[ok], (cls * factor)[ok], rtol=1e-12, atol=0)


def test_norm_report_csv(family1):
    f = F.bump(family1.grid, [0.0], 0.5)
    rep = S.classical_morrey_norm(f, 2.0, 0.5, family1)
    lines = rep.to_csv().strip().splitlines()
    assert len(lines) == 1 + family1.shape[0] * family1.shape[1]


def test_bmo_examples(family1):
    grid = family1.grid
    assert S.bmo_norm(np.full(grid.size, 3.7), family1) == 0
    b = F.log_abs(grid)
    q = np.round(b * 2**20) / 2**20
    assert S.bmo_norm(q + 5.0, family1) == S.bmo_norm(q, family1)


def test_bmo_log_refinement():
    vals = []
    for h in (2.0**-10, 2.0**-11):
        g = make_grid(1, 1.0, h)
        fam = dyadic_family(g, stride=int(2.0**-6 / h))
        vals.append(S.bmo_norm(F.log_abs(g), fam))
    assert abs(vals[1] / vals[0] - 1) < 0.05


def test_jn_equivalence(family1):
    grid = family1.grid
    const = S.jn_lp_equivalence(np.ones(grid.size), 2.0, family1)
    assert const.ratio == 1 and const.degenerate
    b = F.log_abs(grid)
    assert S.jn_lp_equivalence(b, 1.0, family1).ratio == pytest.approx(1.0, rel=1e-12)
    r2 = S.jn_lp_equivalence(b, 2.0, family1).ratio
    assert 1 <= r2 < 3


def test_shift_bound(grid1):
    w = W.constant_weight(grid1)
    fam = dyadic_family(grid1, stride=4)
    b = F.log_abs(grid1)
    bmo = S.bmo_norm(b, fam)
    same = S.ball_shift_bound(b, w, 1.0, [0.0], 0.25, 0.25, bmo)
    assert same.lhs <= same.rhs * (1 + 1e-12)
    assert S.ball_shift_bound(np.ones(grid1.size), w, 1.0, [0.0], 0.25, 0.5, 0.0).lhs == 0
