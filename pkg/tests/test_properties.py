"""Property tests of the structural invariants."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from roughmorrey import functions as F
from roughmorrey import harness as H
from roughmorrey import kernels as K
from roughmorrey import operators as ops
from roughmorrey import spaces as S
from roughmorrey import weights as W
from roughmorrey.grid import BallFamily, dyadic_family, make_grid

GRID = make_grid(1, 1.0, 2.0**-5)
FAM = dyadic_family(GRID, stride=4)
WEIGHT = W.power_weight(GRID, 0.3)
SIGN = K.sign_kernel(1)

values = arrays(np.float64, GRID.size, elements=st.floats(-10, 10, allow_nan=False))
exponents = st.sampled_from([1.0, 1.5, 2.0, 3.0])
scalars = st.floats(-100, 100, allow_nan=False).filter(lambda c: abs(c) > 1e-3)
settings.register_profile("pkg", max_examples=40, deadline=None)
settings.load_profile("pkg")


@given(values, exponents, scalars)
def test_norm_homogeneity(f, p, c):
    for norm in (S.lp_w_norm, S.weak_lp_w_norm):
        assert norm(c * f, WEIGHT, p) == pytest.approx(abs(c) * norm(f, WEIGHT, p), rel=1e-12, abs=1e-300)


@given(values, values, exponents)
def test_triangle_inequality(f, g, p):
    assert S.lp_w_norm(f + g, WEIGHT, p) <= (S.lp_w_norm(f, WEIGHT, p) + S.lp_w_norm(g, WEIGHT, p)) * (1 + 1e-12)


@given(values, exponents)
def test_chebyshev(f, p):
    assert S.weak_lp_w_norm(f, WEIGHT, p) <= S.lp_w_norm(f, WEIGHT, p) * (1 + 1e-12)
    weak = S.generalized_weighted_morrey_norm(f, p, S.phi_kappa(0.5, WEIGHT), WEIGHT, FAM, weak=True).value
    strong = S.generalized_weighted_morrey_norm(f, p, S.phi_kappa(0.5, WEIGHT), WEIGHT, FAM).value
    assert weak <= strong * (1 + 1e-12)


@given(values, exponents)
def test_rearrangement_is_equimeasurable(f, p):
    g = S.rearrangement(f, GRID, w=WEIGHT)
    assert np.all(np.diff(g.values) <= 0)
    assert g.lp_norm(p) == pytest.approx(S.lp_w_norm(f, WEIGHT, p), rel=1e-10, abs=1e-300)


@given(values, st.integers(1, 4))
def test_morrey_monotone_in_family(f, drop):
    sub = BallFamily(GRID, FAM.centers[::2], FAM.radii[:-drop])
    phi = S.phi_kappa(0.5, WEIGHT)
    full = S.generalized_weighted_morrey_norm(f, 2.0, phi, WEIGHT, FAM).value
    part = S.generalized_weighted_morrey_norm(f, 2.0, phi, WEIGHT, sub).value
    assert part <= full * (1 + 1e-12)


@given(values, values, scalars)
def test_maximal_sublinear_and_homogeneous(f, g, c):
    m = lambda u: ops.maximal(u, GRID)
    assert np.all(m(f + g) <= (m(f) + m(g)) * (1 + 1e-12) + 1e-12)
    assert np.allclose(m(c * f), abs(c) * m(f), rtol=1e-12, atol=1e-12)


@given(values)
def test_constant_kernel_reduction(f):
    ref = ops.maximal(f, GRID, exclude_center=True)
    assert np.array_equal(ops.rough_maximal(K.constant_kernel(1), f, GRID), ref)
    assert np.array_equal(ops.rough_maximal(SIGN, f, GRID), ref)


@given(values, values, scalars)
def test_singular_is_linear(f, g, c):
    lhs = ops.singular(SIGN, c * f + g, GRID)
    rhs = c * ops.singular(SIGN, f, GRID) + ops.singular(SIGN, g, GRID)
    scale = max(1.0, np.max(np.abs(lhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale


@given(values, scalars)
def test_marcinkiewicz_homogeneous(f, c):
    a = ops.marcinkiewicz(SIGN, c * f, GRID)
    assert np.allclose(a, abs(c) * ops.marcinkiewicz(SIGN, f, GRID), rtol=1e-10, atol=1e-12)


@given(st.integers(-2**20, 2**20), st.integers(0, 2**10))
def test_bmo_translation_and_scaling(shift, scale):
    b = np.round(F.log_abs(GRID) * 2**20) / 2**20
    base = S.bmo_norm(b, FAM)
    assert S.bmo_norm(b + shift / 2**10, FAM) == base
    assert S.bmo_norm(b * 2.0 ** (scale % 8), FAM) == pytest.approx(base * 2.0 ** (scale % 8), rel=1e-12)


LOCAL_GRID = make_grid(1, 2.0, 2.0**-5)
_base = dyadic_family(LOCAL_GRID, stride=8, radii=LOCAL_GRID.h * 2.0 ** np.arange(3))
LOCAL_FAM = BallFamily(LOCAL_GRID, _base.centers[np.abs(_base.centers[:, 0]) < 0.3], _base.radii)
LOCAL_F = F.test_family(LOCAL_GRID, 11, count=3, support=np.abs(LOCAL_GRID.coordinate()) <= 0.5)
LOCAL_OP = ops.OperatorSpec("singular", K.sign_kernel(1, s=8.0))


@given(st.floats(0.01, 100), st.floats(0.01, 100))
@settings(max_examples=10)
def test_harness_ratio_scale_invariance(cf, cw):
    w = W.power_weight(LOCAL_GRID, 0.3)
    ref = H.lemma2_local(H.InequalityCase("L2-strong", LOCAL_F, w, 2.0, 8.0, LOCAL_OP, family=LOCAL_FAM), False)
    scaled = H.lemma2_local(H.InequalityCase("L2-strong", [cf * f for f in LOCAL_F], w.scaled(cw), 2.0, 8.0,
                                             LOCAL_OP, family=LOCAL_FAM), False)
    assert np.allclose(scaled.ratios, ref.ratios, rtol=1e-9)


@given(arrays(np.float64, (20, 2), elements=st.floats(-1e3, 1e3, allow_nan=False)),
       st.floats(1e-3, 1e3))
def test_kernel_degree_zero(points, mu):
    points = points[np.any(points != 0, axis=1)]
    k = K.sign_cos_kernel(64)
    assert np.array_equal(k(points), k(mu * points))
