import numpy as np
import pytest

from roughmorrey import functions as F
from roughmorrey import harness as H
from roughmorrey import kernels as K
from roughmorrey import operators as ops
from roughmorrey import spaces as S
from roughmorrey import weights as W
from roughmorrey.errors import ConfigurationError, GateError
from roughmorrey.grid import Ball, BallFamily, dyadic_family, make_grid


@pytest.fixture(scope="module")
def setup():
    grid = make_grid(1, 2.0, 2.0**-6)
    base = dyadic_family(grid, stride=16, radii=grid.h * 2.0 ** np.arange(4))
    keep = np.abs(base.centers[:, 0]) < 0.5 - base.radii.max()
    fam = BallFamily(grid, base.centers[keep], base.radii)
    support = np.abs(grid.coordinate()) <= 0.5
    funcs = F.test_family(grid, 3, count=6, support=support)
    return grid, fam, funcs


def test_power_weight_gates():
    g = make_grid(1, 1.0, 2.0**-4)
    assert H.weight_in_class(W.power_weight(g, 0.3), 2.0)[0]
    assert not H.weight_in_class(W.power_weight(g, 1.5), 2.0)[0]
    assert H.weight_in_class(W.power_weight(g, -0.5), 1.0)[0]
    assert not H.weight_in_class(W.power_weight(g, 0.5), 1.0)[0]


def test_gate_errors_name_hypothesis():
    g = make_grid(1, 1.0, 2.0**-4)
    w = W.power_weight(g, 0.3)
    with pytest.raises(GateError) as info:
        H.gate_strong(w, 1.5, 2.0)
    assert info.value.hypothesis == "s' <= p"
    with pytest.raises(GateError):
        H.gate_psmall(w, 3.0, 2.0)
    with pytest.raises(GateError) as info:
        H.gate_weak(W.power_weight(g, 0.5), 1.0, 4.0)
    assert info.value.hypothesis == "w in A_1"
    assert H.gate_strong(w, 2.0, 8.0)["class"] == "A_1.75"


def test_untagged_gate_needs_family():
    g = make_grid(1, 1.0, 2.0**-4)
    w = W.table_weight(g, np.ones(g.size))
    with pytest.raises(ConfigurationError):
        H.weight_in_class(w, 2.0)
    ok, value = H.weight_in_class(w, 2.0, dyadic_family(g, 2))
    assert ok and value == pytest.approx(1.0)


def test_measure_table_modes():
    g = make_grid(1, 1.0, 2.0**-8)
    w = W.power_weight(g, 1.0)
    exact = H.measure_table(w, [[0.0]], [0.5])
    assert exact[0, 0] == pytest.approx(0.25, rel=1e-12)
    summed = H.measure_table(w, [[0.0]], [0.5], exact=False)
    assert summed[0, 0] == pytest.approx(0.25, rel=1e-3)
    one = W.constant_weight(g)
    ps = H.measure_table(one, [[0.0]], [0.5], mode="psmall", p=2.0, s=4.0)
    assert ps[0, 0] == pytest.approx(1.0, rel=1e-12)  # ||1||_{L_2(B)} with |B| = 1


def test_case_validation(setup):
    grid, fam, funcs = setup
    w = W.power_weight(grid, 0.3)
    with pytest.raises(ConfigurationError):
        H.InequalityCase("NOPE", funcs, w, family=fam)
    with pytest.raises(ConfigurationError):
        H.InequalityCase("L2-strong", funcs, w, family=fam, T_max=2 * fam.radii.max())


def test_lemma_local_strong_and_weak(setup):
    grid, fam, funcs = setup
    w = W.power_weight(grid, 0.3)
    op = ops.OperatorSpec("singular", K.sign_kernel(1, s=8.0))
    strong = H.lemma2_local(H.InequalityCase("L2-strong", funcs, w, 2.0, 8.0, op, family=fam))
    weak = H.lemma2_local(H.InequalityCase("L2-weak", funcs, w, 2.0, 8.0, op, family=fam), probe=False)
    assert strong.passed and np.isfinite(strong.C_emp)
    assert np.all(weak.ratios <= strong.ratios * (1 + 1e-12))
    rows = list(strong.rows())
    assert len(rows) == len(funcs) * fam.shape[0] * fam.shape[1]


def test_commutator_lemma_runs(setup):
    grid, fam, funcs = setup
    w = W.power_weight(grid, 0.3)
    b = F.log_abs(grid)
    op = ops.OperatorSpec("singular_commutator", K.sign_kernel(1, s=8.0), b)
    rep = H.lemma5_local(H.InequalityCase("L5-strong", funcs, w, 2.0, 8.0, op, family=fam), probe=False)
    assert np.isfinite(rep.C_emp) and rep.C_emp > 0


def test_zygmund_pass_and_fail(setup):
    grid, fam, _ = setup
    w = W.power_weight(grid, 0.3)
    good = S.phi_kappa(0.5, w, exact=True)
    rep = H.zygmund_condition(H.InequalityCase("Z316", w=w, p=2.0, s=8.0, phi1=good, phi2=good, family=fam))
    assert rep.passed and rep.verdict == "pass"
    bad = S.phi_power(0.5)
    rep = H.zygmund_condition(H.InequalityCase("Z316", w=w, p=2.0, s=8.0, phi1=bad, phi2=bad, family=fam))
    assert not rep.stable and rep.verdict == "condition fails"


def test_log_condition_dominates(setup):
    grid, fam, _ = setup
    w = W.power_weight(grid, 0.3)
    phi = S.phi_kappa(0.5, w, exact=True)
    kw = dict(w=w, p=2.0, s=8.0, phi1=phi, phi2=phi, family=fam)
    z = H.zygmund_condition(H.InequalityCase("Z316", **kw))
    zl = H.zygmund_condition(H.InequalityCase("Z47", **kw))
    assert np.all(zl.table >= z.table * (1 - 1e-12))


def test_lemma10_triple(setup):
    grid, fam, _ = setup
    w = W.power_weight(grid, 0.3)
    rep = H.lemma10_check(K.sign_kernel(1, s=4.0), w, 2.0, 4.0, Ball((0.1,), 0.2), [0.9])
    assert np.isfinite(rep.ratio) and rep.ratio > 0


def test_proof_steps_consistent(setup):
    grid, fam, funcs = setup
    w = W.power_weight(grid, 0.3)
    op = ops.OperatorSpec("singular", K.sign_kernel(1, s=8.0))
    rep = H.proof_step_suite(op, w, 2.0, 8.0, funcs[0], fam)
    assert rep.consistent


def test_fubini_orders_agree():
    a = np.array([0.1, 0.5, 1.0])
    d = np.array([1.0, 2.0, 0.5])
    t = 2.0 ** np.arange(-4, 4)
    y_first, t_first = H.fubini_orders(a, d, t, 1)
    assert y_first == pytest.approx(t_first, rel=1e-12)
