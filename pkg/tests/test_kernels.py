import math

import numpy as np
import pytest

from roughmorrey import kernels as K
from roughmorrey.errors import DomainError, PreconditionError
from roughmorrey.grid import make_grid


def test_evaluate_examples():
    assert K.evaluate(K.constant_kernel(2), np.array([3.0, 4.0]) / 5 * 7) == 1
    assert K.evaluate(K.sign_kernel(1), [-2.5]) == -1
    assert K.evaluate(K.cos_kernel(256), [5.0, 0.0]) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        K.evaluate(K.sign_kernel(1), [0.0])


def test_homogeneous_of_degree_zero(rng):
    k = K.sign_cos_kernel(128)
    x = rng.normal(size=(50, 2))
    for mu in (0.01, 3.0, 1e4):
        assert np.array_equal(k(x), k(mu * x))


def test_ls_sphere_norm():
    assert K.ls_sphere_norm(K.constant_kernel(1), 2) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert K.ls_sphere_norm(K.constant_kernel(2), 2) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)
    assert K.ls_sphere_norm(K.sign_kernel(1), np.inf) == 1


def test_cancellation():
    assert K.cancellation_defect(K.sign_kernel(1)) == 0
    assert K.cancellation_defect(K.constant_kernel(1)) == 2
    assert K.cancellation_defect(K.cos_kernel(256)) <= 1e-12


def test_lipschitz_seminorm():
    assert K.lip_gamma_seminorm(K.constant_kernel(2), 1.0) == 0
    assert 0 < K.lip_gamma_seminorm(K.cos_kernel(256), 1.0) <= 1.01
    assert K.lip_gamma_seminorm(K.sign_cos_kernel(256), 1.0) > 10


def test_ls_ball_bound():
    g = make_grid(1, 1.0, 2.0**-6)
    k = K.sign_kernel(1, s=4.0)
    rep = K.ls_ball_bound(k, 4.0, [0.1], [0.0], 0.5, g)
    assert rep.lhs <= rep.rhs
    with pytest.raises(PreconditionError):
        K.ls_ball_bound(k, 4.0, [0.7], [0.0], 0.5, g)


def test_csv_kernel(tmp_path):
    path = tmp_path / "k.csv"
    np.savetxt(path, np.cos(np.linspace(0, 2 * np.pi, 64, endpoint=False))[:, None], delimiter=",")
    k = K.load_kernel_csv(path, 2)
    assert k.quadrature.size == 64
