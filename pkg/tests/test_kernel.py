import math

import numpy as np
import pytest
from scipy.special import airy

from multicritical.kernel import (
    check_identities,
    density_asymptotic,
    diag,
    eval_kernel,
    kernel_matrix,
    projectivity_residual,
)


def classical_airy_kernel(x, y):
    ax, apx, _, _ = airy(x)
    ay, apy, _, _ = airy(y)
    return (ax * apy - apx * ay) / (x - y)


def test_order_two_is_the_airy_kernel():
    for x, y in [(0.0, 1.0), (-2.5, 0.3), (1.7, -4.0)]:
        assert eval_kernel(2, x, y) == pytest.approx(classical_airy_kernel(x, y), abs=1e-12)


def test_order_two_diagonal_at_origin():
    expected = airy(0.0)[1] ** 2
    assert expected == pytest.approx(0.0669874838, abs=1e-10)
    assert diag(2, 0.0) == pytest.approx(expected, abs=1e-13)
    assert eval_kernel(2, 0.0, 0.0) == pytest.approx(expected, abs=1e-13)


def test_near_diagonal_uses_continuous_limit():
    delta = 1e-6
    for order in (2, 3):
        x = 0.4
        near = eval_kernel(order, x - delta / 4, x + delta / 4)
        assert near == pytest.approx(diag(order, x), abs=1e-10)


def test_odd_order_parity():
    assert eval_kernel(3, 0.7, -0.3) == pytest.approx(eval_kernel(3, -0.7, 0.3), abs=1e-12)
    assert diag(3, 1.9) == pytest.approx(diag(3, -1.9), abs=1e-12)


def test_order_two_density_decays_on_the_right():
    assert diag(2, 10.0) < 1e-8


def test_density_asymptotic_values():
    expected = math.sqrt(8.0) / math.pi - math.cos(4.0 / 3.0 * 8.0**1.5) / (4 * math.pi * 8.0)
    assert density_asymptotic(2, -8.0) == pytest.approx(expected, rel=1e-14)
    assert density_asymptotic(3, 8.0) == density_asymptotic(3, -8.0)
    assert 0 < density_asymptotic(2, 8.0) < 1e-6


def test_kernel_matrix_shape_and_entries():
    xs = np.array([-1.0, 0.0, 1.5])
    ys = np.array([0.5, 2.0])
    mat = kernel_matrix(3, xs, ys)
    assert mat.shape == (3, 2)
    assert mat[2, 0] == pytest.approx(eval_kernel(3, 1.5, 0.5), abs=1e-13)


@pytest.mark.parametrize("order", [2, 3, 4, 5])
def test_structural_identities(order):
    res = check_identities(order, np.linspace(-3.0, 3.0, 7))
    assert res["diagonal_sum"] < 1e-8
    assert res["derivative"] < 1e-5
    if order % 2 == 1:
        assert res["parity"] < 1e-9


def test_truncated_projectivity_improves_with_the_window():
    residuals = [projectivity_residual(2, 0.0, 1.0, T) for T in (20.0, 30.0, 40.0)]
    assert residuals[0] > residuals[1] > residuals[2]


def test_truncated_projectivity_matches_scipy_quadrature():
    T = 20.0
    z, w = np.polynomial.legendre.leggauss(1400)
    z, w = T * z, T * w
    ref = abs(np.sum(w * classical_airy_kernel(0.0, z) * classical_airy_kernel(z, 1.0)) - classical_airy_kernel(0.0, 1.0))
    assert projectivity_residual(2, 0.0, 1.0, T) == pytest.approx(ref, abs=1e-10)


def test_truncated_projectivity_reaches_1e_4_at_forty():
    # Expected to fail: the cut-off tail decays like T^(-1/2); the residual is 2.4e-3 here.
    assert projectivity_residual(2, 0.0, 1.0, 40.0) <= 1e-4


def test_projectivity_refuses_odd_orders():
    with pytest.raises(ValueError):
        projectivity_residual(3, 0.0, 1.0, 10.0)
