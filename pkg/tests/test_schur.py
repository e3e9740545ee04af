import math

import numpy as np
import pytest
from scipy.special import jv

from multicritical.hiairy import ConvergenceError
from multicritical.schur import (
    MiwaParams,
    biorthonormality_defect,
    correlation,
    discrete_kernel,
    dynamic_range,
    kernel_matrix,
    multicritical,
    partition_function,
    projectivity_defect,
    scaling_error,
    tuning_report,
    wave_coeffs,
)


def bessel_kernel(r, s, theta, terms=80):
    return math.fsum(jv(r + k - 0.5, 2 * theta) * jv(s + k - 0.5, 2 * theta) for k in range(1, terms))


def test_partition_function_values():
    assert partition_function(MiwaParams.plancherel(0.7)) == pytest.approx(math.exp(0.49), rel=1e-14)
    assert partition_function(MiwaParams((0.0,), (0.0,))) == 1.0
    assert partition_function(MiwaParams((1.0, 0.5), (0.2, 0.1))) == pytest.approx(math.exp(0.2 + 2 * 0.05), rel=1e-14)


def test_params_round_trip_through_json(tmp_path):
    params = MiwaParams((1.0, -0.25), (0.5,))
    assert params.t_tilde == (0.5, 0.0)
    path = tmp_path / "miwa.json"
    path.write_text(params.to_json())
    assert MiwaParams.load(path) == params
    with pytest.raises(ValueError):
        MiwaParams.from_json('{"t": [1.0]}')
    with pytest.raises(ValueError):
        MiwaParams((float("inf"),), ())


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.0])
def test_plancherel_coefficients_are_bessel(theta):
    coeffs = wave_coeffs(MiwaParams.plancherel(theta), 40)
    n = np.arange(-30, 31)
    assert np.max(np.abs(coeffs.values(n) - jv(n, 2 * theta))) < 1e-10
    assert np.max(np.abs(coeffs.values(n, tilde=True) - jv(n, 2 * theta))) < 1e-10


def test_zero_times_give_the_delta_sequence():
    coeffs = wave_coeffs(MiwaParams((0.0,), (0.0,)), 10)
    n = np.arange(-10, 11)
    assert np.array_equal(coeffs.values(n) != 0, n == 0)
    assert discrete_kernel(coeffs, -0.5, -0.5, 5) == pytest.approx(1.0, abs=1e-15)
    assert discrete_kernel(coeffs, 0.5, 0.5, 5) == pytest.approx(0.0, abs=1e-15)
    assert discrete_kernel(coeffs, -1.5, -0.5, 5) == pytest.approx(0.0, abs=1e-15)


def test_discrete_kernel_matches_bessel_kernel():
    coeffs = wave_coeffs(MiwaParams.plancherel(1.0), 80)
    for r, s in [(0.5, 1.5), (-2.5, 0.5), (3.5, 3.5)]:
        assert discrete_kernel(coeffs, r, s) == pytest.approx(bessel_kernel(r, s, 1.0), abs=1e-13)


def test_discrete_kernel_rejects_integers_and_short_tables():
    coeffs = wave_coeffs(MiwaParams.plancherel(1.0), 20)
    with pytest.raises(ValueError):
        discrete_kernel(coeffs, 1.0, 0.5)
    with pytest.raises(ConvergenceError):
        discrete_kernel(coeffs, 0.5, 0.5, 40)


def test_correlation_is_a_kernel_determinant():
    coeffs = wave_coeffs(MiwaParams.plancherel(1.0), 80)
    assert correlation(coeffs, [1.5]) == discrete_kernel(coeffs, 1.5, 1.5)
    K = [[bessel_kernel(a, b, 1.0) for b in (0.5, 1.5)] for a in (0.5, 1.5)]
    brute = K[0][0] * K[1][1] - K[0][1] * K[1][0]
    assert correlation(coeffs, [0.5, 1.5]) == pytest.approx(brute, abs=1e-13)
    with pytest.raises(ValueError):
        correlation(coeffs, [0.5, 0.5])


def test_kernel_matrix_is_square():
    coeffs = wave_coeffs(MiwaParams.plancherel(0.5), 40)
    assert kernel_matrix(coeffs, [-0.5, 0.5, 1.5]).shape == (3, 3)


def test_biorthonormality_and_projectivity():
    coeffs = wave_coeffs(MiwaParams.plancherel(2.0), 60)
    assert biorthonormality_defect(coeffs) < 1e-8
    big = wave_coeffs(MiwaParams.plancherel(2.0), 260)
    assert projectivity_defect(big, [-1.5, 0.5, 2.5], 200) < 1e-8


@pytest.mark.parametrize("p", [2, 3, 4, 5])
def test_multicritical_tuning(p):
    params = multicritical(p, 1.0)
    report = tuning_report(params, p)
    assert max(report.residual_alphas) <= 1e-12
    assert report.alpha_p == pytest.approx(1.0, abs=1e-12)
    if p % 2 == 1:
        assert report.beta == pytest.approx(6.0)


def test_plancherel_is_the_second_order_tuning():
    params = multicritical(2, 0.8)
    assert params.t == pytest.approx((0.8, 0.0))
    assert params.alpha(1) == 0.0
    assert params.beta == pytest.approx(1.6)


def test_odd_tuning_switches_to_multiprecision_when_needed():
    params = multicritical(3, 1.0).scaled(1.0 / 0.05)
    assert dynamic_range(params) > 12
    coeffs = wave_coeffs(params, 40)
    assert coeffs.method == "series"
    assert coeffs.dps > 30


def test_plancherel_scaling_at_the_origin():
    table = scaling_error(2, MiwaParams.plancherel(1.0), 0.025, [(0.0, 0.0)])
    assert table.lattice[0][0] == pytest.approx(80.5)
    assert table.max_realized_error < 0.05
