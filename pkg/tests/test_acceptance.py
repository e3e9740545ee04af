"""Acceptance criteria, one test each; every test prints a PASS/FAIL line before asserting."""

import math
import time

import numpy as np
import pytest
from scipy.special import airy, jv

from multicritical.fredholm import (
    GapProbabilitySpec,
    IntervalSet,
    fit_exponent,
    gap_probability,
    spacing_curve,
    tw_tail,
    verify_structure,
)
from multicritical.hiairy import ai_derivatives, ode_residual
from multicritical.kernel import check_identities, density_asymptotic, diag
from multicritical.painleve import residual_coupled, solve_even_hierarchy, solve_p3_coupled, solve_single_interval
from multicritical.schur import (
    MiwaParams,
    biorthonormality_defect,
    multicritical,
    projectivity_defect,
    scaling_error,
    wave_coeffs,
)


def verdict(report, number, title, ok, detail):
    report(f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
    return ok


def test_criterion_01_classical_airy(report):
    start = time.perf_counter()
    z = np.linspace(-8.0, 4.0, 241)
    vals = ai_derivatives(2, z, 1)
    ref = airy(z)
    err = max(np.max(np.abs(vals[0] - ref[0])), np.max(np.abs(vals[1] - ref[1])))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-8 and elapsed < 10
    assert verdict(report, 1, "special-function oracle", ok, f"max error {err:.2e} (<= 1e-8), {elapsed:.1f} s (< 10 s)")


def test_criterion_02_ode_residuals(report):
    start = time.perf_counter()
    z = np.linspace(-5.0, 5.0, 101)
    worst = {}
    for order in (2, 3, 4, 5):
        res = float(np.max(ode_residual(order, z)))
        if order % 2 == 1:
            res = max(res, float(np.max(ode_residual(order, z, tilde=True))))
        worst[order] = res
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-6 and elapsed < 60
    detail = ", ".join(f"p={p} {r:.1e}" for p, r in worst.items())
    assert verdict(report, 2, "differential equations", ok, f"{detail} (<= 1e-6), {elapsed:.1f} s (< 60 s)")


def test_criterion_03_kernel_identities(report):
    points = np.linspace(-4.75, 4.75, 20)
    res = {order: check_identities(order, points) for order in (2, 3)}
    diag_sum = max(r["diagonal_sum"] for r in res.values())
    deriv = max(r["derivative"] for r in res.values())
    parity = res[3]["parity"]
    ok = diag_sum <= 1e-8 and deriv <= 1e-5 and parity <= 1e-9
    detail = f"diagonal identity {diag_sum:.1e} (<= 1e-8), derivative {deriv:.1e} (<= 1e-5), parity {parity:.1e} (<= 1e-9)"
    assert verdict(report, 3, "kernel identities", ok, detail)


def test_criterion_04_schur_layer(report):
    n = np.arange(-30, 31)
    bessel = 0.0
    for theta in (0.25, 0.5, 1.0, 1.5, 2.0):
        coeffs = wave_coeffs(MiwaParams.plancherel(theta), 40)
        ref = jv(n, 2 * theta)
        bessel = max(bessel, np.max(np.abs(coeffs.values(n) - ref)), np.max(np.abs(coeffs.values(n, tilde=True) - ref)))
    biorth = biorthonormality_defect(wave_coeffs(MiwaParams.plancherel(2.0), 60))
    proj = projectivity_defect(wave_coeffs(MiwaParams.plancherel(2.0), 260), [-2.5, -0.5, 0.5, 1.5, 3.5], 200)
    ok = bessel <= 1e-10 and biorth <= 1e-8 and proj <= 1e-8
    detail = f"Bessel {bessel:.1e} (<= 1e-10), biorthonormality {biorth:.1e} (<= 1e-8), projectivity {proj:.1e} (<= 1e-8)"
    assert verdict(report, 4, "Schur layer", ok, detail)


SCALING_POINTS = [(0.0, 0.0), (-1.0, 0.5), (0.5, 1.0), (-2.0, -1.5), (1.5, -0.5)]
EPSILONS = (0.1, 0.05, 0.025)


def test_criterion_05_scaling_limit(report):
    start = time.perf_counter()
    families = {2: MiwaParams.plancherel(1.0), 3: multicritical(3, 1.0)}
    ok = True
    lines = []
    for p, params in families.items():
        tables = [scaling_error(p, params, eps, SCALING_POINTS) for eps in EPSILONS]
        errors = [t.max_error for t in tables]
        realized = [t.max_realized_error for t in tables]
        monotone = all(b < a for a, b in zip(errors, errors[1:]))
        ok &= monotone
        lines.append(
            f"p={p} max error {', '.join(f'{e:.4f}' for e in errors)} "
            f"({'decreasing' if monotone else 'not decreasing'}; at rounded points "
            f"{', '.join(f'{e:.4f}' for e in realized)})"
        )
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    assert verdict(report, 5, "scaling limit", ok, "; ".join(lines) + f"; {elapsed:.0f} s (< 300 s)")


def test_criterion_06_fredholm_sanity(report):
    empty = gap_probability(GapProbabilitySpec(2, IntervalSet())).F
    eps = 1e-3
    small = gap_probability(GapProbabilitySpec(2, IntervalSet.symmetric(eps))).F
    first_order = abs(small - (1.0 - 2.0 * eps * diag(2, 0.0)))
    doubling = 0.0
    for order, intervals in [(2, IntervalSet.symmetric(1.0)), (3, IntervalSet.symmetric(2.0)), (2, IntervalSet.half_line(-1.0))]:
        res = gap_probability(GapProbabilitySpec(order, intervals))
        again = gap_probability(GapProbabilitySpec(order, intervals, quad_order=2 * res.quad_order))
        doubling = max(doubling, abs(again.F - res.F))
    ok = empty == 1.0 and first_order <= 1e-6 and doubling < 1e-10
    detail = f"F(empty)={empty!r}, first-order gap {first_order:.1e} (<= 1e-6), doubling change {doubling:.1e} (< 1e-10)"
    assert verdict(report, 6, "Fredholm sanity", ok, detail)


def test_criterion_07_structure_suite(report):
    start = time.perf_counter()
    h = 1e-4
    worst = dict.fromkeys(["iom", "pq_rel", "even_uv", "parity", "dlogF", "H_prime"], 0.0)
    for s in (0.5, 1.0, 2.0):
        res = verify_structure(GapProbabilitySpec(3, IntervalSet.symmetric(s)))
        for key in ("iom", "pq_rel", "even_uv", "parity"):
            worst[key] = max(worst[key], res[key])
        curve = spacing_curve(3, [s - h, s, s + h])
        dlogF = (math.log(curve.F[2]) - math.log(curve.F[0])) / (2 * h)
        worst["dlogF"] = max(worst["dlogF"], abs(dlogF + 2 * curve.H[1]) / abs(2 * curve.H[1]))
        dH = (curve.H[2] - curve.H[0]) / (2 * h)
        worst["H_prime"] = max(worst["H_prime"], abs(dH - curve.H_prime[1]) / abs(curve.H_prime[1]))
    elapsed = time.perf_counter() - start
    limits = {"iom": 1e-6, "pq_rel": 1e-6, "even_uv": 1e-8, "parity": 1e-8, "dlogF": 1e-4, "H_prime": 1e-4}
    ok = all(worst[k] <= limits[k] for k in limits) and elapsed < 300
    detail = ", ".join(f"{k} {worst[k]:.1e} (<= {limits[k]:.0e})" for k in limits) + f", {elapsed:.1f} s (< 300 s)"
    assert verdict(report, 7, "structure suite p=3", ok, detail)


def test_criterion_08_dual_route_edge_distribution(report):
    start = time.perf_counter()
    traj = solve_even_hierarchy(2, s_end=-2.0, n_points=121)
    mask = traj.s <= 2.0 + 1e-12
    s = traj.s[mask]
    painleve_F = np.exp(traj.log_F[mask])
    fredholm_F = tw_tail(2, s).F
    gap = float(np.max(np.abs(painleve_F - fredholm_F)))
    elapsed = time.perf_counter() - start
    ok = gap <= 1e-5 and s.size >= 10 and elapsed < 120
    detail = f"max |F_fredholm - F_painleve| {gap:.1e} over {s.size} points in [-2, 2] (<= 1e-5), {elapsed:.1f} s (< 120 s)"
    assert verdict(report, 8, "dual-route edge distribution", ok, detail)


def test_criterion_09_large_gap_law(report):
    start = time.perf_counter()
    fits = {2: fit_exponent(2, (1.0, 8.0), n_points=40), 3: fit_exponent(3, (1.0, 7.5), n_points=40)}
    elapsed = time.perf_counter() - start
    ok = elapsed < 600
    parts = []
    for p, fit in fits.items():
        target = 2.0 + 2.0 / p
        ok &= abs(fit.exponent - target) <= 0.15 and fit.C > 0
        parts.append(f"p={p} exponent {fit.exponent:.3f} (target {target:.3f} +- 0.15), C={fit.C:.3g}")
    assert verdict(report, 9, "large-gap law", ok, "; ".join(parts) + f", {elapsed:.0f} s (< 600 s)")


def test_criterion_10_density_asymptotics(report):
    cases = [(2, -8.0), (3, -8.0), (3, 8.0)]
    devs = {case: abs(diag(*case) - density_asymptotic(*case)) / density_asymptotic(*case) for case in cases}
    ok = max(devs.values()) <= 0.03
    detail = ", ".join(f"p={p} x={x:+g} {d:.2%}" for (p, x), d in devs.items()) + " (<= 3%)"
    assert verdict(report, 10, "density asymptotics", ok, detail)


def test_criterion_11_coupled_system_conservation(report):
    drift = solve_p3_coupled(8.0, 2.0, tol=1e-10).drift()
    residual = residual_coupled(5, solve_single_interval(5, 8.0, 2.0, tol=1e-10))
    ok = drift <= 1e-8 and residual <= 1e-6
    detail = f"p=3 drift {drift:.1e} over [2, 8] (<= 1e-8), p=5 residual {residual:.1e} (<= 1e-6)"
    assert verdict(report, 11, "coupled-system conservation", ok, detail)
