"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured figures,
then asserts.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import cmath
import math
import os
import time

import numpy as np
import pytest

from gwtail import precision as prec
from gwtail.asymptotics import amplitude_set, density_series, scaled_column
from gwtail.model import build_two_poly_family, pgf_eval
from gwtail.montecarlo import SimConfig, estimate_ratio, martingale_histogram
from gwtail.phi import phi_gf_eval, phi_table, phi_table_two_poly
from gwtail.pseudo_inverse import b_determinant, b_recurrence, triangular_residual
from gwtail.qmatrix import q_matrix, q_subdiag_check
from gwtail.reference import ReferenceConfig, reference_density, reference_moments

PS = (0.2, 0.4, 0.6)
THREADS = os.cpu_count() or 1
Z_GRID = [r * u for r in (0.05, 0.1, 0.15, 0.2) for u in (1, 1j, -1, cmath.exp(1j * cmath.pi / 4))]


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"
    return emit


def max_rel(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    mask = (a != 0) | (b != 0)
    return float(np.max(np.abs(a[mask] - b[mask]) / np.maximum(np.abs(a[mask]), np.abs(b[mask]))))


def generic_and_specialised(p, mode=prec.STANDARD, J=12, N=200):
    generic = phi_table(q_matrix(build_two_poly_family(p), N, mode), J, N)
    special = phi_table_two_poly(p, J, N, mode)
    return generic, special


def test_c1_generic_specialised_equivalence(report):
    t0 = time.perf_counter()
    worst = max(max_rel(*(prec.to_float(t.values) for t in generic_and_specialised(p))) for p in PS)
    dt = time.perf_counter() - t0
    report("C1 generic/specialised phi", worst <= 1e-10 and dt < 10,
           f"max rel diff {worst:.2e} (<= 1e-10), {dt:.2f} s (< 10 s)")


def _pseudo_inverse_figures(table):
    bs = b_recurrence(table)
    det_err = max(abs(float(b_determinant(table, n)) / float(bs[n]) - 1) for n in range(2, 11))
    return det_err, triangular_residual(table, bs)


def test_c2_pseudo_inverse_consistency(report):
    tables = {p: phi_table_two_poly(p, 12, 200) for p in PS}
    t0 = time.perf_counter()
    figs = [_pseudo_inverse_figures(tables[p]) for p in PS]
    dt = time.perf_counter() - t0
    det_err = max(f[0] for f in figs)
    resid = max(f[1] for f in figs)
    report("C2 pseudo-inverse", det_err <= 1e-9 and resid <= 1e-10 and dt < 1,
           f"recurrence vs determinant {det_err:.2e} (<= 1e-9), residual {resid:.2e} (<= 1e-10), "
           f"{dt:.3f} s (< 1 s)")


def test_c3_schroder_residual(report):
    t0 = time.perf_counter()
    worst = 0.0
    for p in PS:
        env = build_two_poly_family(p)
        table = phi_table(q_matrix(env, 400), 6, 400)
        for j in range(1, 7):
            for z in Z_GRID:
                lhs = sum(w * phi_gf_eval(table, j, pgf_eval(pgf, z)) for w, pgf in env.members)
                worst = max(worst, abs(lhs - table.q_diag[j] * phi_gf_eval(table, j, z)))
    dt = time.perf_counter() - t0
    report("C3 Schroeder residual", worst <= 1e-8 and dt < 30,
           f"max residual {worst:.2e} (<= 1e-8) on {len(Z_GRID)} points, {dt:.2f} s (< 30 s)")


def test_c4_qmatrix_conservation(report):
    t0 = time.perf_counter()
    mass = mean = sub = 0.0
    for p in PS:
        env = build_two_poly_family(p)
        q = q_matrix(env, 200)
        ns = np.arange(201)
        for m in range(1, 61):
            mass = max(mass, abs(q.entries[:, m].sum() - 1))
            mean = max(mean, abs(ns @ q.entries[:, m] - m * env.common_mean))
        for n in range(2, 201):
            computed, closed = q_subdiag_check(env, n)
            if closed != 0:
                sub = max(sub, abs(computed / closed - 1))
    dt = time.perf_counter() - t0
    ok = mass <= 1e-12 and mean <= 1e-10 and sub <= 1e-13 and dt < 5
    report("C4 q-matrix conservation", ok,
           f"mass {mass:.1e} (<= 1e-12), mean {mean:.1e} (<= 1e-10), subdiagonal {sub:.1e} (<= 1e-13), "
           f"{dt:.2f} s (< 5 s)")


# m * |g_j(2m)/g_j(m) - 1| at m = 250, 354, 500, frozen on first run
ASYMPTOTIC_REGRESSION = {
    0.2: ((2.344, 2.899, 4.350), (0.756, 1.074, 0.571), (2.535, 0.524, 0.885)),
    0.4: ((0.0490, 0.0498, 0.0412), (0.4566, 0.4657, 0.4624), (1.187, 1.156, 1.140)),
    0.6: ((0.01185, 0.01205, 0.01219), (0.4301, 0.4298, 0.4295), (1.191, 1.188, 1.186)),
}
ASYMPTOTIC_BOUND = 5.0
MS = (250, 354, 500)


def test_c5_asymptotic_law(report):
    t0 = time.perf_counter()
    worst, drift = 0.0, 0.0
    for p in PS:
        table = phi_table_two_poly(p, 3, 2000)
        for j in range(1, 4):
            for m, frozen in zip(MS, ASYMPTOTIC_REGRESSION[p][j - 1]):
                g1, g2 = scaled_column(table, j, [m, 2 * m])
                v = m * abs(g2 / g1 - 1)
                worst = max(worst, v)
                drift = max(drift, abs(v / frozen - 1))
    dt = time.perf_counter() - t0
    ok = worst <= ASYMPTOTIC_BOUND and drift <= 2e-3 and dt < 30
    report("C5 asymptotic law", ok,
           f"max m|g(2m)/g(m)-1| = {worst:.3f} (<= {ASYMPTOTIC_BOUND}), regression drift {drift:.1e}, "
           f"{dt:.2f} s (< 30 s)")


CMP_X = np.round(np.arange(0.3, 1.5 + 1e-9, 0.01), 10)


def series_curve(p, xs, J=12, M=1000):
    table = phi_table_two_poly(p, J, M)
    return density_series(b_recurrence(table), amplitude_set(table, J, M), J, xs)


_c6_elapsed = []


@pytest.mark.parametrize("p", PS)
def test_c6_series_vs_reference(report, p):
    t0 = time.perf_counter()
    ref = reference_density(build_two_poly_family(p), ReferenceConfig(t=12, y_max=200, dy=0.02, xs=CMP_X),
                            threads=THREADS)
    ser = series_curve(p, CMP_X)
    dev = float(np.max(np.abs(ser.ps - ref.ps) / np.abs(ref.ps)))
    _c6_elapsed.append(time.perf_counter() - t0)
    total = sum(_c6_elapsed)
    report(f"C6 series vs reference p={p}", dev <= 0.05 and total <= 600,
           f"max rel deviation {dev:.4f} (<= 0.05) on [0.3, 1.5], reference depth used "
           f"{ref.meta['t_max_used']}, cumulative {total:.1f} s (<= 600 s)")


def test_c7_reference_moments(report):
    xs = np.round(np.arange(0.01, 6.0 + 1e-9, 0.01), 10)
    figs = []
    for p in PS:
        curve = reference_density(build_two_poly_family(p), ReferenceConfig(t=12, xs=xs), threads=THREADS)
        figs.append((p, *reference_moments(curve)))
    worst = max(max(abs(m - 1), abs(mu - 1)) for _, m, mu in figs)
    detail = ", ".join(f"p={p}: mass {m:.4f} mean {mu:.4f}" for p, m, mu in figs)
    report("C7 reference moments", worst <= 0.03, f"{detail} (each within 3%)")


def test_c8_monte_carlo_cross_oracle(report):
    env = build_two_poly_family(0.2)
    t0 = time.perf_counter()
    ratio, se = estimate_ratio(env, 2, 1, SimConfig(initial=1, horizon=8, trials=100_000_000, seed=2024),
                               threads=THREADS)
    hist = martingale_histogram(env, SimConfig(initial=1, horizon=20, trials=1_000_000, seed=2025),
                                bins=150, x_range=(0.0, 3.0), threads=THREADS)
    dt = time.perf_counter() - t0
    window = (hist.xs >= 0.4) & (hist.xs <= 1.4)
    ref = reference_density(env, ReferenceConfig(xs=hist.xs[window]), threads=THREADS)
    hdev = float(np.max(np.abs(hist.ps[window] - ref.ps) / np.abs(ref.ps)))
    rdev = abs(ratio / 2.0 - 1)
    ok = rdev <= 0.05 and hdev <= 0.05 and dt <= 600
    report("C8 Monte Carlo cross-oracle", ok,
           f"phi_21 estimate {ratio:.4f} +- {se:.4f} (rel {rdev:.4f} <= 0.05), histogram max rel deviation "
           f"{hdev:.4f} (<= 0.05), simulation {dt:.1f} s (<= 600 s)")


def test_c9_precision_guard(report):
    phi_digits, b_digits = [], []
    for p in PS:
        std = generic_and_specialised(p)
        ext = generic_and_specialised(p, prec.EXTENDED)
        for s, e in zip(std, ext):
            phi_digits.append(max_rel(s.values, prec.to_float(e.values)))
            bs_s, bs_e = b_recurrence(s), b_recurrence(e)
            b_digits.append(max_rel(bs_s.values[1:], prec.to_float(bs_e.values[1:])))
            det_s = [float(b_determinant(s, n)) for n in range(2, 11)]
            det_e = [float(b_determinant(e, n)) for n in range(2, 11)]
            b_digits.append(max_rel(det_s, det_e))
    worst = max(phi_digits + b_digits)
    digits = -math.log10(worst) if worst > 0 else float("inf")
    report("C9 precision guard", worst <= 1e-10,
           f"standard vs extended: phi {max(phi_digits):.1e}, b {max(b_digits):.1e}, "
           f"i.e. {digits:.1f} significant digits (>= 10)")
