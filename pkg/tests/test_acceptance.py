"""The eight acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from hupstab import constants as cst
from hupstab import verify as vf
from hupstab.harmonics import SeparableFn, direct_energies_mc, sector_energies
from hupstab.manifold import dist_grad_to_shup, dist_l2_to_hup

from oracles import brute_distance

IDENTITIES = ("hup_identity", "hessian_gaussian_identity", "lift_w", "x2grad_decomposition",
              "completion_of_squares", "curl_free_energy")
INEQUALITIES = ("first_order_stability", "second_order_stability", "norm_matched_stability",
                "second_order_poincare", "radial_poincare_gap")


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_identity_suite(report):
    worst, slowest, failed = 0.0, 0.0, []
    for N in (2, 3, 5):
        t = time.perf_counter()
        checks = {c.name: c for c in vf.run_identity_suite(N, corpus_size=100, seed=42)}
        slowest = max(slowest, time.perf_counter() - t)
        for name in IDENTITIES:
            worst = max(worst, checks[name].residual)
            if checks[name].residual > 1e-9:
                failed.append((N, name))
    ok = not failed and slowest <= 10.0
    report(1, ok, f"identity residual max {worst:.2e} (<= 1e-9), slowest N {slowest:.1f}s (<= 10s)"
           + (f", failures {failed}" if failed else ""))


def test_criterion_2_stability_constant(report):
    t = time.perf_counter()
    errs = {N: abs(cst.estimate_C(N, 1).value - cst.reference_value(N)) for N in range(2, 11)}
    elapsed = time.perf_counter() - t
    c21 = cst.estimate_C(2, 1).value
    ok = max(errs.values()) < 1e-3 and 0.8274 <= c21 <= 0.8294 and elapsed <= 30.0
    report(2, ok, f"max |C(N,1) - ref| = {max(errs.values()):.2e} over N=2..10, C(2,1) = {c21:.8f}, "
           f"{elapsed:.1f}s (<= 30s)")


def test_criterion_3_sandwich(report):
    bad, converged, total = [], 0, 0
    for N in range(2, 11):
        for k in range(0, 5):
            est = cst.estimate_C(N, k)
            total += 1
            if est.converged:
                converged += 1
                if not (est.lower - 1e-6 <= est.value <= min(2 * k, est.gaussian_quotient) + 1e-6):
                    bad.append((N, k))
    gq = max(abs(cst.gaussian_quotient(N, 1) - 2 * N / (N + 2)) for N in range(2, 11))
    ok = not bad and gq <= 1e-10
    report(3, ok, f"{converged}/{total} cells converged, sandwich violations {bad}, "
           f"max |gq(N,1) - 2N/(N+2)| = {gq:.1e}")


def test_criterion_4_certificate(report):
    gaps = []
    for N in range(2, 11):
        c = cst.estimate_C(N, 1).value
        gaps.append(min(cst.lower_bound(N, k) for k in range(2, 6)) - c)
    ok = min(gaps) > 0
    report(4, ok, f"min over N of lower_bound(N,k>=2) - C(N,1) = {min(gaps):.4f} (> 0)")


def test_criterion_5_asymptotics(report):
    lim = abs(cst.k_of_n(1e6) - 2.0)
    rel = max(abs(cst.k_of_n(N) - cst.lower_bound(N, 1)) / cst.k_of_n(N)
              for N in [2, 3, 10, 100, 1e3, 1e4, 1e5, 1e6])
    ok = lim < 1e-2 and rel <= 1e-12
    report(5, ok, f"|K(1e6) - 2| = {lim:.2e}, max relative |K(N) - lower_bound(N,1)| = {rel:.1e}")


def test_criterion_6_inequality_suite(report):
    worst, slowest, failed = -math.inf, 0.0, []
    for N in (2, 3, 5):
        t = time.perf_counter()
        checks = {c.name: c for c in vf.run_inequality_suite(N, trials=200, seed=7)}
        slowest = max(slowest, time.perf_counter() - t)
        for name in INEQUALITIES:
            worst = max(worst, checks[name].residual)
            if not checks[name].passed:
                failed.append((N, name))
    ok = not failed and slowest <= 60.0
    report(6, ok, f"max signed violation {worst:.2e} (<= 1e-9), slowest N {slowest:.1f}s (<= 60s)"
           + (f", failures {failed}" if failed else ""))


def test_criterion_7_sharpness(report):
    ratios = {N: vf.sharpness_probe(N) for N in (2, 3, 5)}
    ok = all(r.passed for r in ratios.values())
    shown = ", ".join(f"N={N}: {r.details.get('ratio', float('nan')):.10f}" for N, r in ratios.items())
    report(7, ok, f"ratios in [0.95, 1+1e-6]: {shown}")


def test_criterion_8_oracles(report):
    worst_sigma = 0.0
    for N in (2, 3):
        rng = vf.corpus_rng(8, N, 0)
        s = SeparableFn.from_profiles(N, {0: vf.random_profile(rng), 1: vf.random_profile(rng)})
        for i, name in enumerate(("grad", "lap", "x2_grad", "l2", "x2_l2")):
            mc = direct_energies_mc(s, name, samples=1_000_000, seed=100 + i)
            worst_sigma = max(worst_sigma, abs(mc.estimate - sector_energies(s, name)) / mc.std_error)
    worst_rel = 0.0
    for i in range(10):
        N = 2 + i % 2
        u = vf.random_profile(vf.corpus_rng(8, N, 10 + i))
        metric = "grad" if i % 4 < 2 else "l2"
        res = dist_grad_to_shup(u, N) if metric == "grad" else dist_l2_to_hup(u, N)
        ref = brute_distance(u, N, metric)[0]
        worst_rel = max(worst_rel, abs(res.value_sq - ref) / max(abs(ref), 1e-300))
    ok = worst_sigma <= 3.0 and worst_rel <= 1e-4
    report(8, ok, f"Monte-Carlo max deviation {worst_sigma:.2f} sigma (<= 3), "
           f"distance vs brute force max rel {worst_rel:.1e} (<= 1e-4)")
