import csv
import io
import json
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from hupstab import constants as cst
from hupstab.polygauss import PolyGaussFn

from conftest import polygauss


def test_lower_bound_forms_agree():
    for N in range(2, 30):
        for k in range(0, 8):
            assert_allclose(cst.lower_bound(N, k), cst.lower_bound_direct(N, k), rtol=1e-12, atol=1e-13)


def test_lower_bound_high_precision():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    for N in (10, 1e3, 1e5, 1e6):
        exact = mp.sqrt(mp.mpf(N) ** 2 + 4 * N - 4) - N
        assert_allclose(cst.k_of_n(N), float(exact), rtol=1e-13)
        assert_allclose(cst.lower_bound(N, 1), float(exact), rtol=1e-13)


def test_k_of_n_limit():
    assert abs(cst.k_of_n(1e6) - 2.0) < 1e-2
    assert cst.k_of_n(2) == pytest.approx(math.sqrt(8) - 2, rel=1e-14)
    ks = [cst.k_of_n(N) for N in range(2, 200)]
    assert all(a < b for a, b in zip(ks, ks[1:]))


@pytest.mark.parametrize("N", range(2, 11))
def test_k_of_n_is_min_over_sectors(N):
    assert min(cst.lower_bound(N, k) for k in range(1, 40)) == pytest.approx(cst.k_of_n(N), rel=1e-14)


@pytest.mark.parametrize("N", [2, 3, 7, 10])
@pytest.mark.parametrize("k", [0, 1, 2, 4])
def test_gaussian_quotient_closed_form(N, k):
    assert_allclose(cst.gaussian_quotient(N, k), 2 * k - 4 * k / (N + 2 * k), rtol=1e-10, atol=1e-12)


def test_gaussian_quotient_k1():
    for N in range(2, 11):
        assert abs(cst.gaussian_quotient(N, 1) - 2 * N / (N + 2)) <= 1e-10


@given(polygauss(), st.integers(2, 8), st.integers(1, 4))
def test_completion_of_squares_identity(f, N, k):
    K0 = cst.lower_bound(N, k)
    scale = cst.sector_numerator(f, N, k)
    for K in (K0, 0.5 * K0, 0.0):
        lhs, rhs, coef = cst.completion_of_squares(f, N, k, K)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs), abs(scale))
    assert abs(cst.completion_coefficient(N, k, K0)) <= 1e-12 * (N + k) ** 2
    assert cst.completion_coefficient(N, k, 0.5 * K0) > 1e-6


@given(polygauss(), st.integers(2, 8), st.integers(1, 4))
def test_quotient_above_lower_bound(f, N, k):
    assert cst.rayleigh_quotient(f, N, k) >= cst.lower_bound(N, k) - 1e-9


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(3)
    M = rng.standard_normal((12, 12))
    C = M + M.T
    w, V = cst.jacobi_eigh(C)
    assert_allclose(np.sort(w), np.linalg.eigvalsh(C), atol=1e-11)
    assert_allclose(V @ np.diag(w) @ V.T, C, atol=1e-11)


def test_generalized_eig_matches_scipy():
    rng = np.random.default_rng(4)
    M = rng.standard_normal((10, 10))
    B = M @ M.T + 10 * np.eye(10)
    Q = rng.standard_normal((10, 10))
    A = Q + Q.T
    lam, x = cst.min_generalized_eig(A, B)
    ref = scipy.linalg.eigh(A, B, eigvals_only=True)[0]
    assert_allclose(lam, ref, rtol=1e-11)
    assert_allclose(A @ x, lam * (B @ x), atol=1e-10)


def test_singular_gram_raises():
    B = np.ones((3, 3))
    with pytest.raises(cst.ConditioningError):
        cst.min_generalized_eig(np.eye(3), B)


@pytest.mark.parametrize("kind", ["hybrid", "monomial"])
def test_assembly_matches_exact_quotient(kind):
    N, k, m, s = 3, 1, 8, 1.0
    A, B = cst.assemble_rayleigh(N, k, m, s, kind)
    x = np.random.default_rng(5).standard_normal(m)
    f = cst.basis_function(x, m, s, kind)
    assert_allclose(x @ A @ x / (x @ B @ x), cst.rayleigh_quotient(f, N, k) + N + 2, rtol=1e-8)


def test_bases_are_nested():
    p8, b8 = cst.basis_terms(8, 1.0)
    p16, b16 = cst.basis_terms(16, 1.0)
    pairs16 = set(zip(p16, b16))
    assert all(pair in pairs16 for pair in zip(p8, b8))
    with pytest.raises(ValueError):
        cst.basis_terms(4, 1.0, "fourier")


@pytest.mark.parametrize("N", [2, 3, 4, 6])
def test_c_n1_matches_reference(N):
    est = cst.estimate_C(N, 1)
    assert est.converged
    assert abs(est.value - cst.reference_value(N)) < 1e-6
    # Rayleigh-Ritz is variational: the estimate is an upper bound
    assert est.value >= cst.reference_value(N) - 1e-9
    f = est.minimizer()
    assert_allclose(cst.rayleigh_quotient(f, N, 1), est.value, rtol=1e-8)


def test_sector_zero_vanishes():
    est = cst.estimate_C(3, 0)
    assert abs(est.value) < 1e-8 and est.converged


@pytest.mark.parametrize("N, k", [(2, 2), (5, 3), (10, 4)])
def test_sandwich(N, k):
    est = cst.estimate_C(N, k)
    assert est.converged and est.respects_sandwich()


def test_monomial_basis_is_an_upper_bound():
    est = cst.estimate_C(2, 1, kind="monomial")
    assert est.value >= cst.reference_value(2) - 1e-9


def test_bounds_only_beyond_sector_cap():
    est = cst.estimate_C(58, 2)
    assert math.isnan(est.value) and not est.converged
    assert est.diagnostics
    assert est.to_dict()["value"] is None


def test_certificate():
    cert = cst.estimate_C_N(3, kmax=5)
    assert cert.certified
    assert all(b > cert.estimate.value for b in cert.sector_lower_bounds.values())
    with pytest.raises(ValueError):
        cst.estimate_C_N(3, kmax=1)


def test_m_list_for():
    assert cst.m_list_for(24) == (8, 16, 24)
    with pytest.raises(ValueError):
        cst.m_list_for(2)


def test_sweep_order_and_outputs():
    a = cst.sweep([3, 2], 1, basis=12, workers=1)
    b = cst.sweep([2, 3], 1, basis=12, workers=2)
    assert [(e.N, e.k) for e in a] == [(2, 0), (2, 1), (3, 0), (3, 1)]
    assert cst.to_csv(a) == cst.to_csv(b)
    text = cst.to_csv(a)
    lines = text.splitlines()
    assert lines[0] == "# hupstab-report v1"
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert tuple(rows[0]) == cst.CSV_COLUMNS
    assert rows[1]["reference"] and not rows[0]["reference"]
    data = json.loads(cst.to_json(a))
    assert data[1]["N"] == 2 and data[1]["k"] == 1
