import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from hupstab.functionals import energies
from hupstab.harmonics import (
    ENERGY_NAMES,
    SectorComponent,
    SeparableFn,
    UnsupportedSectorError,
    ambient_sector_energies,
    angular_gradient_split,
    direct_energies_mc,
    eigenvalue_ck,
    harmonic_norm,
    harmonic_poly,
    lift_w,
    relative_residual,
    sector_energies,
    x2grad_decomposition,
)
from hupstab.integration import sphere_area
from hupstab.polygauss import ParityError, PolyGaussFn

from conftest import polygauss

V0 = PolyGaussFn.from_terms([([1.0, -0.3], 0.7)])
V1 = PolyGaussFn.from_terms([([0.5, 0.2], 0.9), ([-0.4], 1.6)])
V2 = PolyGaussFn.from_terms([([0.8], 1.1)])


def grid_integral(fn, N, L=7.0, n=None):
    """Trapezoid rule on a box; spectrally accurate for Gaussian-decaying integrands."""
    n = n or (561 if N == 2 else 121)
    ax = np.linspace(-L, L, n)
    h = ax[1] - ax[0]
    pts = np.stack(np.meshgrid(*([ax] * N), indexing="ij"), -1).reshape(-1, N)
    return float(fn(pts).sum() * h**N)


def test_eigenvalues():
    assert eigenvalue_ck(0, 3) == 0
    assert eigenvalue_ck(1, 3) == 2
    assert eigenvalue_ck(2, 5) == 10
    with pytest.raises(ValueError):
        eigenvalue_ck(-1, 3)


@pytest.mark.parametrize("N", [2, 3, 5, 9])
def test_harmonic_norm_against_sphere_average(N):
    rng = np.random.default_rng(N)
    x = rng.standard_normal((400_000, N))
    x /= np.linalg.norm(x, axis=1)[:, None]
    for k in (0, 1, 2):
        P, _ = harmonic_poly(k, x)
        avg = np.mean(P**2)
        target = sphere_area(N + 2 * k) / sphere_area(N)
        assert_allclose(harmonic_norm(N, k) ** 2 * avg, target, rtol=2e-2)
    assert_allclose(harmonic_norm(N, 1) ** 2, 2 * math.pi, rtol=1e-13)
    assert_allclose(harmonic_norm(N, 2), 2 * math.pi, rtol=1e-13)


def test_harmonic_polys_are_harmonic():
    x = np.random.default_rng(0).standard_normal((5, 4))
    h = 1e-4
    for k in (1, 2):
        lap = 0.0
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            lap = lap + (harmonic_poly(k, x + e)[0] - 2 * harmonic_poly(k, x)[0] + harmonic_poly(k, x - e)[0]) / h**2
        assert_allclose(lap, 0.0, atol=1e-5)
    with pytest.raises(UnsupportedSectorError):
        harmonic_poly(3, x)


@pytest.mark.parametrize("N", [2, 3])
def test_cartesian_gradient_and_laplacian_vs_finite_differences(N):
    s = SeparableFn.from_profiles(N, {0: V0, 1: V1, 2: V2})
    x = np.random.default_rng(1).uniform(-1.5, 1.5, (7, N))
    h = 1e-5
    fd_grad = np.zeros_like(x)
    fd_lap = np.zeros(len(x))
    for i in range(N):
        e = np.zeros(N)
        e[i] = h
        fp, fm, f0 = s.value(x + e), s.value(x - e), s.value(x)
        fd_grad[:, i] = (fp - fm) / (2 * h)
        fd_lap += (fp - 2 * f0 + fm) / h**2
    assert_allclose(s.gradient(x), fd_grad, atol=1e-7)
    assert_allclose(s.laplacian(x), fd_lap, atol=2e-4)


@pytest.mark.parametrize("N", [2, 3])
def test_sector_energies_vs_grid_quadrature(N):
    s = SeparableFn.from_profiles(N, {0: V0, 1: V1, 2: V2})
    r2 = lambda x: np.einsum("ij,ij->i", x, x)
    oracle = {
        "l2": lambda x: s.value(x) ** 2,
        "x2_l2": lambda x: r2(x) * s.value(x) ** 2,
        "grad": lambda x: r2(s.gradient(x)),
        "x2_grad": lambda x: r2(x) * r2(s.gradient(x)),
        "lap": lambda x: s.laplacian(x) ** 2,
    }
    for name, fn in oracle.items():
        assert_allclose(sector_energies(s, name), grid_integral(fn, N), rtol=1e-8, err_msg=name)


@given(polygauss(), st.sampled_from([2, 3, 5]), st.integers(0, 4))
def test_sector_energies_vs_polar_formula(v, N, k):
    s = SeparableFn(N, (SectorComponent(k, v),))
    amb = ambient_sector_energies(v, N, k)
    for name in ENERGY_NAMES:
        assert relative_residual(sector_energies(s, name), amb[name]) <= 1e-10


def test_sectors_are_orthogonal():
    s = SeparableFn.from_profiles(3, {0: V0, 1: V1, 2: V2})
    for name in ENERGY_NAMES:
        parts = sum(sector_energies(s.restrict(k), name) for k in (0, 1, 2))
        assert_allclose(sector_energies(s, name), parts, rtol=1e-14)


def test_sector_energies_vs_monte_carlo():
    s = SeparableFn.from_profiles(2, {0: V0, 1: V1})
    for i, name in enumerate(("grad", "lap", "l2")):
        mc = direct_energies_mc(s, name, samples=300_000, seed=5 + i)
        assert mc.agrees_with(sector_energies(s, name), 4.0), name


def test_angular_gradient_split():
    x = np.random.default_rng(2).uniform(-2, 2, (11, 3))
    for k in (0, 1, 2):
        cart, rad, tang = angular_gradient_split(V1, 3, k, x)
        assert_allclose(cart, rad + tang, rtol=1e-12)


@given(polygauss(), st.sampled_from([2, 3, 5]), st.integers(0, 4))
def test_lift_w_equalities(v, N, k):
    d = N + 2 * k
    w = lift_w(v, N, k)
    ev, ew = energies(v, d), energies(w, d + 2)
    assert relative_residual(ev.grad, ew.l2) <= 1e-10
    assert relative_residual(ev.lap, ew.grad) <= 1e-10


@given(polygauss(), st.sampled_from([2, 3, 5, 10]), st.integers(0, 4))
def test_x2grad_decomposition(v, N, k):
    lhs, rhs = x2grad_decomposition(v, N, k)
    assert relative_residual(lhs, rhs) <= 1e-10


def test_abstract_sectors():
    s = SeparableFn.from_profiles(3, {3: V1})
    assert s.components[0].harmonic_id == "abstract"
    assert sector_energies(s, "grad") > 0
    with pytest.raises(UnsupportedSectorError):
        s.value(np.zeros((1, 3)))
    with pytest.raises(UnsupportedSectorError):
        harmonic_norm(3, 3)


def test_validation():
    with pytest.raises(ParityError):
        SectorComponent(1, V1.times_r())
    with pytest.raises(ValueError):
        SeparableFn(3, (SectorComponent(1, V0), SectorComponent(1, V1)))
    with pytest.raises(ValueError):
        sector_energies(SeparableFn.from_profiles(3, {0: V0}), "energy")


def test_spec_round_trip():
    s = SeparableFn.from_profiles(4, {0: V0, 1: V1, 3: V2})
    t = SeparableFn.from_spec(s.to_json())
    assert t == s
    assert t.degrees == (0, 1, 3)


def test_all_sector_energies_matches_individual():
    from hupstab.harmonics import all_sector_energies
    s = SeparableFn.from_profiles(3, {0: V0, 1: V1, 4: V2})
    e = all_sector_energies(s)
    for name in ENERGY_NAMES:
        assert e[name] == pytest.approx(sector_energies(s, name), rel=1e-15)
