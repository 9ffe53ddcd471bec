import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from hupstab.harmonics import SeparableFn, harmonic_norm, sector_energies
from hupstab.manifold import (
    BETA_BRACKET,
    UnsupportedInputError,
    d2_objective,
    dist_d2_partial,
    dist_grad_norm_matched,
    dist_grad_pinned,
    dist_grad_to_shup,
    dist_l2_to_hup,
    dist_vector_cfhup,
    gaussian_gradient_norm_sq,
    gaussian_l2_norm_sq,
    grad_distance_objective,
    grad_seminorm_sq,
    search_log_beta,
)
from hupstab.polygauss import PolyGaussFn
from hupstab.verify import corpus_rng, random_profile

from conftest import polygauss
from oracles import brute_d2, brute_distance, brute_norm_matched

PERTURBED = PolyGaussFn.from_terms([([1.0, 0.3], 0.5), ([-0.2], 1.4)])


def test_gaussian_norms_closed_form():
    from hupstab.functionals import energies
    for N in (2, 3, 6):
        for b in (0.4, 1.0, 3.0):
            e = energies(PolyGaussFn.gaussian(1.0, 0.5 * b), N)
            assert_allclose(gaussian_gradient_norm_sq(N, b), e.grad, rtol=1e-13)
            assert_allclose(gaussian_l2_norm_sq(N, b), e.l2, rtol=1e-13)


def test_search_finds_parabola_minimum():
    s = search_log_beta(lambda b: (np.log(b) - 1.3) ** 2)
    assert s.converged
    assert_allclose(math.log(s.beta), 1.3, atol=1e-8)


def test_search_reports_boundary_minimum():
    s = search_log_beta(lambda b: b)
    assert not s.converged


@pytest.mark.parametrize("N", [2, 3, 5])
def test_members_have_zero_distance(N):
    rng = np.random.default_rng(N)
    for _ in range(100):
        a = rng.uniform(-3, 3)
        b = math.exp(rng.uniform(math.log(0.05), math.log(20)))
        u = PolyGaussFn.gaussian(a, 0.5 * b)
        assert dist_grad_to_shup(u, N).value_sq <= 1e-12 * grad_seminorm_sq(u, N)
        assert dist_l2_to_hup(u, N).value_sq <= 1e-12 * float(a * a * gaussian_l2_norm_sq(N, b))


def test_member_parameters_recovered():
    r = dist_grad_to_shup(PolyGaussFn.gaussian(5.0, 1.0), 3)
    assert_allclose([r.alpha_star, r.beta_star], [5.0, 2.0], rtol=1e-8)
    assert r.converged


@pytest.mark.parametrize("N", [2, 3])
def test_grad_distance_vs_brute_force(N):
    ref, a, b = brute_distance(PERTURBED, N, "grad")
    res = dist_grad_to_shup(PERTURBED, N)
    assert_allclose(res.value_sq, ref, rtol=1e-6)
    assert_allclose([res.alpha_star, res.beta_star], [a, b], rtol=1e-4)


def test_l2_distance_vs_brute_force():
    ref, a, b = brute_distance(PERTURBED, 3, "l2")
    res = dist_l2_to_hup(PERTURBED, 3)
    assert_allclose(res.value_sq, ref, rtol=1e-6)


def test_norm_matched_vs_brute_force():
    res = dist_grad_norm_matched(PERTURBED, 2)
    assert_allclose(res.value_sq, brute_norm_matched(PERTURBED, 2), rtol=1e-6)


@given(polygauss(), st.sampled_from([2, 3, 4]))
def test_competitor_bound_and_ordering(u, N):
    res = dist_grad_to_shup(u, N)
    G = grad_seminorm_sq(u, N)
    rng = np.random.default_rng(0)
    betas = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), 10))
    assert np.all(res.value_sq <= grad_distance_objective(u, N, betas) + 1e-12 * G)
    # alpha = 0 is a competitor
    assert res.value_sq <= G * (1 + 1e-12)
    assert dist_grad_norm_matched(u, N).value_sq >= res.value_sq - 1e-10 * G
    l2 = dist_l2_to_hup(u, N)
    assert l2.value_sq <= sector_energies(SeparableFn.from_profiles(N, {0: u}), "l2") * (1 + 1e-12)


def test_degenerate_beta_endpoints_lose():
    for i in range(20):
        u = random_profile(corpus_rng(1, 3, i))
        res = dist_grad_to_shup(u, 3)
        ends = grad_distance_objective(u, 3, np.array(BETA_BRACKET))
        assert np.all(ends > res.value_sq)


def test_pinned_distance():
    res = dist_grad_pinned(PolyGaussFn.gaussian(2.5, 0.5), 4, 1.0)
    assert res.value_sq <= 1e-12
    assert_allclose(res.alpha_star, 2.5, rtol=1e-13)
    assert dist_grad_pinned(PERTURBED, 3).value_sq >= dist_grad_to_shup(PERTURBED, 3).value_sq


def test_norm_matched_requires_gradient():
    with pytest.raises(ValueError):
        dist_grad_norm_matched(PolyGaussFn.zero(), 3)


def test_cfhup_field_parameters():
    u = PolyGaussFn.gaussian(1.0, 0.5)
    res = dist_vector_cfhup(u, 3)
    assert res.value_sq <= 1e-12
    # U = -r exp(-r^2/2) e_r = alpha exp(-beta r^2) x with alpha=-1, beta=1/2
    assert_allclose([res.alpha_star, res.beta_star], [-1.0, 0.5], rtol=1e-6)
    assert dist_vector_cfhup(PERTURBED, 3).value_sq == dist_grad_to_shup(PERTURBED, 3).value_sq
    with pytest.raises(ValueError):
        dist_vector_cfhup(u, 3, "h1")


def test_cfhup_vs_brute_force():
    ref, _, _ = brute_distance(PERTURBED, 2, "grad")
    assert_allclose(dist_vector_cfhup(PERTURBED, 2).value_sq, ref, rtol=1e-6)


def test_d2_pure_gaussian():
    s = SeparableFn.from_profiles(3, {0: PolyGaussFn.gaussian(1.0, 1.0)})
    res = dist_d2_partial(s)
    assert res.value_sq <= 1e-12 and abs(res.d_star) <= 1e-12


def test_d2_of_affine_gaussian_keeps_first_integrand():
    # (1 + x_1) e^{-|x|^2}: the first integrand sees the x_1 part, so d2^2 = ||x_1 e^{-|x|^2}||^2
    g = PolyGaussFn.gaussian(1.0, 1.0)
    c1 = harmonic_norm(3, 1)
    s = SeparableFn.from_profiles(3, {0: g, 1: g.scaled(1.0 / c1)})
    res = dist_d2_partial(s)
    assert_allclose(res.value_sq, sector_energies(s.restrict(1), "l2"), rtol=1e-9)
    assert_allclose(res.d_star, 1.0, rtol=1e-6)
    assert_allclose(res.beta_star, 2.0, rtol=1e-6)


def test_d2_vs_brute_force():
    s = SeparableFn.from_profiles(3, {0: PERTURBED, 1: PolyGaussFn.from_terms([([0.4, -0.1], 0.8)])})
    res = dist_d2_partial(s)
    assert_allclose(res.value_sq, brute_d2(s), rtol=1e-6)
    assert np.all(d2_objective(s, np.array([0.1, 1.0, 10.0])) >= res.value_sq)


def test_d2_rejects_higher_sectors():
    with pytest.raises(UnsupportedInputError):
        dist_d2_partial(SeparableFn.from_profiles(3, {2: PERTURBED}))
