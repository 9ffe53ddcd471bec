"""Distances from radial (or two-sector) inputs to the Gaussian optimizer families.

Members are written ``alpha * exp(-beta |x|^2 / 2)`` with ``beta > 0``.  For
fixed ``beta`` every distance below is quadratic in the linear parameters, so
those are eliminated in closed form and only ``log beta`` is searched: a coarse
log-spaced grid followed by golden-section refinement.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .harmonics import SeparableFn, harmonic_norm
from .integration import sphere_area
from .polygauss import EVEN, ParityError, PolyGaussFn, gaussian_overlap, pg_derivative, radial_inner

GRID_POINTS = 61
BETA_BRACKET = (1e-3, 1e3)
MAX_EXPANSIONS = 2
LOG_BETA_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class UnsupportedInputError(ValueError):
    """The input lies outside the class a distance is implemented for."""


@dataclass(frozen=True)
class DistanceResult:
    value_sq: float
    alpha_star: float
    beta_star: float
    metric: str
    converged: bool
    evaluations: int
    d_star: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class _Search:
    beta: float
    value: float
    converged: bool
    evaluations: int


def search_log_beta(objective: Callable[[np.ndarray], np.ndarray],
                    bracket: tuple[float, float] = BETA_BRACKET) -> _Search:
    """Minimize ``objective(beta)`` over ``beta > 0``.

    ``objective`` is vectorized over ``beta``.  The coarse grid is widened by a
    decade on the offending side (at most twice) whenever its minimum sits on
    an endpoint; a minimum that stays on the boundary is reported as not
    converged.
    """
    lo, hi = math.log(bracket[0]), math.log(bracket[1])
    evals = 0
    for attempt in range(MAX_EXPANSIONS + 1):
        grid = np.linspace(lo, hi, GRID_POINTS)
        vals = np.asarray(objective(np.exp(grid)), dtype=float)
        evals += len(grid)
        i = int(np.argmin(vals))
        interior = 0 < i < len(grid) - 1
        if interior or attempt == MAX_EXPANSIONS:
            break
        if i == 0:
            lo -= math.log(10.0)
        else:
            hi += math.log(10.0)
    if not interior:
        return _Search(float(np.exp(grid[i])), float(vals[i]), False, evals)

    a, b = grid[i - 1], grid[i + 1]
    f = lambda t: float(objective(np.array([math.exp(t)]))[0])
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    evals += 2
    while b - a > LOG_BETA_TOL:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        evals += 1
    t, v = (c, fc) if fc <= fd else (d, fd)
    # the grid point may still win when the objective is flat to rounding
    if vals[i] < v:
        t, v = grid[i], float(vals[i])
    return _Search(math.exp(t), v, True, evals)


def _even(u: PolyGaussFn):
    if not isinstance(u, PolyGaussFn):
        raise UnsupportedInputError("distances are implemented for exact-class profiles")
    if u.parity != EVEN:
        raise ParityError("distances need an even (radial) profile")


def gaussian_gradient_norm_sq(N: int, beta) -> np.ndarray:
    """``||grad exp(-beta|x|^2/2)||_2^2 = (N/2) pi^(N/2) beta^(1-N/2)``."""
    return 0.5 * N * math.pi ** (0.5 * N) * np.asarray(beta, dtype=float) ** (1.0 - 0.5 * N)


def gaussian_l2_norm_sq(N: int, beta) -> np.ndarray:
    """``||exp(-beta|x|^2/2)||_2^2 = (pi/beta)^(N/2)``."""
    return (math.pi / np.asarray(beta, dtype=float)) ** (0.5 * N)


def grad_inner_gaussian(u: PolyGaussFn, N: int, beta) -> np.ndarray:
    """``<grad u, grad exp(-beta|x|^2/2)>`` on R^N, vectorized in ``beta``.

    With ``u' = r q`` and ``g' = -beta r g`` the integrand is ``-beta q r^2 g``.
    """
    beta = np.asarray(beta, dtype=float)
    q = pg_derivative(u).div_r()
    return -beta * sphere_area(N) * gaussian_overlap(q, N, 0.5 * beta, extra_power=2)


def grad_seminorm_sq(u: PolyGaussFn, N: int) -> float:
    du = pg_derivative(u)
    return sphere_area(N) * radial_inner(du, du, N)


def grad_distance_objective(u: PolyGaussFn, N: int, beta) -> np.ndarray:
    """``min_alpha ||grad(u - alpha g_beta)||^2`` for each ``beta``."""
    G = grad_seminorm_sq(u, N)
    ip = grad_inner_gaussian(u, N, beta)
    return np.maximum(G - ip * ip / gaussian_gradient_norm_sq(N, beta), 0.0)


def dist_grad_pinned(u: PolyGaussFn, N: int, beta: float = 1.0) -> DistanceResult:
    """``inf_c ||grad(u - c exp(-beta|x|^2/2))||^2`` with ``beta`` held fixed."""
    _even(u)
    ip = float(grad_inner_gaussian(u, N, beta)[0])
    ng = float(gaussian_gradient_norm_sq(N, beta))
    value = max(grad_seminorm_sq(u, N) - ip * ip / ng, 0.0)
    return DistanceResult(value, ip / ng, float(beta), "grad_seminorm", True, 1)


def dist_grad_to_shup(u: PolyGaussFn, N: int) -> DistanceResult:
    """Squared gradient-seminorm distance to ``{alpha exp(-beta|x|^2/2)}``.

    Examples
    --------
    >>> r = dist_grad_to_shup(PolyGaussFn.gaussian(5.0, 1.0), 3)
    >>> round(r.alpha_star, 8), round(r.beta_star, 8)
    (5.0, 2.0)
    """
    _even(u)
    G = grad_seminorm_sq(u, N)
    if G == 0.0:
        return DistanceResult(0.0, 0.0, 1.0, "grad_seminorm", True, 0)
    s = search_log_beta(lambda b: grad_distance_objective(u, N, b))
    ip = float(grad_inner_gaussian(u, N, s.beta)[0])
    alpha = ip / float(gaussian_gradient_norm_sq(N, s.beta))
    return DistanceResult(max(s.value, 0.0), alpha, s.beta, "grad_seminorm", s.converged, s.evaluations)


def dist_grad_norm_matched(u: PolyGaussFn, N: int) -> DistanceResult:
    """Gradient distance over members with ``||grad u*|| = ||grad u||``.

    For each ``beta`` the constraint fixes ``|alpha|``; the sign is the one
    aligning ``grad u*`` with ``grad u``, leaving ``2G - 2 sqrt(G) |<grad u, grad g>| / ||grad g||``.
    """
    _even(u)
    G = grad_seminorm_sq(u, N)
    if G == 0.0:
        raise ValueError("norm-matched distance needs a non-zero gradient")

    def objective(beta):
        ip = grad_inner_gaussian(u, N, beta)
        return np.maximum(2.0 * G - 2.0 * math.sqrt(G) * np.abs(ip)
                          / np.sqrt(gaussian_gradient_norm_sq(N, beta)), 0.0)

    s = search_log_beta(objective)
    ip = float(grad_inner_gaussian(u, N, s.beta)[0])
    alpha = math.copysign(math.sqrt(G / float(gaussian_gradient_norm_sq(N, s.beta))), ip)
    return DistanceResult(max(s.value, 0.0), alpha, s.beta, "grad_seminorm_norm_matched",
                          s.converged, s.evaluations)


def dist_l2_to_hup(u: PolyGaussFn, N: int) -> DistanceResult:
    """Squared L^2 distance to ``{alpha exp(-beta|x|^2/2)}``."""
    _even(u)
    L = sphere_area(N) * radial_inner(u, u, N)
    if L == 0.0:
        return DistanceResult(0.0, 0.0, 1.0, "l2", True, 0)
    S = sphere_area(N)

    def objective(beta):
        ip = S * gaussian_overlap(u, N, 0.5 * np.asarray(beta))
        return np.maximum(L - ip * ip / gaussian_l2_norm_sq(N, beta), 0.0)

    s = search_log_beta(objective)
    ip = S * float(gaussian_overlap(u, N, 0.5 * s.beta)[0])
    alpha = ip / float(gaussian_l2_norm_sq(N, s.beta))
    return DistanceResult(max(s.value, 0.0), alpha, s.beta, "l2", s.converged, s.evaluations)


def dist_vector_cfhup(u: PolyGaussFn, N: int, metric: str = "l2") -> DistanceResult:
    """Distance from ``U = grad u`` to ``{alpha exp(-beta|x|^2) x}``.

    Curl-free fields are gradients, so this is the scalar gradient-seminorm
    problem for the potential.  The potential ``a exp(-b|x|^2/2)`` has gradient
    ``-a b exp(-b|x|^2/2) x``, so the reported field parameters are
    ``alpha = -a b`` and ``beta = b/2``.
    """
    if metric == "l2":
        res = dist_grad_to_shup(u, N)
        label = "vector_l2"
    elif metric == "norm_matched":
        res = dist_grad_norm_matched(u, N)
        label = "grad_seminorm_norm_matched"
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return DistanceResult(res.value_sq, -res.alpha_star * res.beta_star, 0.5 * res.beta_star,
                          label, res.converged, res.evaluations)


def d2_objective(s: SeparableFn, beta) -> np.ndarray:
    """``min_{c,d}`` of the two-term distance to ``(c + d.x) exp(-beta|x|^2/2)``.

    By sector orthogonality the value is
    ``2(||v0||^2 - <v0,g>^2/||g||^2) + 2||v1||^2 - <v1,g>^2/||g||^2``
    with the k=1 norms taken on R^(N+2).
    """
    N = s.ambient_dim
    beta = np.asarray(beta, dtype=float)
    v0, v1 = s.sector(0), s.sector(1)
    out = np.zeros_like(beta)
    if not v0.is_zero:
        ip = sphere_area(N) * gaussian_overlap(v0, N, 0.5 * beta)
        out += 2.0 * (sphere_area(N) * radial_inner(v0, v0, N) - ip * ip / gaussian_l2_norm_sq(N, beta))
    if not v1.is_zero:
        d = N + 2
        ip = sphere_area(d) * gaussian_overlap(v1, d, 0.5 * beta)
        out += 2.0 * sphere_area(d) * radial_inner(v1, v1, d) - ip * ip / gaussian_l2_norm_sq(d, beta)
    return np.maximum(out, 0.0)


def dist_d2_partial(s: SeparableFn) -> DistanceResult:
    """Squared d2-distance of a separable input with sectors in ``{0, 1}``.

    ``alpha_star`` is ``c`` and ``d_star`` the ``x_1``-component of ``d``.
    """
    if any(k not in (0, 1) for k in s.degrees):
        raise UnsupportedInputError("the d2 distance is implemented for sectors k in {0, 1} only")
    N = s.ambient_dim
    if all(c.profile.is_zero for c in s.components) or not s.components:
        return DistanceResult(0.0, 0.0, 1.0, "d2_partial", True, 0, 0.0)
    res = search_log_beta(lambda b: d2_objective(s, b))
    b = res.beta
    v0, v1 = s.sector(0), s.sector(1)
    c = sphere_area(N) * float(gaussian_overlap(v0, N, 0.5 * b)[0]) / float(gaussian_l2_norm_sq(N, b))
    dt = sphere_area(N + 2) * float(gaussian_overlap(v1, N + 2, 0.5 * b)[0]) / float(gaussian_l2_norm_sq(N + 2, b))
    return DistanceResult(max(res.value, 0.0), c, b, "d2_partial", res.converged, res.evaluations,
                          harmonic_norm(N, 1) * dt)


__all__ = [
    "DistanceResult",
    "UnsupportedInputError",
    "search_log_beta",
    "gaussian_gradient_norm_sq",
    "gaussian_l2_norm_sq",
    "grad_inner_gaussian",
    "grad_seminorm_sq",
    "grad_distance_objective",
    "dist_grad_pinned",
    "dist_grad_to_shup",
    "dist_grad_norm_matched",
    "dist_l2_to_hup",
    "dist_vector_cfhup",
    "d2_objective",
    "dist_d2_partial",
]
