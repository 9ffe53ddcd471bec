"""Base energies, uncertainty deficits and the Gaussian-weighted identities.

All functions act on radial inputs in dimension ``N``.  Integrals over R^N are
``|S^(N-1)|`` times a radial integral; for :class:`PolyGaussFn` inputs they are
evaluated exactly, for :class:`RadialProfile` inputs by quadrature.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

from .integration import RadialProfile, quad_radial, sphere_area
from .polygauss import (
    EVEN,
    ParityError,
    PolyGaussFn,
    PolyGaussTerm,
    gaussian_overlap,
    pg_derivative,
    pg_integral_radial,
    pg_radial_laplacian,
    radial_inner,
)

Radial = Union[PolyGaussFn, RadialProfile]


@dataclass(frozen=True)
class EnergyVector:
    """The five integrals over R^dim entering the uncertainty principles."""

    l2: float
    grad: float
    lap: float
    x2_l2: float
    x2_grad: float
    dim: int

    @property
    def scale(self) -> float:
        """Largest of the five energies; used to normalize residuals."""
        return max(self.l2, self.grad, self.lap, self.x2_l2, self.x2_grad)


def _require_even(u: PolyGaussFn, what: str = "input"):
    if u.parity != EVEN:
        raise ParityError(f"{what} must be an even (radial) profile")


def energies(u: Radial, N: int) -> EnergyVector:
    """All five energies of a radial function on R^N.

    Examples
    --------
    >>> e = energies(PolyGaussFn.gaussian(1.0, 0.5), 2)
    >>> round(e.lap / math.pi, 12)
    2.0
    """
    S = sphere_area(N)
    if isinstance(u, RadialProfile):
        u.check_consistency()
        lap_fn = lambda r: u.d2(r) + (N - 1) * u.d1(r) / r
        vals = {
            "l2": quad_radial(lambda r: u.value(r) ** 2, N, r_max=u.r_max),
            "grad": quad_radial(lambda r: u.d1(r) ** 2, N, r_max=u.r_max),
            "lap": quad_radial(lambda r: lap_fn(r) ** 2, N, r_max=u.r_max),
            "x2_l2": quad_radial(lambda r: (r * u.value(r)) ** 2, N, r_max=u.r_max),
            "x2_grad": quad_radial(lambda r: (r * u.d1(r)) ** 2, N, r_max=u.r_max),
        }
        return EnergyVector(dim=N, **{k: S * v for k, v in vals.items()})
    _require_even(u)
    du = pg_derivative(u)
    lap = pg_radial_laplacian(u, N)
    return EnergyVector(
        l2=S * radial_inner(u, u, N),
        grad=S * radial_inner(du, du, N),
        lap=S * radial_inner(lap, lap, N),
        x2_l2=S * radial_inner(u, u, N, 2),
        x2_grad=S * radial_inner(du, du, N, 2),
        dim=N,
    )


@dataclass(frozen=True)
class DeficitReport:
    energies: EnergyVector
    theta1: float
    theta2: float
    theta3: float
    delta1: float
    delta2: float
    lambda_first: Optional[float]
    lambda_second: Optional[float]

    def to_dict(self) -> dict:
        out = asdict(self.energies)
        out.update({k: v for k, v in asdict(self).items() if k != "energies"})
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _quartic_root(num: float, den: float) -> Optional[float]:
    if den <= 0.0 or num <= 0.0:
        return None
    return (num / den) ** 0.25


def deficits_from_energies(e: EnergyVector) -> DeficitReport:
    N = e.dim
    # square roots taken separately so tiny inputs do not underflow
    return DeficitReport(
        energies=e,
        theta1=math.sqrt(e.grad) * math.sqrt(e.x2_l2) - 0.5 * N * e.l2,
        theta2=e.grad * e.x2_l2 - 0.25 * N * N * e.l2**2,
        theta3=e.grad + e.x2_l2 - N * e.l2,
        delta1=math.sqrt(e.lap) * math.sqrt(e.x2_grad) - 0.5 * (N + 2) * e.grad,
        delta2=e.lap + e.x2_grad - (N + 2) * e.grad,
        lambda_first=_quartic_root(e.x2_l2, e.grad),
        lambda_second=_quartic_root(e.x2_grad, e.lap),
    )


def deficits(u: Radial, N: int) -> DeficitReport:
    """First- and second-order deficits from one shared :class:`EnergyVector`."""
    return deficits_from_energies(energies(u, N))


def hup_identity_rhs(u: PolyGaussFn, N: int) -> float:
    """``(lam^2/2) int |grad(u e^{|x|^2/(2 lam^2)})|^2 e^{-|x|^2/lam^2} dx``.

    ``lam = (x2_l2/grad)^(1/4)``.  The exponential factors are absorbed into
    the decay rates, so the evaluation stays exact.
    """
    e = energies(u, N)
    lam = _quartic_root(e.x2_l2, e.grad)
    if lam is None:
        raise ValueError("scaling parameter is undefined (zero gradient or moment)")
    inv = 1.0 / lam**2
    df = pg_derivative(u.times_gaussian(-0.5 * inv))
    integrand = (df * df).times_gaussian(inv)
    return 0.5 * lam**2 * sphere_area(N) * pg_integral_radial(integrand, N)


def hessian_hs_energy(u: PolyGaussFn, N: int) -> float:
    """``int |D^2 u|_HS^2`` for radial u: ``u''^2 + (N-1)(u'/r)^2`` radially."""
    _require_even(u)
    du = pg_derivative(u)
    d2u = pg_derivative(du)
    q = du.div_r()
    S = sphere_area(N)
    return S * (radial_inner(d2u, d2u, N) + (N - 1) * radial_inner(q, q, N))


def hessian_gaussian_energy(v: PolyGaussFn, N: int) -> float:
    """``int ||D^2 v - x (x) grad v||_HS^2 e^{-|x|^2} dx`` for radial ``v``.

    With ``D^2 v = v'' rr + (v'/r)(I - rr)`` and ``x (x) grad v = r v' rr`` the
    integrand reduces to ``(v'' - r v')^2 + (N-1)(v'/r)^2``.
    """
    _require_even(v)
    dv = pg_derivative(v)
    p = pg_derivative(dv) - dv.times_r()
    q = dv.div_r()
    integrand = (p * p + (q * q).scaled(N - 1)).times_gaussian(1.0)
    return sphere_area(N) * pg_integral_radial(integrand, N)


def gaussian_poincare_rhs(v: PolyGaussFn, N: int) -> float:
    """``inf_c int |grad v - (v - c) x|^2 e^{-|x|^2} dx`` for radial ``v``.

    The integrand is ``(a + c r)^2`` with ``a = v' - r v``, so the infimum over
    ``c`` is a closed-form quadratic minimum.
    """
    _require_even(v)
    a = pg_derivative(v) - v.times_r()
    b = PolyGaussFn.gaussian(1.0, 0.0).times_r()
    w = PolyGaussFn.gaussian(1.0, 1.0)
    aa = radial_inner(a * a, w, N)
    ab = radial_inner(a * b, w, N)
    bb = radial_inner(b * b, w, N)
    return sphere_area(N) * max(aa - ab * ab / bb, 0.0)


def sector_numerator(f: PolyGaussFn, N: int, k: int) -> float:
    """Numerator ``lap + x2_grad - 2k l2`` of the sector quotient on R^(N+2k)."""
    if N + 2 * k < 2:
        raise ValueError("sector dimension N+2k must be at least 2")
    e = energies(f, N + 2 * k)
    return e.lap + e.x2_grad - 2 * k * e.l2


def radial_gaussian_poincare_gap(v: PolyGaussFn, N: int) -> float:
    """Left minus right side of the radial Gaussian Poincare step.

    ``[grad + x2_l2 - N l2] - 2[l2 - (int v e^{-|x|^2/2})^2 / int e^{-|x|^2}]``.
    """
    e = energies(v, N)
    mean = sphere_area(N) * float(gaussian_overlap(v, N, 0.5)[0])
    proj = mean**2 / math.pi ** (0.5 * N)
    return (e.grad + e.x2_l2 - N * e.l2) - 2.0 * (e.l2 - proj)


def delta3_from_potential(u: PolyGaussFn, N: int) -> float:
    """Vector-field deficit of ``U = grad u`` using the Hessian energy directly."""
    e = energies(u, N)
    hs = hessian_hs_energy(u, N)
    return math.sqrt(hs) * math.sqrt(e.x2_grad) - 0.5 * (N + 2) * e.grad


def dilate(u: PolyGaussFn, lam: float) -> PolyGaussFn:
    """``u(lam r)``: coefficients of ``r^2j`` pick up ``lam^2j``, rates ``lam^2``."""
    terms = []
    for t in u.terms:
        extra = 1 if u.parity != EVEN else 0
        coeffs = tuple(c * lam ** (2 * j + extra) for j, c in enumerate(t.coeffs))
        terms.append(PolyGaussTerm(coeffs, t.beta * lam * lam))
    return PolyGaussFn(tuple(terms), u.parity)


def energy_profile(u: PolyGaussFn) -> RadialProfile:
    """Wrap an exact profile as callables, e.g. to exercise the quadrature path."""
    du = pg_derivative(u)
    d2u = pg_derivative(du)
    return RadialProfile(u, du, d2u)


__all__ = [
    "EnergyVector",
    "DeficitReport",
    "energies",
    "deficits",
    "deficits_from_energies",
    "hup_identity_rhs",
    "hessian_hs_energy",
    "hessian_gaussian_energy",
    "gaussian_poincare_rhs",
    "sector_numerator",
    "radial_gaussian_poincare_gap",
    "delta3_from_potential",
    "dilate",
    "energy_profile",
]
