"""Spherical-harmonic sectors of separable functions ``u = sum_k v_k(r) r^k phi_k``.

A degree-k sector with radial profile ``v_k`` on R^N carries the same energies
as the radial function ``v_k`` on R^(N+2k), provided the harmonic is normalized
so that ``int_{S^(N-1)} |phi_k|^2 = |S^(N-1+2k)|``.  Concrete harmonics are
``P_0 = 1``, ``P_1 = x_1`` and ``P_2 = x_1 x_2`` scaled by :func:`harmonic_norm`,
so ``r^k phi_k(sigma) = c_k P_k(x)``.  Higher degrees exist only abstractly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .functionals import energies
from .integration import MCOracleResult, mc_fullspace, sphere_area
from .polygauss import EVEN, ParityError, PolyGaussFn, pg_derivative, pg_radial_laplacian, radial_inner

ENERGY_NAMES = ("grad", "lap", "x2_grad", "l2", "x2_l2")
CONCRETE_MAX_K = 2


class UnsupportedSectorError(ValueError):
    """The operation needs a concrete harmonic but the sector is abstract."""


def eigenvalue_ck(k: int, N: int) -> int:
    """Laplace-Beltrami eigenvalue ``k(k+N-2)`` of degree-k harmonics on S^(N-1)."""
    if k < 0 or N < 2:
        raise ValueError("need k >= 0 and N >= 2")
    return k * (k + N - 2)


def _mean_square_std(N: int, k: int) -> float:
    # sphere averages of 1, sigma_1^2 and sigma_1^2 sigma_2^2
    return (1.0, 1.0 / N, 1.0 / (N * (N + 2)))[k]


def harmonic_norm(N: int, k: int) -> float:
    """Constant ``c_k`` with ``c_k^2 avg(P_k^2) = |S^(N-1+2k)| / |S^(N-1)|``."""
    if k > CONCRETE_MAX_K:
        raise UnsupportedSectorError(f"no concrete harmonic of degree {k}")
    ratio = sphere_area(N + 2 * k) / sphere_area(N)
    return math.sqrt(ratio / _mean_square_std(N, k))


def harmonic_poly(k: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and Cartesian gradients of the unnormalized ``P_k`` at points ``x``."""
    x = np.atleast_2d(x)
    grad = np.zeros_like(x)
    if k == 0:
        return np.ones(len(x)), grad
    if k == 1:
        grad[:, 0] = 1.0
        return x[:, 0].copy(), grad
    if k == 2:
        grad[:, 0] = x[:, 1]
        grad[:, 1] = x[:, 0]
        return x[:, 0] * x[:, 1], grad
    raise UnsupportedSectorError(f"no concrete harmonic of degree {k}")


@dataclass(frozen=True)
class SectorComponent:
    k: int
    profile: PolyGaussFn
    harmonic_id: str = "std"

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("sector degree must be non-negative")
        if self.profile.parity != EVEN:
            raise ParityError("sector profiles must have even parity")
        if self.harmonic_id not in ("std", "abstract"):
            raise ValueError(f"unknown harmonic label {self.harmonic_id!r}")
        if self.harmonic_id == "std" and self.k > CONCRETE_MAX_K:
            object.__setattr__(self, "harmonic_id", "abstract")

    @property
    def concrete(self) -> bool:
        return self.harmonic_id == "std"


@dataclass(frozen=True)
class SeparableFn:
    ambient_dim: int
    components: tuple[SectorComponent, ...]

    def __post_init__(self):
        if self.ambient_dim < 2:
            raise ValueError("separable functions need ambient dimension N >= 2")
        comps = tuple(sorted(self.components, key=lambda c: c.k))
        ks = [c.k for c in comps]
        if len(set(ks)) != len(ks):
            raise ValueError("sector degrees must be distinct")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_profiles(cls, N: int, profiles: dict) -> "SeparableFn":
        return cls(N, tuple(SectorComponent(k, v) for k, v in profiles.items()))

    def sector(self, k: int) -> PolyGaussFn:
        for c in self.components:
            if c.k == k:
                return c.profile
        return PolyGaussFn.zero()

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(c.k for c in self.components)

    def restrict(self, k: int) -> "SeparableFn":
        return SeparableFn(self.ambient_dim, tuple(c for c in self.components if c.k == k))

    def to_spec(self) -> dict:
        return {
            "dim": self.ambient_dim,
            "sectors": [{"k": c.k, "profile": c.profile.to_spec(), "harmonic": c.harmonic_id}
                        for c in self.components],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_spec())

    @classmethod
    def from_spec(cls, spec) -> "SeparableFn":
        if isinstance(spec, (str, bytes)):
            spec = json.loads(spec)
        try:
            comps = tuple(
                SectorComponent(int(s["k"]), PolyGaussFn.from_spec(s["profile"]), s.get("harmonic", "std"))
                for s in spec["sectors"]
            )
            return cls(int(spec["dim"]), comps)
        except (KeyError, TypeError) as exc:
            raise ValueError('separable spec needs "dim" and a "sectors" list') from exc

    # -- pointwise evaluation (concrete harmonics only) --------------------
    def _check_concrete(self):
        for c in self.components:
            if not c.concrete:
                raise UnsupportedSectorError(f"sector k={c.k} has no concrete harmonic")

    def value(self, x: np.ndarray) -> np.ndarray:
        self._check_concrete()
        r = np.sqrt(np.einsum("ij,ij->i", x, x))
        out = np.zeros(len(x))
        for c in self.components:
            P, _ = harmonic_poly(c.k, x)
            out += harmonic_norm(self.ambient_dim, c.k) * c.profile(r) * P
        return out

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """``grad(v P) = (v'/r) P x + v grad P`` summed over sectors."""
        self._check_concrete()
        r = np.sqrt(np.einsum("ij,ij->i", x, x))
        out = np.zeros_like(x)
        for c in self.components:
            P, dP = harmonic_poly(c.k, x)
            q = pg_derivative(c.profile).div_r()
            ck = harmonic_norm(self.ambient_dim, c.k)
            out += ck * ((q(r) * P)[:, None] * x + c.profile(r)[:, None] * dP)
        return out

    def laplacian(self, x: np.ndarray) -> np.ndarray:
        """``Delta(v P) = (v'' + (N-1+2k) v'/r) P`` for a harmonic ``P`` of degree k."""
        self._check_concrete()
        r = np.sqrt(np.einsum("ij,ij->i", x, x))
        out = np.zeros(len(x))
        for c in self.components:
            P, _ = harmonic_poly(c.k, x)
            lap = pg_radial_laplacian(c.profile, self.ambient_dim + 2 * c.k)
            out += harmonic_norm(self.ambient_dim, c.k) * lap(r) * P
        return out


def _lifted(v: PolyGaussFn, N: int, k: int) -> dict:
    e = energies(v, N + 2 * k)
    return {"grad": e.grad, "lap": e.lap, "x2_grad": e.x2_grad - 2 * k * e.l2,
            "l2": e.l2, "x2_l2": e.x2_l2}


def sector_energies(s: SeparableFn, which: str) -> float:
    """Full-space energy of ``s`` as a sum of radial energies on R^(N+2k)."""
    if which not in ENERGY_NAMES:
        raise ValueError(f"unknown energy {which!r}; expected one of {ENERGY_NAMES}")
    return float(sum(_lifted(c.profile, s.ambient_dim, c.k)[which] for c in s.components))


def all_sector_energies(s: SeparableFn) -> dict:
    """All five energies of ``s`` at once (one lift per sector)."""
    out = dict.fromkeys(ENERGY_NAMES, 0.0)
    for c in s.components:
        for name, v in _lifted(c.profile, s.ambient_dim, c.k).items():
            out[name] += v
    return out


def _times_r_power(v: PolyGaussFn, p: int) -> PolyGaussFn:
    for _ in range(p):
        v = v.times_r()
    return v


def ambient_sector_energies(v: PolyGaussFn, N: int, k: int) -> dict:
    """Energies of ``v(r) r^k phi_k`` computed directly on R^N in polar form.

    Uses ``|grad u|^2 = (d_r u)^2 + c_k u^2/r^2`` and
    ``Delta u = (f'' + (N-1) f'/r - c_k f/r^2) phi_k`` with ``f = v r^k``, so it
    is independent of the dimension-shift formulas in :func:`sector_energies`.
    """
    c = eigenvalue_ck(k, N)
    A = sphere_area(N + 2 * k)  # int |phi_k|^2 over S^(N-1)
    f = _times_r_power(v, k)
    df = pg_derivative(f)
    if k % 2 == 0:
        L = pg_derivative(df) + df.div_r().scaled(N - 1)
        if k >= 2:
            L = L - _times_r_power(v, k - 2).scaled(c)
    else:
        # f = r g with g even: L = r g'' + (N+1) g' + (N-1-c_k) g/r
        g = _times_r_power(v, k - 1)
        dg = pg_derivative(g)
        L = pg_derivative(dg).times_r() + dg.scaled(N + 1)
        if k >= 3:
            L = L + _times_r_power(v, k - 2).scaled(N - 1 - c)
    ang = (lambda extra: c * radial_inner(f, f, N, extra)) if k > 0 else (lambda extra: 0.0)
    return {
        "l2": A * radial_inner(f, f, N),
        "x2_l2": A * radial_inner(f, f, N, 2),
        "grad": A * (radial_inner(df, df, N) + ang(-2)),
        "x2_grad": A * (radial_inner(df, df, N, 2) + ang(0)),
        "lap": A * radial_inner(L, L, N),
    }


def direct_energies_mc(s: SeparableFn, which: str, samples: int = 1_000_000,
                       seed: int = 0) -> MCOracleResult:
    """Monte-Carlo estimate of an energy from Cartesian formulas on R^N."""
    if which not in ENERGY_NAMES:
        raise ValueError(f"unknown energy {which!r}")
    s._check_concrete()
    N = s.ambient_dim

    def integrand(x):
        r2 = np.einsum("ij,ij->i", x, x)
        if which in ("l2", "x2_l2"):
            val = s.value(x) ** 2
        elif which == "lap":
            val = s.laplacian(x) ** 2
        else:
            gu = s.gradient(x)
            val = np.einsum("ij,ij->i", gu, gu)
        return val * r2 if which.startswith("x2") else val

    return mc_fullspace(integrand, N, samples, seed)


def angular_gradient_split(v: PolyGaussFn, N: int, k: int, x: np.ndarray):
    """Radial and tangential parts of ``|grad u|^2`` for ``u = c_k v P_k``.

    Returns ``(cartesian, radial_sq, tangential_sq_over_r2)``; the polar
    decomposition says ``cartesian = radial_sq + tangential_sq_over_r2``.
    """
    s = SeparableFn(N, (SectorComponent(k, v),))
    gu = s.gradient(x)
    cart = np.einsum("ij,ij->i", gu, gu)
    r = np.sqrt(np.einsum("ij,ij->i", x, x))
    sigma = x / r[:, None]
    ck = harmonic_norm(N, k)
    P, dP = harmonic_poly(k, sigma)
    phi = ck * P
    grad_s_phi = ck * (dP - (k * P)[:, None] * sigma)  # tangential gradient on the sphere
    f = _times_r_power(v, k)
    radial = (pg_derivative(f)(r) * phi) ** 2
    tang = (f(r) ** 2) * np.einsum("ij,ij->i", grad_s_phi, grad_s_phi) / r**2
    return cart, radial, tang


def lift_w(v: PolyGaussFn, N: int, k: int) -> PolyGaussFn:
    """Lift ``w_k = sqrt(|S^(N-1+2k)| / |S^(N+1+2k)|) v_k'/r`` to R^(N+2k+2).

    The area ratio is the one that makes ``int |grad v_k|^2`` on R^(N+2k) equal
    ``int |w_k|^2`` on R^(N+2k+2) (and likewise Laplacian vs gradient); the
    reciprocal ratio would leave a factor ``(|S^(N+1+2k)|/|S^(N-1+2k)|)^2``.
    """
    if v.parity != EVEN:
        raise ParityError("lift_w needs an even profile")
    d = N + 2 * k
    return pg_derivative(v).div_r().scaled(math.sqrt(sphere_area(d) / sphere_area(d + 2)))


def x2grad_decomposition(v: PolyGaussFn, N: int, k: int) -> tuple[float, float]:
    """Both sides of the sector identity for ``int |v'|^2 r^2 - 2k int |v|^2`` on R^(N+2k)."""
    d = N + 2 * k
    S = sphere_area(d)
    dv = pg_derivative(v)
    lhs = S * (radial_inner(dv, dv, d, 2) - 2 * k * radial_inner(v, v, d))
    a = math.sqrt(2 * k)
    sq = dv.times_r().scaled(2 * a / d) + v.scaled(a)
    rhs = S * ((d * d - 8 * k) / d**2 * radial_inner(dv, dv, d, 2) + radial_inner(sq, sq, d))
    return lhs, rhs


def relative_residual(a: float, b: float, scale: float = 0.0) -> float:
    den = max(abs(a), abs(b), abs(scale))
    return 0.0 if den == 0.0 else abs(a - b) / den


def x2grad_decomposition_check(v: PolyGaussFn, N: int, k: int) -> float:
    lhs, rhs = x2grad_decomposition(v, N, k)
    return relative_residual(lhs, rhs)


__all__ = [
    "UnsupportedSectorError",
    "SectorComponent",
    "SeparableFn",
    "eigenvalue_ck",
    "harmonic_norm",
    "harmonic_poly",
    "sector_energies",
    "all_sector_energies",
    "ambient_sector_energies",
    "direct_energies_mc",
    "angular_gradient_split",
    "lift_w",
    "x2grad_decomposition",
    "x2grad_decomposition_check",
    "relative_residual",
]
