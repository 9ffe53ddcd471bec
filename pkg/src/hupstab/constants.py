"""Closed-form bounds and numerical values of the sector stability constants C(N,k).

``C(N,k)`` is the infimum over radial ``f`` of

    (int |Delta f|^2 + int |x|^2 |grad f|^2 - 2k int |f|^2) / int |grad f|^2  -  (N + 2)

with all integrals on R^(N+2k).  The infimum is approximated by a Rayleigh-Ritz
problem ``A c = lambda B c`` on a finite Gaussian basis.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .functionals import energies, sector_numerator
from .integration import sphere_area
from .polygauss import PolyGaussFn, PolyGaussTerm, pg_radial_laplacian, radial_inner

DEFAULT_M_LIST = (8, 16, 24)
DEFAULT_SCALES = tuple(float(s) for s in 2.0 ** np.linspace(-1.0, 1.0, 7))
MAX_SECTOR_DIM = 60
PIVOT_TOL = 1e-10
JACOBI_TOL = 1e-12
CONVERGENCE_TOL = 1e-6
SANDWICH_SLACK = 1e-6
TAIL_RATIO = 0.5
CSV_HEADER = "# hupstab-report v1"
CSV_COLUMNS = ("N", "k", "value", "lower", "upper", "gaussian_quotient", "reference", "converged")


class ConditioningError(ArithmeticError):
    """The Gram matrix is numerically singular after diagonal scaling."""


# -- closed forms -------------------------------------------------------------
def lower_bound(N: float, k: float) -> float:
    """``sqrt((N+2k)^2 - 8k) - N`` in the cancellation-free form ``4k(N+k-2)/(sqrt(.)+N)``.

    Examples
    --------
    >>> round(lower_bound(2, 1), 7)
    0.8284271
    """
    root = math.sqrt((N + 2 * k) ** 2 - 8 * k)
    return 4.0 * k * (N + k - 2) / (root + N)


def lower_bound_direct(N: float, k: float) -> float:
    """Unrationalized ``sqrt((N+2k)^2 - 8k) - N`` (loses digits for large N)."""
    return math.sqrt((N + 2 * k) ** 2 - 8 * k) - N


def k_of_n(N: float) -> float:
    """``K(N) = (4N - 4)/(sqrt(N^2 + 4N - 4) + N)``, the infimum over k of the lower bounds."""
    return (4.0 * N - 4.0) / (math.sqrt(N * N + 4.0 * N - 4.0) + N)


def reference_value(N: float) -> float:
    """``sqrt(N^2 + 4N - 4) - N``, the known value of C(N,1); same number as :func:`k_of_n`."""
    return k_of_n(N)


def upper_bound(N: int, k: int) -> float:
    return 2.0 * k


def rayleigh_quotient(f: PolyGaussFn, N: int, k: int) -> float:
    """Sector quotient of ``f`` minus ``N + 2``."""
    grad = energies(f, N + 2 * k).grad
    return sector_numerator(f, N, k) / grad - (N + 2)


def gaussian_quotient(N: int, k: int) -> float:
    """Quotient of ``exp(-r^2/2)``; equals ``2k - 4k/(N+2k)``, i.e. ``2N/(N+2)`` for k=1."""
    if N + 2 * k > 200:
        return 2.0 * k - 4.0 * k / (N + 2 * k)
    return rayleigh_quotient(PolyGaussFn.gaussian(1.0, 0.5), N, k)


def completion_of_squares(f: PolyGaussFn, N: int, k: int, K: float) -> tuple[float, float, float]:
    """Both sides of the square completion behind the lower bound.

    On R^d with ``d = N + 2k`` and ``c = (2N + 2k + K)/2``::

        numerator - (N + 2 + K) grad = int |Delta f + r f' + c f|^2 + (d c - c^2 - 2k) int |f|^2

    Returns ``(lhs, rhs, coefficient)``; the coefficient vanishes at ``K = lower_bound(N, k)``.
    """
    d = N + 2 * k
    e = energies(f, d)
    lhs = sector_numerator(f, N, k) - (N + 2 + K) * e.grad
    c = 0.5 * (2 * N + 2 * k + K)
    sq = pg_radial_laplacian(f, d) + f.derivative().times_r() + f.scaled(c)
    coef = d * c - c * c - 2 * k
    rhs = sphere_area(d) * radial_inner(sq, sq, d) + coef * e.l2
    return lhs, rhs, coef


def completion_coefficient(N: int, k: int, K: float) -> float:
    d = N + 2 * k
    c = 0.5 * (2 * N + 2 * k + K)
    return d * c - c * c - 2 * k


# -- basis and assembly -------------------------------------------------------
def basis_terms(m: int, s: float, kind: str = "hybrid") -> tuple[np.ndarray, np.ndarray]:
    """Powers and decay rates ``(p_j, b_j)`` of basis functions ``r^p_j exp(-b_j r^2)``.

    ``monomial``: ``r^(2j) exp(-s r^2/2)``.  ``hybrid``: the first ``ceil(m/4)``
    monomials plus a ladder of wider Gaussians ``exp(-(s/4) rho^i r^2)``,
    ``rho = 1/2``, that resolves the slowly decaying tail of the minimizer.
    Bases of increasing ``m`` are nested.
    """
    if m < 1 or s <= 0:
        raise ValueError("need m >= 1 and s > 0")
    if kind == "monomial":
        return 2.0 * np.arange(m), np.full(m, 0.5 * s)
    if kind != "hybrid":
        raise ValueError(f"unknown basis kind {kind!r}")
    core = max(1, math.ceil(m / 4))
    tail = m - core
    powers = np.concatenate([2.0 * np.arange(core), np.zeros(tail)])
    rates = np.concatenate([np.full(core, 0.5 * s), 0.25 * s * TAIL_RATIO ** np.arange(tail)])
    return powers, rates


def basis_function(coeffs: Sequence[float], m: int, s: float, kind: str = "hybrid") -> PolyGaussFn:
    powers, rates = basis_terms(m, s, kind)
    terms = []
    for c, p, b in zip(coeffs, powers, rates):
        poly = [0.0] * (int(p) // 2) + [float(c)]
        terms.append(PolyGaussTerm(tuple(poly), float(b)))
    return PolyGaussFn(tuple(terms))


def _log_moment(m, beta):
    p = 0.5 * (m + 1.0)
    return gammaln(p) - math.log(2.0) - p * np.log(beta)


def _gram(ca, pa, cb, pb, rates, d, extra):
    """``sum_st ca_is cb_jt int r^(pa_is + pb_jt + d - 1 + extra) exp(-(b_i + b_j) r^2)``."""
    bsum = rates[:, None] + rates[None, :]
    out = np.zeros_like(bsum)
    for s in range(ca.shape[1]):
        for t in range(cb.shape[1]):
            coef = ca[:, s][:, None] * cb[:, t][None, :]
            power = pa[:, s][:, None] + pb[:, t][None, :] + d - 1 + extra
            live = coef != 0.0
            safe_power = np.where(live, power, 0.0)
            out += np.where(live, coef * np.exp(_log_moment(safe_power, bsum)), 0.0)
    return out


def assemble_rayleigh(N: int, k: int, m: int, s: float, kind: str = "hybrid"):
    """Matrices ``A`` (numerator form) and ``B`` (gradient Gram matrix) on R^(N+2k).

    For ``f = r^p exp(-b r^2)``:
    ``f' = p r^(p-1) - 2b r^(p+1)`` and
    ``Delta_d f = p(p+d-2) r^(p-2) - 2b(2p+d) r^p + 4b^2 r^(p+2)`` (times the Gaussian).
    """
    d = N + 2 * k
    p, b = basis_terms(m, s, kind)
    d1c = np.stack([p, -2.0 * b], axis=1)
    d1p = np.stack([p - 1.0, p + 1.0], axis=1)
    lc = np.stack([p * (p + d - 2.0), -2.0 * b * (2.0 * p + d), 4.0 * b * b], axis=1)
    lp = np.stack([p - 2.0, p, p + 2.0], axis=1)
    fc, fp = np.ones((m, 1)), p[:, None]
    S = sphere_area(d)
    B = S * _gram(d1c, d1p, d1c, d1p, b, d, 0)
    A = S * (_gram(lc, lp, lc, lp, b, d, 0) + _gram(d1c, d1p, d1c, d1p, b, d, 2)
             - 2.0 * k * _gram(fc, fp, fc, fp, b, d, 0))
    # exact symmetry
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    return A, B


# -- eigen solver -------------------------------------------------------------
def jacobi_eigh(C: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm is below ``tol`` times the
    Frobenius norm of ``C``.  Returns ``(eigenvalues, eigenvectors)`` unsorted.
    """
    a = np.array(C, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    ref = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * ref:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


def min_generalized_eig(A: np.ndarray, B: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest ``lambda`` with ``A x = lambda B x`` and its eigenvector.

    The pencil is scaled by ``D = diag(B)^(-1/2)``, ``B`` is Cholesky-factored
    and the symmetric matrix ``L^-1 A L^-T`` is diagonalized by Jacobi
    rotations.  A scaled pivot whose square falls below 1e-10 raises
    :class:`ConditioningError`.

    Examples
    --------
    >>> lam, x = min_generalized_eig(np.diag([3.0, 5.0]), np.eye(2))
    >>> float(lam), [abs(float(t)) for t in x]
    (3.0, [1.0, 0.0])
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    diag = np.diag(B)
    if np.any(diag <= 0.0):
        raise ConditioningError("Gram matrix has a non-positive diagonal entry")
    D = 1.0 / np.sqrt(diag)
    As = A * D[:, None] * D[None, :]
    Bs = B * D[:, None] * D[None, :]
    try:
        L = np.linalg.cholesky(Bs)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(
            "Gram matrix is not positive definite; use a smaller basis or another scale") from exc
    pivots = np.diag(L) ** 2
    if pivots.min() < PIVOT_TOL:
        raise ConditioningError(
            f"scaled Cholesky pivot {pivots.min():.2e} below {PIVOT_TOL:g}; "
            "use a smaller basis or another scale")
    Y = solve_triangular(L, As, lower=True)
    C = solve_triangular(L, Y.T, lower=True)
    C = 0.5 * (C + C.T)
    w, V = jacobi_eigh(C)
    i = int(np.argmin(w))
    x = solve_triangular(L.T, V[:, i], lower=False) * D
    x = x / np.linalg.norm(x)
    j = int(np.argmax(np.abs(x)))
    return float(w[i]), x * math.copysign(1.0, x[j])


# -- estimates ----------------------------------------------------------------
@dataclass(frozen=True)
class StabilityEstimate:
    N: int
    k: int
    basis_size: int
    scale: float
    value: float
    lower: float
    upper: float
    gaussian_quotient: float
    reference: Optional[float]
    converged: bool
    basis_kind: str = "hybrid"
    coeffs: tuple[float, ...] = ()
    history: tuple[float, ...] = ()
    diagnostics: tuple[str, ...] = ()

    def minimizer(self) -> PolyGaussFn:
        """Radial profile on R^(N+2k) attaining the reported quotient."""
        if not self.coeffs:
            raise ValueError("no minimizing coefficients (closed-form only estimate)")
        return basis_function(self.coeffs, self.basis_size, self.scale, self.basis_kind)

    def respects_sandwich(self, slack: float = SANDWICH_SLACK) -> bool:
        if not math.isfinite(self.value):
            return False
        return (self.lower - slack <= self.value
                <= min(self.upper, self.gaussian_quotient) + slack)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["coeffs"] = list(self.coeffs)
        out["history"] = list(self.history)
        out["diagnostics"] = list(self.diagnostics)
        if not math.isfinite(out["value"]):
            out["value"] = None
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def csv_row(self) -> list:
        ref = "" if self.reference is None else repr(self.reference)
        val = repr(self.value) if math.isfinite(self.value) else ""
        return [self.N, self.k, val, repr(self.lower), repr(self.upper),
                repr(self.gaussian_quotient), ref, str(self.converged).lower()]


def _bounds(N: int, k: int):
    ref = reference_value(N) if k == 1 else None
    return lower_bound(N, k), upper_bound(N, k), gaussian_quotient(N, k), ref


def estimate_C(N: int, k: int, m_list: Sequence[int] = DEFAULT_M_LIST,
               scale_list: Sequence[float] = DEFAULT_SCALES, kind: str = "hybrid") -> StabilityEstimate:
    """Numerical ``C(N,k)`` by Rayleigh-Ritz over a scale sweep and nested bases.

    The value is the smallest eigenvalue over all scales at the largest basis
    size, minus ``N + 2``.  It counts as converged when the last refinement in
    ``m`` moved it by less than 1e-6 and it lies inside the closed-form bounds.
    """
    lo, up, gq, ref = _bounds(N, k)
    if N + 2 * k > MAX_SECTOR_DIM:
        return StabilityEstimate(N, k, 0, float("nan"), float("nan"), lo, up, gq, ref, False, kind,
                                 diagnostics=(f"N+2k={N + 2 * k} exceeds {MAX_SECTOR_DIM}: bounds only",))
    history, diags = [], []
    best = None
    for m in m_list:
        best_m = None
        for s in scale_list:
            try:
                lam, x = min_generalized_eig(*assemble_rayleigh(N, k, m, s, kind))
            except ConditioningError as exc:
                diags.append(f"m={m} s={s:.4g}: {exc}")
                continue
            if best_m is None or lam < best_m[0]:
                best_m = (lam, s, x)
        if best_m is None:
            history.append(float("nan"))
            continue
        history.append(best_m[0] - (N + 2))
        best = (m, *best_m)
    if best is None:
        return StabilityEstimate(N, k, max(m_list), float("nan"), float("nan"), lo, up, gq, ref, False,
                                 kind, history=tuple(history), diagnostics=tuple(diags))
    m, lam, s, x = best
    value = lam - (N + 2)
    stable = (len(history) >= 2 and all(math.isfinite(h) for h in history[-2:])
              and abs(history[-1] - history[-2]) < CONVERGENCE_TOL and m == max(m_list))
    est = StabilityEstimate(N, k, m, float(s), float(value), lo, up, gq, ref, False, kind,
                            tuple(float(c) for c in x), tuple(history), tuple(diags))
    converged = stable and est.respects_sandwich()
    if stable and not converged:
        diags.append("value violates the closed-form bounds")
    return StabilityEstimate(**{**asdict(est), "converged": converged,
                                "coeffs": est.coeffs, "history": est.history,
                                "diagnostics": tuple(diags)})


@dataclass(frozen=True)
class CertifiedConstant:
    estimate: StabilityEstimate
    kmax: int
    sector_lower_bounds: dict = field(default_factory=dict)
    certified: bool = False

    def to_dict(self) -> dict:
        return {"estimate": self.estimate.to_dict(), "kmax": self.kmax,
                "sector_lower_bounds": {str(k): v for k, v in self.sector_lower_bounds.items()},
                "certified": self.certified}


def estimate_C_N(N: int, kmax: int = 5, **opts) -> CertifiedConstant:
    """``C(N) = C(N,1)`` with a certificate that every sector ``2 <= k <= kmax`` lies above it."""
    if kmax < 2:
        raise ValueError("kmax must be at least 2")
    est = estimate_C(N, 1, **opts)
    bounds = {k: lower_bound(N, k) for k in range(2, kmax + 1)}
    ok = est.converged and all(b > est.value for b in bounds.values())
    return CertifiedConstant(est, kmax, bounds, ok)


# -- grid sweep ---------------------------------------------------------------
def _cell(args):
    N, k, m_list = args
    return estimate_C(N, k, m_list=m_list)


def m_list_for(basis: int) -> tuple[int, ...]:
    """Refinement ladder ending at ``basis``: (basis/3, 2 basis/3, basis)."""
    if basis < 3:
        raise ValueError("basis size must be at least 3")
    return (max(1, basis // 3), max(2, 2 * basis // 3), basis)


def sweep(dims: Iterable[int], kmax: int, basis: int = DEFAULT_M_LIST[-1],
          workers: Optional[int] = None) -> list[StabilityEstimate]:
    """Estimates for every ``(N, k)`` with ``0 <= k <= kmax``, ordered by ``(N, k)``.

    ``HUPSTAB_THREADS`` caps the number of worker processes (default 1).
    """
    cells = [(N, k, m_list_for(basis)) for N in dims for k in range(kmax + 1)]
    if workers is None:
        workers = int(os.environ.get("HUPSTAB_THREADS", "1"))
    workers = max(1, min(workers, len(cells)))
    if workers == 1:
        results = [_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell, cells))
    return sorted(results, key=lambda e: (e.N, e.k))


def to_csv(estimates: Sequence[StabilityEstimate]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for e in estimates:
        w.writerow(e.csv_row())
    return buf.getvalue()


def to_json(estimates: Sequence[StabilityEstimate]) -> str:
    return json.dumps([e.to_dict() for e in estimates], indent=2)


__all__ = [
    "ConditioningError",
    "StabilityEstimate",
    "CertifiedConstant",
    "lower_bound",
    "lower_bound_direct",
    "k_of_n",
    "reference_value",
    "upper_bound",
    "rayleigh_quotient",
    "gaussian_quotient",
    "completion_of_squares",
    "completion_coefficient",
    "basis_terms",
    "basis_function",
    "assemble_rayleigh",
    "jacobi_eigh",
    "min_generalized_eig",
    "estimate_C",
    "estimate_C_N",
    "m_list_for",
    "sweep",
    "to_csv",
    "to_json",
]
