"""Exact calculus on radial profiles ``sum_i p_i(r) exp(-beta_i r^2)``.

Each term stores the coefficients of an even polynomial in ``r``.  A function
of *odd* parity carries one extra factor of ``r`` in every term, so dividing an
odd function by ``r`` (or multiplying an even one by ``r``) only flips the
parity flag.  Differentiation flips parity, which keeps ``f'/r`` exact.

Radial integrals against ``r^(d-1)`` use the Gamma moment

    int_0^inf r^m exp(-beta r^2) dr = Gamma((m+1)/2) / (2 beta^((m+1)/2))

accumulated in log space so that dimensions in the hundreds do not overflow.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

EVEN = "even"
ODD = "odd"

BETA_MERGE_TOL = 1e-14
COEFF_FLOOR = 1e-300


class ParityError(ValueError):
    """Operation undefined for the parity of its operand(s)."""


class DomainError(ValueError):
    """Integral diverges (non-positive decay rate)."""


def _trim(coeffs: Iterable[float]) -> tuple[float, ...]:
    out = [0.0 if abs(c) < COEFF_FLOOR else float(c) for c in coeffs]
    while out and out[-1] == 0.0:
        out.pop()
    return tuple(out)


def _padd(a: Sequence[float], b: Sequence[float], scale: float = 1.0) -> list[float]:
    n = max(len(a), len(b))
    out = [0.0] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += scale * c
    return out


@dataclass(frozen=True)
class PolyGaussTerm:
    """``(sum_j coeffs[j] r^(2j)) * exp(-beta r^2)``.

    ``beta`` may be zero or negative for intermediate objects such as
    ``u * exp(r^2/2)``; integration checks positivity.
    """

    coeffs: tuple[float, ...]
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))
        object.__setattr__(self, "beta", float(self.beta))
        if not np.isfinite(self.beta) or not all(np.isfinite(self.coeffs)):
            raise ValueError("PolyGaussTerm requires finite coefficients and beta")


def _canonical(terms: Iterable[PolyGaussTerm]) -> tuple[PolyGaussTerm, ...]:
    merged: list[list] = []
    for t in sorted(terms, key=lambda t: t.beta):
        if not t.coeffs:
            continue
        if merged and abs(merged[-1][1] - t.beta) <= BETA_MERGE_TOL:
            merged[-1][0] = _padd(merged[-1][0], t.coeffs)
        else:
            merged.append([list(t.coeffs), t.beta])
    out = (PolyGaussTerm(tuple(c), b) for c, b in merged)
    return tuple(t for t in out if t.coeffs)


@dataclass(frozen=True)
class PolyGaussFn:
    """Finite sum of polynomial-times-Gaussian terms with a parity flag."""

    terms: tuple[PolyGaussTerm, ...] = ()
    parity: str = EVEN

    def __post_init__(self):
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"unknown parity {self.parity!r}")
        object.__setattr__(self, "terms", _canonical(self.terms))

    # -- constructors -----------------------------------------------------
    @classmethod
    def gaussian(cls, alpha: float = 1.0, beta: float = 1.0) -> "PolyGaussFn":
        """``alpha * exp(-beta r^2)``."""
        return cls((PolyGaussTerm((alpha,), beta),))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Sequence[float], float]], parity: str = EVEN):
        return cls(tuple(PolyGaussTerm(tuple(c), b) for c, b in terms), parity)

    @classmethod
    def zero(cls, parity: str = EVEN) -> "PolyGaussFn":
        return cls((), parity)

    # -- basic queries ----------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def betas(self) -> tuple[float, ...]:
        return tuple(t.beta for t in self.terms)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        r2 = r * r
        out = np.zeros_like(r)
        for t in self.terms:
            out = out + np.polynomial.polynomial.polyval(r2, t.coeffs) * np.exp(-t.beta * r2)
        if self.parity == ODD:
            out = out * r
        return out

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        return pg_combine(self, other, "add", 1.0)

    def __sub__(self, other):
        return pg_combine(self, other, "add", -1.0)

    def __neg__(self):
        return self.scaled(-1.0)

    def __mul__(self, other):
        if isinstance(other, PolyGaussFn):
            return pg_combine(self, other, "multiply", 1.0)
        return self.scaled(float(other))

    __rmul__ = __mul__

    def scaled(self, s: float) -> "PolyGaussFn":
        return PolyGaussFn(
            tuple(PolyGaussTerm(tuple(s * c for c in t.coeffs), t.beta) for t in self.terms),
            self.parity,
        )

    def times_gaussian(self, beta: float) -> "PolyGaussFn":
        """Multiply by ``exp(-beta r^2)``; ``beta`` may be negative."""
        return PolyGaussFn(
            tuple(PolyGaussTerm(t.coeffs, t.beta + beta) for t in self.terms), self.parity
        )

    def times_r(self) -> "PolyGaussFn":
        if self.parity == EVEN:
            return PolyGaussFn(self.terms, ODD)
        return PolyGaussFn(tuple(PolyGaussTerm((0.0,) + t.coeffs, t.beta) for t in self.terms), EVEN)

    def div_r(self) -> "PolyGaussFn":
        """Exact quotient by ``r``; only odd functions are divisible."""
        if self.parity != ODD:
            if self.is_zero:
                return PolyGaussFn((), ODD)
            raise ParityError("only odd-parity functions are divisible by r")
        return PolyGaussFn(self.terms, EVEN)

    def derivative(self) -> "PolyGaussFn":
        return pg_derivative(self)

    # -- serialization ----------------------------------------------------
    def to_spec(self) -> dict:
        if self.parity != EVEN:
            raise ParityError("function specs describe even profiles only")
        return {"terms": [{"coeffs": list(t.coeffs), "beta": t.beta} for t in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_spec())

    @classmethod
    def from_spec(cls, spec) -> "PolyGaussFn":
        """Parse ``{"terms": [{"coeffs": [c0, c2, ...], "beta": b}, ...]}``.

        A JSON string is accepted as well; decoding errors propagate as
        :class:`json.JSONDecodeError` carrying the failing position.
        """
        if isinstance(spec, (str, bytes)):
            spec = json.loads(spec)
        if not isinstance(spec, dict) or "terms" not in spec:
            raise ValueError('function spec must be an object with a "terms" list')
        terms = []
        for i, t in enumerate(spec["terms"]):
            try:
                coeffs = [float(c) for c in t["coeffs"]]
                beta = float(t["beta"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"terms[{i}]: expected numeric 'coeffs' list and 'beta'") from exc
            terms.append(PolyGaussTerm(tuple(coeffs), beta))
        return cls(tuple(terms), EVEN)


def pg_combine(a: PolyGaussFn, b: PolyGaussFn, op: str = "add", scale: float = 1.0) -> PolyGaussFn:
    """``a + scale*b`` (op="add") or ``scale*a*b`` (op="multiply"), exactly.

    Addition needs equal parity (a zero operand adopts the other's);
    multiplication combines parities by XOR.
    """
    if op == "add":
        if a.parity != b.parity:
            if a.is_zero:
                return b.scaled(scale)
            if b.is_zero:
                return a
            raise ParityError(f"cannot add {a.parity} and {b.parity} functions")
        scaled_b = (PolyGaussTerm(tuple(scale * c for c in t.coeffs), t.beta) for t in b.terms)
        return PolyGaussFn(a.terms + tuple(scaled_b), a.parity)
    if op == "multiply":
        both_odd = a.parity == ODD and b.parity == ODD
        parity = EVEN if a.parity == b.parity else ODD
        terms = []
        for ta in a.terms:
            for tb in b.terms:
                c = np.convolve(ta.coeffs, tb.coeffs) * scale
                if both_odd:
                    c = np.concatenate(([0.0], c))
                terms.append(PolyGaussTerm(tuple(c), ta.beta + tb.beta))
        return PolyGaussFn(tuple(terms), parity)
    raise ValueError(f"unknown op {op!r}")


def pg_derivative(f: PolyGaussFn) -> PolyGaussFn:
    """Exact ``d/dr``; parity flips."""
    terms = []
    for t in f.terms:
        c = t.coeffs
        n = len(c)
        two_b = 2.0 * t.beta
        if f.parity == EVEN:
            # d/dr sum c_j r^2j e^{-b r^2} = r * sum_j [2(j+1)c_{j+1} - 2b c_j] r^2j
            new = [(2.0 * (j + 1) * c[j + 1] if j + 1 < n else 0.0) - two_b * c[j] for j in range(n)]
        else:
            # d/dr sum c_j r^(2j+1) e^{-b r^2} = sum_j [(2j+1)c_j - 2b c_{j-1}] r^2j
            new = [((2 * j + 1) * c[j] if j < n else 0.0) - (two_b * c[j - 1] if j > 0 else 0.0)
                   for j in range(n + 1)]
        terms.append(PolyGaussTerm(tuple(new), t.beta))
    return PolyGaussFn(tuple(terms), ODD if f.parity == EVEN else EVEN)


def pg_radial_laplacian(f: PolyGaussFn, d: int) -> PolyGaussFn:
    """``f'' + (d-1) f'/r`` for an even profile in dimension ``d``."""
    if f.parity != EVEN:
        raise ParityError("radial Laplacian needs an even-parity profile")
    df = pg_derivative(f)
    return pg_combine(pg_derivative(df), df.div_r(), "add", float(d - 1))


def _log_moment(m, beta):
    """log of int_0^inf r^m exp(-beta r^2) dr."""
    p = 0.5 * (np.asarray(m, dtype=float) + 1.0)
    return gammaln(p) - np.log(2.0) - p * np.log(beta)


def log_integral_radial(f: PolyGaussFn, d: int, extra_power: int = 0) -> tuple[float, float]:
    """Signed log of ``int_0^inf f(r) r^(d-1+extra_power) dr``.

    Works for either parity.  Returns ``(sign, log|value|)`` with sign 0 for an
    exactly vanishing integral.
    """
    shift = d - 1 + extra_power + (1 if f.parity == ODD else 0)
    ms, bs, cs = [], [], []
    for t in f.terms:
        if t.beta <= 0.0:
            raise DomainError(f"non-positive decay rate beta={t.beta} makes the integral diverge")
        n = len(t.coeffs)
        ms.append(2 * np.arange(n) + shift)
        bs.append(np.full(n, t.beta))
        cs.append(np.asarray(t.coeffs))
    if not ms:
        return 0.0, -np.inf
    m, beta, c = np.concatenate(ms), np.concatenate(bs), np.concatenate(cs)
    keep = c != 0.0
    m, beta, c = m[keep], beta[keep], c[keep]
    if not len(c):
        return 0.0, -np.inf
    if m.min() <= -1:
        raise DomainError(f"moment r^{int(m.min())} is not integrable at the origin")
    return _signed_logsumexp(_log_moment(m, beta) + np.log(np.abs(c)), np.sign(c))


def _signed_logsumexp(logs: np.ndarray, signs: np.ndarray) -> tuple[float, float]:
    # scipy's logsumexp(return_sign=True) yields nan when the largest terms
    # cancel exactly, so shift by the maximum by hand
    top = logs.max()
    total = float(np.sum(signs * np.exp(logs - top)))
    if total == 0.0:
        return 0.0, -np.inf
    return float(np.sign(total)), float(np.log(abs(total)) + top)


def radial_moment(f: PolyGaussFn, d: int, extra_power: int = 0) -> float:
    """``int_0^inf f(r) r^(d-1+extra_power) dr`` for any parity."""
    sign, logv = log_integral_radial(f, d, extra_power)
    return 0.0 if sign == 0 else sign * float(np.exp(logv))


def pg_integral_radial(f: PolyGaussFn, d: int) -> float:
    """Exact ``int_0^inf f(r) r^(d-1) dr`` for an even profile."""
    if f.parity != EVEN:
        raise ParityError("radial integral is defined here for even profiles")
    return radial_moment(f, d)


def radial_inner(f: PolyGaussFn, g: PolyGaussFn, d: int, extra_power: int = 0) -> float:
    """``int_0^inf f g r^(d-1+extra_power) dr``."""
    return radial_moment(pg_combine(f, g, "multiply"), d, extra_power)


def gaussian_overlap(f: PolyGaussFn, d: int, beta, extra_power: int = 0) -> np.ndarray:
    """``int_0^inf f(r) r^extra_power exp(-beta r^2) r^(d-1) dr``, vectorized in ``beta``.

    Closed form per term; ``beta`` is added to each term's own decay rate.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    out = np.zeros_like(beta)
    shift = d - 1 + extra_power + (1 if f.parity == ODD else 0)
    for t in f.terms:
        b = t.beta + beta
        if np.any(b <= 0.0):
            raise DomainError("overlap integral diverges for the requested decay rates")
        for j, c in enumerate(t.coeffs):
            if c != 0.0:
                out += c * np.exp(_log_moment(2 * j + shift, b))
    return out
