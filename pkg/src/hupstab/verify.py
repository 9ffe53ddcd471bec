"""Identity, inequality and sharpness checks over seeded random corpora.

Every check is a named function of one JSON-serializable *case*.  A suite draws
cases, evaluates each, and keeps the worst one as the witness, so a witness
can be re-evaluated later with :func:`reevaluate`.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import constants as cst
from .functionals import (
    deficits,
    delta3_from_potential,
    energies,
    gaussian_poincare_rhs,
    hessian_gaussian_energy,
    hessian_hs_energy,
    hup_identity_rhs,
    radial_gaussian_poincare_gap,
)
from .harmonics import (
    SeparableFn,
    all_sector_energies,
    ambient_sector_energies,
    direct_energies_mc,
    harmonic_norm,
    lift_w,
    relative_residual,
    sector_energies,
    x2grad_decomposition,
)
from .integration import sphere_area
from .manifold import (
    dist_d2_partial,
    dist_grad_norm_matched,
    dist_grad_pinned,
    dist_grad_to_shup,
    dist_l2_to_hup,
    dist_vector_cfhup,
    gaussian_gradient_norm_sq,
    grad_inner_gaussian,
)
from .polygauss import PolyGaussFn, pg_derivative, radial_moment

BETA_RANGE = (0.3, 3.0)
MAX_TERMS = 3
POLY_COEFFS = 4  # even polynomial of degree <= 6
IDENTITY_TOL = 1e-9
INEQUALITY_TOL = 1e-9
SHARPNESS_WINDOW = (0.95, 1.0 + 1e-6)
MC_SAMPLES = 1_000_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    kind: str
    residual: float
    tolerance: float
    passed: bool
    paper_tag: str
    witness: Optional[str] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# -- corpus -------------------------------------------------------------------
def corpus_rng(seed: int, N: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, N, stream])))


def random_profile(rng: np.random.Generator, gaussian_only: bool = False) -> PolyGaussFn:
    """1-3 terms; coefficients uniform in [-1, 1]; rates log-uniform in [0.3, 3]."""
    lo, hi = np.log(BETA_RANGE[0]), np.log(BETA_RANGE[1])
    if gaussian_only:
        return PolyGaussFn.gaussian(float(rng.uniform(-1, 1)), float(np.exp(rng.uniform(lo, hi))))
    n = int(rng.integers(1, MAX_TERMS + 1))
    terms = [(rng.uniform(-1.0, 1.0, POLY_COEFFS), float(np.exp(rng.uniform(lo, hi)))) for _ in range(n)]
    f = PolyGaussFn.from_terms(terms)
    return f if not f.is_zero else PolyGaussFn.gaussian(1.0, 0.5)


def _fn(case, key="fn") -> PolyGaussFn:
    return PolyGaussFn.from_spec(case[key])


def _sep(case) -> SeparableFn:
    return SeparableFn.from_spec(case["sep"])


# -- identity checks ----------------------------------------------------------
def _id_hupi(N, case):
    u = _fn(case)
    d = deficits(u, N)
    return relative_residual(d.theta1, hup_identity_rhs(u, N), 0.5 * N * d.energies.l2)


def _id_hessian(N, case):
    u = _fn(case)
    d = deficits(u, N)
    rhs = hessian_gaussian_energy(u.times_gaussian(-0.5), N)
    return relative_residual(d.delta2, rhs, (N + 2) * d.energies.grad)


def _id_sector(N, case):
    s = _sep(case)
    lifted = all_sector_energies(s)
    direct = [ambient_sector_energies(c.profile, N, c.k) for c in s.components]
    return max(relative_residual(sum(d[w] for d in direct), lifted[w]) for w in lifted)


def _id_x2grad(N, case):
    lhs, rhs = x2grad_decomposition(_fn(case), N, case["k"])
    return relative_residual(lhs, rhs)


def _id_completion(N, case):
    f, k = _fn(case), case["k"]
    worst = 0.0
    K0 = cst.lower_bound(N, k)
    scale = cst.sector_numerator(f, N, k)
    for K in (K0, 0.5 * K0):
        lhs, rhs, _ = cst.completion_of_squares(f, N, k, K)
        worst = max(worst, relative_residual(lhs, rhs, scale))
    c = 0.5 * (2 * N + 2 * k + K0)
    worst = max(worst, abs(cst.completion_coefficient(N, k, K0)) / (c * c))
    # the half-bound coefficient must stay away from zero
    if abs(cst.completion_coefficient(N, k, 0.5 * K0)) < 1e-6:
        worst = math.inf
    return worst


def _id_lift(N, case):
    v, k = _fn(case), case["k"]
    d = N + 2 * k
    w = lift_w(v, N, k)
    ev, ew = energies(v, d), energies(w, d + 2)
    return max(relative_residual(ev.grad, ew.l2), relative_residual(ev.lap, ew.grad))


def _id_curlfree(N, case):
    u = _fn(case)
    return relative_residual(hessian_hs_energy(u, N), energies(u, N).lap)


def _id_sector_mc(N, case):
    s = _sep(case)
    worst = 0.0
    for i, which in enumerate(("grad", "lap", "x2_grad", "l2")):
        mc = direct_energies_mc(s, which, case["samples"], case["seed"] + i)
        exact = sector_energies(s, which)
        worst = max(worst, abs(mc.estimate - exact) / (3.0 * mc.std_error))
    return worst


# -- inequality checks (signed violation / energy scale) ----------------------
def _scale(u, N):
    return max(energies(u, N).scale, 1e-300)


def _ineq_first_order(N, case):
    u = _fn(case)
    return (dist_l2_to_hup(u, N).value_sq - deficits(u, N).theta1) / _scale(u, N)


def _ineq_theta2(N, case):
    u = _fn(case)
    d = deficits(u, N)
    d1 = dist_l2_to_hup(u, N).value_sq
    scale = max(_scale(u, N) ** 2, 1e-300)
    return (N * d.energies.l2 * d1 + d1 * d1 - d.theta2) / scale


def _ineq_t1(N, case):
    u = _fn(case)
    K = cst.k_of_n(N)
    return (0.5 * K * dist_grad_to_shup(u, N).value_sq - deficits(u, N).delta1) / _scale(u, N)


def _ineq_t2(N, case):
    u = _fn(case)
    K = cst.k_of_n(N)
    return (K * dist_grad_pinned(u, N, 1.0).value_sq - deficits(u, N).delta2) / _scale(u, N)


def _ineq_t21(N, case):
    u = _fn(case)
    K = cst.k_of_n(N)
    return (0.25 * K * dist_grad_norm_matched(u, N).value_sq - deficits(u, N).delta1) / _scale(u, N)


def _ineq_t3(N, case):
    u = _fn(case)
    K = cst.k_of_n(N)
    d3 = delta3_from_potential(u, N)
    v1 = 0.5 * K * dist_vector_cfhup(u, N, "l2").value_sq - d3
    v2 = 0.25 * K * dist_vector_cfhup(u, N, "norm_matched").value_sq - d3
    return max(v1, v2) / _scale(u, N)


def _ineq_t3_equals(N, case):
    u = _fn(case)
    return abs(delta3_from_potential(u, N) - deficits(u, N).delta1) / _scale(u, N)


def _ineq_t4(N, case):
    v = _fn(case)
    lhs = hessian_gaussian_energy(v, N)
    rhs = gaussian_poincare_rhs(v, N)
    return (cst.k_of_n(N) * rhs - lhs) / max(lhs, rhs, _scale(v, N))


def _ineq_amgm(N, case):
    d = deficits(_fn(case), N)
    v = max(2 * d.delta1 - d.delta2, -d.delta1, 2 * d.theta1 - d.theta3, -d.theta1, -d.theta2)
    return v / d.energies.scale


def _ineq_poincare(N, case):
    u = _fn(case)
    return -radial_gaussian_poincare_gap(u, N) / _scale(u, N)


def gaussian_poincare_chain(s: SeparableFn) -> tuple[float, float, float]:
    """The three members of the improved Gaussian Poincare chain at lambda = 1.

    For ``u = v0(r) + c_1 v1(r) x_1`` and the standard Gaussian measure, angular
    averages (``x_1^2 -> r^2/N``) reduce every term to a radial integral.
    """
    N = s.ambient_dim
    if any(k not in (0, 1) for k in s.degrees):
        raise ValueError("the chain is implemented for sectors k in {0, 1}")
    S = sphere_area(N)
    norm = S / (2.0 * math.pi) ** (0.5 * N)
    E = lambda f: norm * radial_moment(f.times_gaussian(0.5), N) if not f.is_zero else 0.0
    const = lambda a: PolyGaussFn.gaussian(a, 0.0)
    r2 = const(1.0).times_r().times_r()
    v0, v1 = s.sector(0), s.sector(1)
    c1 = harmonic_norm(N, 1)
    dv0, dv1 = pg_derivative(v0), pg_derivative(v1)
    m0 = E(v0)
    m1 = c1 * E(v1 * r2) / N
    rdv1 = dv1.times_r()
    grad1 = c1 * c1 * (E(rdv1 * rdv1) / N + 2.0 * E(v1 * rdv1) / N + E(v1 * v1))
    grad0 = E(dv0 * dv0)
    dev0 = v0 - const(m0)
    var0 = E(dev0 * dev0)
    Ta = grad0 + grad1 - (var0 + c1 * c1 * E(v1 * v1 * r2) / N)
    Tb = 0.5 * (grad0 + grad1 - 2.0 * m1 * c1 * (E(rdv1) / N + E(v1)) + m1 * m1)
    dev1 = v1.scaled(c1) - const(m1)
    Tc = var0 + E(dev1 * dev1 * r2) / N
    return Ta, Tb, Tc


def _ineq_poincare_chain(N, case):
    s = _sep(case)
    Ta, Tb, Tc = gaussian_poincare_chain(s)
    scale = max(abs(Ta), abs(Tb), abs(Tc), 1e-300)
    return max(Tb - Ta, Tc - Tb) / scale


def _theta1_separable(s: SeparableFn) -> float:
    N = s.ambient_dim
    e = all_sector_energies(s)
    g, x2, l2 = e["grad"], e["x2_l2"], e["l2"]
    return math.sqrt(g) * math.sqrt(x2) - 0.5 * N * l2


def _ineq_d2(N, case):
    s = _sep(case)
    scale = max(sector_energies(s, w) for w in ("grad", "x2_l2", "l2"))
    return (dist_d2_partial(s).value_sq - _theta1_separable(s)) / scale


@dataclass(frozen=True)
class _Check:
    name: str
    kind: str
    tag: str
    make: Callable
    evaluate: Callable
    tol: float


def _single(rng, N, gaussian_only):
    return {"fn": random_profile(rng, gaussian_only).to_spec()}


def _with_k(kmax):
    def make(rng, N, gaussian_only):
        return {"fn": random_profile(rng, gaussian_only).to_spec(), "k": int(rng.integers(0, kmax + 1))}
    return make


def _with_k_pos(rng, N, gaussian_only):
    return {"fn": random_profile(rng, gaussian_only).to_spec(), "k": int(rng.integers(1, 4))}


def _separable(ks):
    def make(rng, N, gaussian_only):
        profiles = {k: random_profile(rng, gaussian_only) for k in ks}
        return {"sep": SeparableFn.from_profiles(N, profiles).to_spec()}
    return make


IDENTITY_CHECKS = (
    _Check("hup_identity", "identity", "HUP identity", _single, _id_hupi, IDENTITY_TOL),
    _Check("hessian_gaussian_identity", "identity", "Hessian-Gaussian identity", _single, _id_hessian, IDENTITY_TOL),
    _Check("sector_energies", "identity", "Bochner sector identities", _separable((0, 1, 2, 3)), _id_sector, IDENTITY_TOL),
    _Check("x2grad_decomposition", "identity", "x2-gradient sector decomposition", _with_k(4), _id_x2grad, IDENTITY_TOL),
    _Check("completion_of_squares", "identity", "square completion at the lower bound", _with_k_pos, _id_completion, IDENTITY_TOL),
    _Check("lift_w", "identity", "dimension lift", _with_k(4), _id_lift, IDENTITY_TOL),
    _Check("curl_free_energy", "identity", "Hessian vs Laplacian energy", _single, _id_curlfree, IDENTITY_TOL),
)

INEQUALITY_CHECKS = (
    _Check("first_order_stability", "inequality", "first-order stability", _single, _ineq_first_order, INEQUALITY_TOL),
    _Check("theta2_consequence", "inequality", "first-order stability, product form", _single, _ineq_theta2, INEQUALITY_TOL),
    _Check("second_order_stability", "inequality", "second-order stability, gradient distance", _single, _ineq_t1, INEQUALITY_TOL),
    _Check("linearized_stability", "inequality", "linearized deficit, pinned Gaussian", _single, _ineq_t2, INEQUALITY_TOL),
    _Check("norm_matched_stability", "inequality", "norm-matched stability", _single, _ineq_t21, INEQUALITY_TOL),
    _Check("curl_free_stability", "inequality", "curl-free field stability", _single, _ineq_t3, INEQUALITY_TOL),
    _Check("curl_free_deficit_identity", "inequality", "vector deficit equals scalar deficit", _single, _ineq_t3_equals, INEQUALITY_TOL),
    _Check("second_order_poincare", "inequality", "second-order Gaussian Poincare", _single, _ineq_t4, INEQUALITY_TOL),
    _Check("amgm_chain", "inequality", "AM-GM chain of deficits", _single, _ineq_amgm, INEQUALITY_TOL),
    _Check("radial_poincare_gap", "inequality", "radial Gaussian Poincare", _single, _ineq_poincare, INEQUALITY_TOL),
    _Check("improved_poincare_chain", "inequality", "improved Gaussian Poincare chain", _separable((0, 1)), _ineq_poincare_chain, INEQUALITY_TOL),
    _Check("d2_stability", "inequality", "stability of the first-order deficit in d2", _separable((0, 1)), _ineq_d2, INEQUALITY_TOL),
)

_REGISTRY = {c.name: c for c in IDENTITY_CHECKS + INEQUALITY_CHECKS}
_REGISTRY["sector_mc"] = _Check("sector_mc", "identity", "sector energies vs Monte Carlo",
                                None, _id_sector_mc, 1.0)


def reevaluate(name: str, N: int, witness: str) -> float:
    """Recompute a check's residual from its serialized witness."""
    return float(_REGISTRY[name].evaluate(N, json.loads(witness)))


def _run(check: _Check, N: int, n_cases: int, rng, gaussian_only: bool) -> CheckResult:
    worst, witness = -math.inf, None
    for _ in range(n_cases):
        case = check.make(rng, N, gaussian_only)
        r = float(check.evaluate(N, case))
        if r > worst or (math.isnan(r) and witness is None):
            worst, witness = r, case
    passed = bool(worst <= check.tol)
    return CheckResult(check.name, check.kind, worst, check.tol, passed, check.tag,
                       json.dumps(witness, sort_keys=True))


def run_identity_suite(N: int, tol: float = IDENTITY_TOL, corpus_size: int = 100, seed: int = 0,
                       mc: bool = False, gaussian_only: bool = False) -> list[CheckResult]:
    """Exact identities on a seeded corpus; failures are reported, never raised."""
    out = []
    for i, chk in enumerate(IDENTITY_CHECKS):
        chk = _Check(chk.name, chk.kind, chk.tag, chk.make, chk.evaluate, tol)
        out.append(_run(chk, N, corpus_size, corpus_rng(seed, N, i), gaussian_only))
    if mc:
        if N not in (2, 3):
            raise ValueError("the Monte-Carlo cross-check supports N in {2, 3}")
        rng = corpus_rng(seed, N, 100)
        case = _separable((0, 1))(rng, N, gaussian_only)
        case.update(samples=MC_SAMPLES, seed=seed)
        r = _id_sector_mc(N, case)
        out.append(CheckResult("sector_mc", "identity", r, 1.0, bool(r <= 1.0),
                               "sector energies vs Monte Carlo (3 sigma)", json.dumps(case, sort_keys=True)))
    return sorted(out, key=lambda c: c.name)


def run_inequality_suite(N: int, trials: int = 200, seed: int = 0, tol: float = INEQUALITY_TOL,
                         gaussian_only: bool = False) -> list[CheckResult]:
    """Stability inequalities with constant ``K(N)``; residual is the max signed violation."""
    out = []
    for i, chk in enumerate(INEQUALITY_CHECKS):
        chk = _Check(chk.name, chk.kind, chk.tag, chk.make, chk.evaluate, tol)
        out.append(_run(chk, N, trials, corpus_rng(seed, N, 1000 + i), gaussian_only))
    return sorted(out, key=lambda c: c.name)


# -- sharpness ----------------------------------------------------------------
def pinned_distance_separable(s: SeparableFn) -> float:
    """``inf_c ||grad(u - c exp(-|x|^2/2))||^2``; only the k=0 sector sees the Gaussian."""
    N = s.ambient_dim
    total = sector_energies(s, "grad")
    v0 = s.sector(0)
    if v0.is_zero:
        return total
    ip = float(grad_inner_gaussian(v0, N, 1.0)[0])
    return max(total - ip * ip / float(gaussian_gradient_norm_sq(N, 1.0)), 0.0)


def sharpness_ratio(s: SeparableFn, C: float) -> float:
    N = s.ambient_dim
    delta2 = sum(sector_energies(s, w) for w in ("lap", "x2_grad")) - (N + 2) * sector_energies(s, "grad")
    return delta2 / (C * pinned_distance_separable(s))


def sharpness_probe(N: int, estimate: Optional[cst.StabilityEstimate] = None,
                    profile: Optional[PolyGaussFn] = None) -> CheckResult:
    """Tightness of the linearized stability inequality on the k=1 Rayleigh minimizer.

    The ratio uses the sharp constant ``sqrt(N^2+4N-4) - N``; it is at least 1
    for every input and close to 1 only for near-extremal ones.  Passing a
    ``profile`` replaces the minimizer (used for control inputs).
    """
    lo, hi = SHARPNESS_WINDOW
    C = cst.reference_value(N)
    details = {"C_reference": C}
    if profile is None:
        est = estimate if estimate is not None else cst.estimate_C(N, 1)
        details["C_numeric"] = est.value
        if not est.converged:
            details["skipped"] = "stability constant did not converge"
            return CheckResult("sharpness", "sharpness", math.inf, 0.0, False,
                               "sharpness of the linearized constant", None, details)
        profile = est.minimizer()
        details["value_over_reference"] = est.value / C
    s = SeparableFn.from_profiles(N, {1: profile})
    ratio = sharpness_ratio(s, C)
    details["ratio"] = ratio
    residual = max(ratio - hi, lo - ratio)
    return CheckResult("sharpness", "sharpness", residual, 0.0, bool(residual <= 0.0),
                       "sharpness of the linearized constant",
                       json.dumps(s.to_spec(), sort_keys=True), details)


# -- reports ------------------------------------------------------------------
def report_dict(suite: str, N: int, seed: int, checks: list[CheckResult]) -> dict:
    return {"suite": suite, "N": N, "seed": seed,
            "checks": [c.to_dict() for c in sorted(checks, key=lambda c: c.name)]}


def report_json(suite: str, N: int, seed: int, checks: list[CheckResult]) -> str:
    return json.dumps(report_dict(suite, N, seed, checks), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not serializable: {type(x)}")


def report_csv(suite: str, N: int, seed: int, checks: list[CheckResult]) -> str:
    buf = io.StringIO()
    buf.write(cst.CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("suite", "N", "seed", "name", "kind", "residual", "tolerance", "passed"))
    for c in sorted(checks, key=lambda c: c.name):
        w.writerow((suite, N, seed, c.name, c.kind, repr(c.residual), repr(c.tolerance), str(c.passed).lower()))
    return buf.getvalue()


__all__ = [
    "CheckResult",
    "IDENTITY_CHECKS",
    "INEQUALITY_CHECKS",
    "corpus_rng",
    "random_profile",
    "reevaluate",
    "run_identity_suite",
    "run_inequality_suite",
    "gaussian_poincare_chain",
    "pinned_distance_separable",
    "sharpness_ratio",
    "sharpness_probe",
    "report_dict",
    "report_json",
    "report_csv",
]
