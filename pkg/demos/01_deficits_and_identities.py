# # Deficits of the uncertainty principles, computed exactly
#
# Every function below is a finite sum of polynomial-times-Gaussian terms, so
# all integrals are closed-form Gamma moments.  No quadrature is involved.

import math

import numpy as np

from hupstab.functionals import (
    deficits,
    dilate,
    energies,
    hessian_gaussian_energy,
    hup_identity_rhs,
)
from hupstab.polygauss import PolyGaussFn

# ## Gaussians are the optimizers

N = 3
for beta in (0.25, 0.5, 2.0):
    d = deficits(PolyGaussFn.gaussian(1.0, beta), N)
    print(f"beta={beta:<5} theta1={d.theta1: .1e}  delta1={d.delta1: .1e}  delta2={d.delta2: .3f}")

# theta1 and delta1 are dilation invariant up to a power of the scale, so every
# Gaussian is an optimizer.  delta2 only vanishes at exp(-r^2/2).

# ## A perturbed Gaussian

u = PolyGaussFn.from_terms([([1.0, 0.3, -0.05], 0.5), ([0.4], 1.7)])
d = deficits(u, N)
print(d.to_json())

# ## The HUP identity
#
# The first-order deficit is a weighted Dirichlet energy of u times an inverse
# Gaussian.  Both sides are exact; they agree to rounding.

print("theta1     ", d.theta1)
print("identity   ", hup_identity_rhs(u, N))

# ## The Hessian-Gaussian identity
#
# delta2(u) equals the Gaussian-weighted Hessian energy of v = u exp(r^2/2).

v = u.times_gaussian(-0.5)
print("delta2     ", d.delta2)
print("identity   ", hessian_gaussian_energy(v, N))

# ## Scaling laws

for lam in (0.5, 1.0, 2.0):
    dl = deficits(dilate(u, lam), N)
    print(f"lam={lam}: theta1*lam^N = {dl.theta1 * lam**N:.12f}   delta1*lam^(N-2) = {dl.delta1 * lam ** (N - 2):.12f}")

# ## Energies on a grid of dimensions

rows = [energies(u, n) for n in range(2, 8)]
print("N      l2        grad      lap       x2_l2     x2_grad")
for e in rows:
    print(f"{e.dim:<3}" + "".join(f"{x:10.4f}" for x in (e.l2, e.grad, e.lap, e.x2_l2, e.x2_grad)))
