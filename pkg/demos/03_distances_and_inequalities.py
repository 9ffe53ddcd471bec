# # Distances to the optimizer manifolds and the stability inequalities

import numpy as np

from hupstab import constants as cst
from hupstab.functionals import deficits, gaussian_poincare_rhs, hessian_gaussian_energy
from hupstab.manifold import (
    dist_grad_norm_matched,
    dist_grad_pinned,
    dist_grad_to_shup,
    dist_l2_to_hup,
)
from hupstab.polygauss import PolyGaussFn

N = 3
K = cst.k_of_n(N)
print(f"K({N}) = {K:.6f}")

# ## A one-parameter family leaving the manifold
#
# u_eps = (1 + eps r^2) exp(-r^2/2).  The perturbation r^2 exp(-r^2/2) is
# tangent to the manifold (it changes beta), so delta1 and the free-beta
# distances grow like eps^4.  With beta pinned, delta2 and the distance grow
# like eps^2.  Every column pair keeps its ratio above the constant.

print(" eps      delta1       (K/2) d^2     (K/4) d_nm^2   delta2     K d_pin^2")
for eps in (1e-3, 1e-2, 1e-1, 0.5, 2.0):
    u = PolyGaussFn.from_terms([([1.0, eps], 0.5)])
    d = deficits(u, N)
    g = dist_grad_to_shup(u, N).value_sq
    nm = dist_grad_norm_matched(u, N).value_sq
    pin = dist_grad_pinned(u, N).value_sq
    print(f"{eps:6.0e}  {d.delta1:11.4e}  {0.5 * K * g:11.4e}  {0.25 * K * nm:11.4e}  {d.delta2:11.4e}  {K * pin:11.4e}")

# ## First order: theta1 against the L^2 distance

for eps in (1e-2, 1e-1, 1.0):
    u = PolyGaussFn.from_terms([([1.0, eps], 0.5)])
    r = dist_l2_to_hup(u, N)
    print(f"eps={eps}: theta1={deficits(u, N).theta1:.4e}  d1^2={r.value_sq:.4e}  (alpha, beta)=({r.alpha_star:.4f}, {r.beta_star:.4f})")

# ## Second-order Gaussian Poincare inequality
#
# The Hessian energy with weight exp(-|x|^2) controls the weighted distance
# of grad v from (v - c) x.

rng = np.random.default_rng(0)
for _ in range(5):
    v = PolyGaussFn.from_terms([(rng.uniform(-1, 1, 3), rng.uniform(0.1, 0.4))])
    lhs, rhs = hessian_gaussian_energy(v, N), gaussian_poincare_rhs(v, N)
    print(f"lhs={lhs:9.4f}  K*rhs={K * rhs:9.4f}  ratio={lhs / rhs:.4f}")
