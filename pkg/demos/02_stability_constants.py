# # Sector stability constants C(N,k)
#
# C(N,k) is the infimum of a Rayleigh quotient over radial profiles on
# R^(N+2k).  Rayleigh-Ritz over a nested Gaussian basis gives upper
# estimates; the closed-form lower bound comes from completing a square.

import numpy as np

from hupstab import constants as cst

# ## k = 1 against the known value sqrt(N^2 + 4N - 4) - N

print(" N   numeric C(N,1)     reference         error")
for N in range(2, 11):
    est = cst.estimate_C(N, 1)
    print(f"{N:2d}   {est.value:.12f}   {est.reference:.12f}   {est.value - est.reference:.1e}")

# ## Refinement history in the basis size

est = cst.estimate_C(2, 1)
print("m ladder", cst.DEFAULT_M_LIST, "values", np.array(est.history))

# ## The sandwich lower_bound <= C(N,k) <= min(2k, Gaussian quotient)

print(" N  k   lower      value      gaussian   2k")
for N in (2, 5):
    for k in range(0, 5):
        e = cst.estimate_C(N, k)
        print(f"{N:2d} {k:2d}  {e.lower:9.6f}  {e.value:9.6f}  {e.gaussian_quotient:9.6f}  {2 * k}")

# Every higher sector sits above C(N,1), so C(N) = C(N,1).

cert = cst.estimate_C_N(4, kmax=5)
print("certified:", cert.certified, {k: round(v, 4) for k, v in cert.sector_lower_bounds.items()})

# ## K(N) tends to 2

for N in (2, 10, 100, 10**4, 10**6):
    print(f"K({N}) = {cst.k_of_n(N):.8f}")

# ## The minimizing profile
#
# Its tail decays much slower than exp(-r^2/2), which is why the basis mixes
# a polynomial core with a ladder of wide Gaussians.

f = est.minimizer()
r = np.linspace(0, 8, 9)
print(np.round(f(r) / f(0.0), 6))
