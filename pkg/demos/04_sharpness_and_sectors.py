# # Sharpness of the linearized constant and the sector picture
#
# Functions of the form v(r) r^k phi_k live in one spherical-harmonic sector.
# Their energies reduce to radial energies on R^(N+2k).

import numpy as np

from hupstab import constants as cst
from hupstab import verify as vf
from hupstab.harmonics import SeparableFn, direct_energies_mc, sector_energies
from hupstab.polygauss import PolyGaussFn

# ## Sector energies against a Monte-Carlo oracle

s = SeparableFn.from_profiles(2, {0: PolyGaussFn.from_terms([([1.0, -0.3], 0.7)]),
                                  1: PolyGaussFn.from_terms([([0.5, 0.2], 0.9)])})
for name in ("l2", "grad", "lap"):
    mc = direct_energies_mc(s, name, samples=400_000, seed=1)
    print(f"{name:5s} exact={sector_energies(s, name):.6f}  mc={mc.estimate:.6f} +- {mc.std_error:.6f}")

# ## The sharpness probe
#
# The k = 1 Rayleigh minimizer, placed in the x_1 sector, makes the linearized
# deficit almost exactly C(N) times the squared pinned distance.

for N in (2, 3, 5):
    res = vf.sharpness_probe(N)
    print(f"N={N}: ratio={res.details['ratio']:.10f}  passed={res.passed}")

# A plain Gaussian in the same sector is far from extremal.

ctrl = vf.sharpness_probe(3, profile=PolyGaussFn.gaussian(1.0, 0.5))
print("control ratio", round(ctrl.details["ratio"], 6), "= 2N/(N+2) / C(N) =",
      round(cst.gaussian_quotient(3, 1) / cst.reference_value(3), 6))

# ## The improved Gaussian Poincare chain on a separable input

Ta, Tb, Tc = vf.gaussian_poincare_chain(s)
print(f"T_a={Ta:.5f} >= T_b={Tb:.5f} >= T_c={Tc:.5f}")
