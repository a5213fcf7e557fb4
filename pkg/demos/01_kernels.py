"""Wall-wall interaction kernels and their neighbour sums.

Two walls at separation s (in units of the in-wall spacing h) repel with
stress phi(s) = s / sinh(pi s)^2.  Close up this looks like the Cauchy
kernel 1/(pi^2 s) of two single dislocations; far apart it is exponentially
screened.  The effective sums over all neighbours of an equispaced array
interpolate between the two.
"""

import math

import numpy as np

from pileup import kernels

print("separation   phi(s)        1/(pi^2 s)    V(s)")
for s in (1e-3, 0.1, 0.5, 1.0, 2.0, 5.0):
    print(f"{s:9.3g}   {kernels.phi(s):.6e}  {kernels.psi(s):.6e}  {kernels.V(s):.6e}")

# phi is -V', and V integrates to 1/(6 pi) on the half line
s = np.geomspace(1e-3, 10, 5)
d = 1e-6 * s
fd = -(kernels.V(s + d) - kernels.V(s - d)) / (2 * d)
print("\nmax |(-V') / phi - 1| on a log grid:", np.max(np.abs(fd / kernels.phi(s) - 1)))
print("closed-form int_0^inf V:", kernels.V_HALF_INTEGRAL, " 1/(6 pi):", 1 / (6 * math.pi))

# neighbour sums: dense arrays feel 1/(6 pi t^2), sparse ones only the nearest wall
print("\nspacing t   phi_eff(t)    1/(6 pi t^2)  phi(t)")
for t in (0.01, 0.1, 0.5, 1.0, 3.0):
    print(f"{t:8.3g}   {kernels.phi_eff(t):.6e}  {1 / (6 * math.pi * t * t):.6e}  "
          f"{kernels.phi(t):.6e}")
