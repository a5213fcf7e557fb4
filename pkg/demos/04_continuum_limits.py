"""Continuum densities in each regime and the stress they exert.

The closed forms (inverse square root, straight line, plateau) need no
solver.  The two critical regimes are solved numerically: a collocation
scheme for the non-local first one and an exact inverse relation for the
second.  Each closure should return the applied stress in the bulk.
"""

import math

import numpy as np

from pileup import MaterialParams, Regime, continuum_density, internal_stress

n = 150
cases = [(Regime.SUBCRITICAL, 4 / (n * math.sqrt(n)), 1), (Regime.FIRST_CRITICAL, 5 / n, 2),
         (Regime.INTERMEDIATE, 1 / math.sqrt(n), 3), (Regime.SECOND_CRITICAL, 1.0, 4)]
for regime, beta, closure in cases:
    p = MaterialParams.from_beta(beta, n)
    dimless = continuum_density(p, regime)
    rho = continuum_density(p, regime, frame="dimensional")
    if regime is Regime.SECOND_CRITICAL:
        rho = type(rho)(rho.grid[:-1], rho.values[:-1], rho.frame)  # drop the zero tip
    tau = internal_stress(closure, rho, p)
    L = rho.grid[-1]
    bulk = (rho.grid > 0.2 * L) & (rho.grid < 0.8 * L)
    print(f"{regime.label:15s} support {dimless.grid[-1]:.4f} (dimensionless);"
          f" internal stress / sigma in the bulk: {np.min(tau[bulk]) / p.sigma:.4f}"
          f" .. {np.max(tau[bulk]) / p.sigma:.4f}")
