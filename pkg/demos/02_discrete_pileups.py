"""Equilibrium pile-ups of n = 150 walls at three applied stresses.

With K = 1 and h = 10, a large stress squeezes the walls into a cusp at the
obstacle, a moderate one gives a peak followed by a slow decay, and a tiny
one leaves the walls almost equispaced far from each other.
"""

import numpy as np

from pileup import MaterialParams, classify, discrete_density, solve_equilibrium

for sigma in (40.0, 0.01, 0.0005):
    p = MaterialParams(K=1.0, h=10.0, sigma=sigma, n=150)
    walls = solve_equilibrium(p)
    rho = discrete_density(walls)
    cls = classify(p)
    info = walls.info
    print(f"sigma = {sigma:<7g} beta = {cls.beta:.4g}  regime {cls.regime.label:15s}"
          f" Newton iterations {info['iterations']:2d}  residual {info['residual_norm']:.1e}")
    print(f"   pile-up length {walls.positions[-1]:.4g}, density at walls 1, 10, 75, 150:",
          np.array2string(rho.values[[0, 9, 74, 149]], precision=4))
