"""How beta = sqrt(K / (n sigma h)) picks the scaling regime.

The subcritical regime (beta << 1/n) is the classical single-plane pile-up;
the supercritical one (beta >> 1) is a chain of almost isolated walls.  In
between the neighbour sums matter.  The classifier bands are adjustable.
"""

import math

from pileup import ClassifierThresholds, MaterialParams, classify

n = 150
cases = {"4/(n sqrt n)": 4 / (n * math.sqrt(n)), "5/n": 5 / n, "1/sqrt n": 1 / math.sqrt(n),
         "1": 1.0, "1e8": 1e8}
for name, beta in cases.items():
    cls = classify(MaterialParams.from_beta(beta, n))
    print(f"beta = {name:13s} n beta = {n * beta:10.4g}  -> {cls.regime.label:15s}"
          f" length scale {cls.length_scale:.4g}")

wide = ClassifierThresholds(low_band=(0.2, 8.0))
cls = classify(MaterialParams.from_beta(4 / (n * math.sqrt(n)), n), wide)
print("\nwith low_band = (0.2, 8) the first case becomes", cls.regime.label)
