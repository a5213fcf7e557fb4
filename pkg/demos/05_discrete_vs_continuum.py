"""Side-by-side agreement of n = 150 wall pile-ups with their continuum limits.

Both densities are normalised to unit mass and compared away from the two
boundary layers.  The subcritical fit also settles which amplitude of the
inverse square-root profile carries n walls.
"""

import math

from pileup import MaterialParams, run_comparison

n = 150
for name, beta in {"4/(n sqrt n)": 4 / (n * math.sqrt(n)), "5/n": 5 / n,
                   "1/sqrt n": 1 / math.sqrt(n), "1": 1.0, "1e8": 1e8}.items():
    rep = run_comparison(MaterialParams.from_beta(beta, n))
    print(f"beta = {name:13s} {rep.regime.regime.label:15s} bulk L2 error "
          f"{rep.bulk_error_l2:6.2%}   max {rep.bulk_error_max:6.2%}")
    fits = rep.fitted_parameters
    if "linear" in fits:
        print(f"    fitted slope {fits['linear']['slope']:.4f}, expected {-3 * math.pi:.4f}")
    if "plateau" in fits:
        print(f"    bulk plateau {fits['plateau']['level']:.4f}; the approach to 1 is logarithmic"
              " in beta")

fit = run_comparison(MaterialParams.from_beta(6 / (n * math.sqrt(n)), n)).fitted_parameters[
    "inverse_sqrt"]
print(f"\ninverse square-root fit: A = {fit['amplitude']:.1f}, 95% CI "
      f"[{fit['amplitude_ci'][0]:.1f}, {fit['amplitude_ci'][1]:.1f}]")
for key, value in fit["candidate_prefactors"].items():
    print(f"    candidate {key:10s} = {value:8.1f}, {fit['ci_halfwidths_from_fit'][key]:7.1f}"
          " CI half-widths away")
print("supported:", fit["supported_prefactor"])
