"""Equilibria of dislocation-wall pile-ups against a pinned obstacle.

Modules
-------
kernels     interaction kernels phi, V, psi and their effective sums
discrete    wall configurations, energies, residuals and equilibrium solvers
scaling     beta_n, regime classification and length scales
continuum   continuum densities and internal-stress closures
compare     discrete versus continuum agreement
cli         command-line front end
"""

from .compare import ComparisonReport, bulk_error, normalize, run_comparison
from .continuum import (IntegralSolveSettings, constant_density, continuum_density,
                        gcz_stress, head_louat_density, internal_stress, linear_density,
                        nearest_neighbour_stress, solve_first_critical,
                        solve_second_critical)
from .density import DIMENSIONAL, DIMENSIONLESS, DensityField
from .discrete import (SolveSettings, WallConfiguration, dimensional_energy,
                       dimensionless_energy, discrete_density, residual, solve_efn,
                       solve_equilibrium)
from .errors import (ContractError, ConvergenceError, DensityDomainError,
                     InadmissibleParametersError, KernelDomainError, NoClosedFormError,
                     PileupError, SingularArgumentError, SingularConfigurationError,
                     SolverFailure, UnsupportedRegimeError)
from .kernels import (KernelEvalPolicy, V, phi, phi_eff, phi_eff_prime, phi_prime, psi,
                      v_eff, v_hat)
from .params import MaterialParams
from .scaling import (ClassifierThresholds, Regime, RegimeClassification, beta, classify,
                      pileup_length, scaling_for)

__all__ = [name for name in dir() if not name.startswith("_")]
