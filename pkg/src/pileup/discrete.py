"""Discrete wall pile-up: energies, force residuals and equilibrium solvers.

Walls sit at 0 = x_0 < x_1 < ... < x_n; the wall at 0 is pinned.  The force
on wall i is ``(K/h) sum_{j != i} f((x_i - x_j)/h) - sigma`` with
``f = phi`` for dislocation walls and ``f = psi`` for the single-slip-plane
(EFN) model.  Equilibria are minimisers of the convex energy
``K sum_{i<j} U((x_j - x_i)/h) + sigma sum_i x_i`` with ``U' = -f``.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import kernels
from .density import DIMENSIONAL, DIMENSIONLESS, FRAMES, DensityField
from .errors import ContractError, ConvergenceError, SingularConfigurationError
from .scaling import Regime, classify

log = logging.getLogger(__name__)


class PairKernel(NamedTuple):
    name: str
    force: object
    force_prime: object
    potential: object


WALL_KERNEL = PairKernel("wall", kernels.phi, kernels.phi_prime, kernels.V)
EFN_KERNEL = PairKernel("efn", kernels.psi, kernels.psi_prime, kernels.log_potential)


@dataclass(frozen=True, eq=False)
class WallConfiguration:
    """Positions of the n free walls; the pinned wall at 0 is implicit.

    In the dimensionless frame positions are measured in units of
    ``length_scale``.
    """

    positions: np.ndarray
    frame: str = DIMENSIONAL
    length_scale: float = 1.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.positions, dtype=float).ravel()
        if x.size < 1:
            raise SingularConfigurationError("a configuration needs at least one wall")
        if self.frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES}, got {self.frame!r}")
        if not np.all(np.isfinite(x)):
            raise SingularConfigurationError("positions must be finite")
        if x[0] <= 0 or np.any(np.diff(x) <= 0):
            raise SingularConfigurationError(
                "positions must satisfy 0 < x_1 < x_2 < ... < x_n")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @property
    def n(self):
        return self.positions.size

    def with_origin(self):
        return np.concatenate(([0.0], self.positions))

    def dimensional(self):
        if self.frame == DIMENSIONAL:
            return self
        return WallConfiguration(self.positions * self.length_scale, DIMENSIONAL, 1.0, dict(self.info))

    def dimensionless(self, length_scale):
        """Same configuration measured in units of ``length_scale``."""
        base = self.dimensional()
        return WallConfiguration(base.positions / length_scale, DIMENSIONLESS,
                                 float(length_scale), dict(self.info))


@dataclass(frozen=True)
class SolveSettings:
    residual_tolerance: float = 1e-10
    max_iterations: int = 200
    line_search_shrink: float = 0.5
    initial_guess: str = "equispaced_at_regime_length"
    initial_positions: tuple | None = None
    regime: object = None

    def __post_init__(self):
        if not self.residual_tolerance > 0:
            raise ValueError("residual_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.line_search_shrink < 1:
            raise ValueError("line_search_shrink must lie in (0, 1)")
        if self.initial_guess not in ("equispaced_at_regime_length", "user_supplied"):
            raise ValueError(f"unknown initial_guess {self.initial_guess!r}")
        if self.initial_guess == "user_supplied" and self.initial_positions is None:
            raise ValueError("initial_positions required for a user-supplied guess")


def _positions(config):
    if config.frame != DIMENSIONAL:
        raise ContractError("expected a dimensional configuration")
    return config.positions


def _pair_potential_sum(x_all, h, potential):
    """sum_{i<j} U((x_j - x_i)/h) accumulated by neighbour order k."""
    total = 0.0
    n1 = x_all.size
    for k in range(1, n1):
        total += math.fsum(potential((x_all[k:] - x_all[:-k]) / h))
    return total


def dimensional_energy(config, params, form="one-sided", kernel=WALL_KERNEL):
    """Energy of a dimensional configuration, pinned wall included.

    ``form="one-sided"`` sums over neighbour order k; ``form="symmetric"``
    evaluates the full double sum over ordered pairs and halves it.
    """
    x_all = np.concatenate(([0.0], _positions(config)))
    linear = params.sigma * math.fsum(x_all)
    if form == "one-sided":
        interaction = params.K * _pair_potential_sum(x_all, params.h, kernel.potential)
    elif form == "symmetric":
        diff = (x_all[:, None] - x_all[None, :]) / params.h
        off = ~np.eye(x_all.size, dtype=bool)
        interaction = 0.5 * params.K * math.fsum(kernel.potential(diff[off]))
    else:
        raise ValueError(f"unknown energy form {form!r}")
    return interaction + linear


def dimensionless_energy(config, params, regime):
    """Rescaled energy E_n(x) = E~_n(l_n x) / (n^2 sigma h alpha_n).

    The subcritical form uses the renormalised density ``v_hat`` so that the
    energy stays of order one; the other regimes use V.
    """
    if config.frame != DIMENSIONLESS:
        raise ContractError("dimensionless_energy needs a dimensionless configuration")
    if not math.isclose(config.length_scale, regime.length_scale, rel_tol=1e-12):
        raise ContractError(
            f"configuration length scale {config.length_scale!r} does not match the "
            f"regime's {regime.length_scale!r}")
    n = params.n
    alpha = regime.alpha
    x_all = config.with_origin()
    arg_scale = n * alpha
    if regime.regime is Regime.SUBCRITICAL:
        shift = kernels.v_hat_shift(n, regime.beta)
        npairs = x_all.size * (x_all.size - 1) // 2
        pair_sum = _pair_potential_sum(x_all * arg_scale, 1.0, kernels.V) + shift * npairs
        prefactor = 1.0 / n**2
    else:
        pair_sum = _pair_potential_sum(x_all * arg_scale, 1.0, kernels.V)
        prefactor = params.K / (n**2 * params.sigma * params.h * alpha)
    return prefactor * pair_sum + math.fsum(x_all) / n


def _forces(x, params, kernel, with_jacobian=False):
    x_all = np.concatenate(([0.0], x))
    s = (x[:, None] - x_all[None, :]) / params.h
    n = x.size
    rows = np.arange(n)
    s[rows, rows + 1] = np.inf  # self-interaction placeholder
    finite = np.isfinite(s)
    f = np.zeros_like(s)
    f[finite] = kernel.force(s[finite])
    r = (params.K / params.h) * f.sum(axis=1) - params.sigma
    if not with_jacobian:
        return r
    fp = np.zeros_like(s)
    fp[finite] = kernel.force_prime(s[finite])
    scale = params.K / params.h**2
    # H = -dr/dx: symmetric positive definite on the ordered cone
    H = scale * fp[:, 1:]
    H[rows, rows] = -scale * fp.sum(axis=1)
    return r, H


def residual(config, params, kernel=WALL_KERNEL):
    """Net stress on each free wall (zero at equilibrium); equals minus the energy gradient."""
    return _forces(_positions(config), params, kernel)


def _ordered(x, min_gap):
    return x[0] > min_gap and np.all(np.diff(x) > min_gap)


def _newton(params, x0, settings, kernel, length_scale, stage):
    tol = settings.residual_tolerance * params.sigma
    min_gap = 1e-12 * length_scale
    x = np.array(x0, dtype=float)
    energy = lambda y: dimensional_energy(WallConfiguration(y), params, kernel=kernel)
    E = energy(x)
    history = [E]
    rnorm = math.inf
    for it in range(settings.max_iterations + 1):
        r, H = _forces(x, params, kernel, with_jacobian=True)
        rnorm = float(np.max(np.abs(r)))
        if rnorm < tol:
            return x, {"iterations": it, "residual_norm": rnorm, "energy_history": history}
        if it == settings.max_iterations:
            break
        try:
            step = scipy.linalg.cho_solve(scipy.linalg.cho_factor(H), r)
            method = "newton"
        except np.linalg.LinAlgError:
            step, method = None, "gradient"
        if step is None or not float(r @ step) > 0:
            step, method = r / np.diag(H), "gradient"
        slope = float(r @ step)  # -dE along the step
        a = 1.0
        while not _ordered(x + a * step, min_gap):
            a *= settings.line_search_shrink
            if a < 1e-16:
                break
        accepted = False
        while a >= 1e-16:
            trial = x + a * step
            if _ordered(trial, min_gap):
                E_trial = energy(trial)
                if E_trial <= E - 1e-4 * a * slope:
                    accepted = True
                elif abs(E_trial - E) <= 64 * np.finfo(float).eps * (abs(E) + abs(E_trial)):
                    # energy differences are below rounding; judge by the residual
                    accepted = np.max(np.abs(_forces(trial, params, kernel))) < rnorm
                if accepted:
                    break
            a *= settings.line_search_shrink
        if not accepted:
            log.debug("%s: line search failed at iteration %d (%s step)", stage, it, method)
            break
        x, E = trial, E_trial
        history.append(E)
    raise ConvergenceError(
        f"{stage}: residual {rnorm:.3e} above tolerance {tol:.3e}",
        best=WallConfiguration(x, info={"residual_norm": rnorm}),
        residual_norm=rnorm, iterations=it, stage=stage)


def _initial_positions(params, settings):
    regime = classify(params, regime=settings.regime)
    if settings.initial_guess == "user_supplied":
        x0 = np.asarray(settings.initial_positions, dtype=float)
        if x0.size != params.n:
            raise ContractError(f"initial guess has {x0.size} walls, expected {params.n}")
        WallConfiguration(x0)
    else:
        x0 = regime.length_scale * np.arange(1, params.n + 1) / params.n
    return x0, regime


def solve_equilibrium(params, settings=None, kernel=WALL_KERNEL):
    """Equilibrium positions of the n walls by damped Newton on the residual.

    Raises
    ------
    ConvergenceError
        With the best iterate attached if the tolerance is not reached.
    """
    settings = settings or SolveSettings()
    x0, regime = _initial_positions(params, settings)
    x, info = _newton(params, x0, settings, kernel, regime.length_scale,
                      stage=f"solve-{kernel.name}")
    info["kernel"] = kernel.name
    info["regime"] = regime.regime.label
    return WallConfiguration(x, info=info)


def solve_efn(params, settings=None):
    """Equilibrium of n single-plane dislocations (kernel psi) against a pinned one at 0."""
    return solve_equilibrium(params, settings, kernel=EFN_KERNEL)


def discrete_density(config):
    """Discrete density 1 / (x_i - x_{i-1}) sampled at x_i, with x_0 = 0."""
    x = config.positions
    gaps = np.diff(np.concatenate(([0.0], x)))
    return DensityField(x, 1.0 / gaps, frame=config.frame, length_scale=config.length_scale,
                        meta={"source": "discrete", **{k: v for k, v in config.info.items()
                                                       if k != "energy_history"}})
