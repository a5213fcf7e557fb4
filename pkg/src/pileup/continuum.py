"""Continuum pile-up densities and the internal-stress closures.

Dimensionless densities live on x = x~ / ell_n and carry unit mass; the
dimensional density with n walls is ``(n / ell_n) rho(x~ / ell_n)``.

Regime  dimensionless equilibrium                  solution
------  -----------------------------------------  ------------------------------
1       -(1/pi^2) PV int rho(y)/(x-y) dy + 1 = 0   pi sqrt((L-x)/x), L = 2/pi^2
2       c^2 PV int phi(c(x-y)) rho(y) dy = 1       numerical (collocation)
3       (1/3pi) rho' + 1 = 0                       3 pi (L-x), L = sqrt(2/(3pi))
4       -(rho'/rho^3) phi_eff'(beta/rho) = 1/beta^3  numerical (inverse relation)
5       degenerate                                 1 on (0, 1)
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from . import kernels
from .density import DIMENSIONAL, DIMENSIONLESS, DensityField
from .errors import (ContractError, DensityDomainError, SolverFailure,
                     UnsupportedRegimeError)
from .scaling import Regime, pileup_length, scaling_for

PI = math.pi
PI2 = PI * PI

HEAD_LOUAT_LENGTH = 2.0 / PI2
LINEAR_LENGTH = math.sqrt(2.0 / (3.0 * PI))


@dataclass(frozen=True)
class IntegralSolveSettings:
    """Discretisation controls for the continuum solvers.

    ``grid_stretch`` p places nodes at X (i/N)**p, clustering them near the
    origin where the first-critical density has an inverse square-root
    singularity.  ``domain_cutoff`` sets the initial truncated domain as a
    multiple of the expected support.
    """

    grid_size: int = 400
    grid_stretch: float = 2.0
    linear_system_tolerance: float = 1e-6
    domain_cutoff: float = 3.0
    density_floor: float = 1e-6

    def __post_init__(self):
        if self.grid_size < 16:
            raise ValueError("grid_size must be >= 16")
        if not self.grid_stretch >= 1:
            raise ValueError("grid_stretch must be >= 1")
        if not self.linear_system_tolerance > 0:
            raise ValueError("linear_system_tolerance must be positive")
        if not self.domain_cutoff > 1:
            raise ValueError("domain_cutoff must exceed 1")
        if not 0 < self.density_floor < 1:
            raise ValueError("density_floor must lie in (0, 1)")


def _dimensionless_to_dimensional(field, params, regime):
    _, ell = scaling_for(params, regime)
    return DensityField(field.grid * ell, field.values * params.n / ell, DIMENSIONAL,
                        1.0, dict(field.meta, length_scale_n=ell))


def _frame(field, params, regime, frame):
    if frame == DIMENSIONLESS:
        _, ell = scaling_for(params, regime)
        return DensityField(field.grid, field.values, DIMENSIONLESS, ell, dict(field.meta))
    if frame == DIMENSIONAL:
        return _dimensionless_to_dimensional(field, params, regime)
    raise ValueError(f"unknown frame {frame!r}")


# -- closed forms ----------------------------------------------------------------

def _sqrt_clustered(length, size):
    theta = np.linspace(0.0, 0.5 * PI, size + 1)[1:-1]
    return length * np.sin(theta) ** 2


def head_louat_density(params, grid_size=400, prefactor="supported", frame=DIMENSIONAL):
    """Inverse square-root pile-up A sqrt((ell - x)/x) on (0, ell), ell = 2nK/(pi^2 sigma).

    Parameters
    ----------
    prefactor : {"supported", "unit"}
        ``"supported"`` uses A = pi sigma / K, for which the field carries n
        walls and balances sigma under the regime-1 closure.  ``"unit"``
        uses A = sigma / K, whose integral is n / pi.
    frame : {"dimensional", "dimensionless"}

    Notes
    -----
    Nodes follow x = ell sin(theta)**2, which clusters them like i**2 near
    both ends.  The first node is strictly positive and the last node is the
    tip, where the density vanishes.  The trapezoid mass under-resolves the
    singularity at 0; ``meta["exact_mass"]`` holds the analytic value.
    """
    if prefactor not in ("supported", "unit"):
        raise ValueError(f"unknown prefactor {prefactor!r}")
    ell = pileup_length(params, Regime.SUBCRITICAL)
    supported = PI * params.sigma / params.K
    unit = params.sigma / params.K
    amp = supported if prefactor == "supported" else unit
    x = np.append(_sqrt_clustered(ell, grid_size), ell)
    values = amp * np.sqrt(np.clip(ell - x, 0.0, None) / x)
    exact_mass = amp * PI * ell / 2.0
    meta = {"model": "head-louat", "prefactor": amp, "prefactor_supported": supported,
            "prefactor_unit": unit, "pileup_length": ell, "exact_mass": exact_mass}
    field = DensityField(x, values, DIMENSIONAL, 1.0, meta)
    if frame == DIMENSIONAL:
        return field
    _, ell_n = scaling_for(params, Regime.SUBCRITICAL)
    return DensityField(x / ell_n, values * ell_n / params.n, DIMENSIONLESS, ell_n,
                        dict(meta, exact_mass=exact_mass / params.n))


def linear_density(params, grid_size=400, frame=DIMENSIONAL):
    """Triangular profile (2n/ell^2)(ell - x) on (0, ell), ell = sqrt(2nKh/(3 pi sigma)); mass n."""
    ell = pileup_length(params, Regime.INTERMEDIATE)
    x = np.linspace(0.0, ell, grid_size)
    field = DensityField(x, 2.0 * params.n / ell**2 * (ell - x), DIMENSIONAL, 1.0,
                         {"model": "linear", "pileup_length": ell,
                          "slope": -3.0 * PI * params.sigma / (params.K * params.h)})
    if frame == DIMENSIONAL:
        return field
    _, ell_n = scaling_for(params, Regime.INTERMEDIATE)
    return DensityField(x / ell_n, field.values * ell_n / params.n, DIMENSIONLESS, ell_n,
                        dict(field.meta, slope=-3.0 * PI))


def constant_density(params, grid_size=400, frame=DIMENSIONLESS):
    """Plateau density: 1 on (0, 1) dimensionless, 1/ell on (0, ell) dimensional.

    The dimensional field has unit mass, like the dimensionless one.
    """
    ell = pileup_length(params, Regime.SUPERCRITICAL)
    x = np.linspace(0.0, 1.0, grid_size)
    meta = {"model": "constant", "pileup_length": ell}
    if frame == DIMENSIONLESS:
        return DensityField(x, np.ones_like(x), DIMENSIONLESS, ell, meta)
    return DensityField(x * ell, np.full_like(x, 1.0 / ell), DIMENSIONAL, 1.0, meta)


# -- first critical regime ---------------------------------------------------------

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


def _log_antiderivative(u):
    """Primitive of log|u| vanishing at 0."""
    out = np.zeros_like(u)
    nz = u != 0
    out[nz] = u[nz] * np.log(np.abs(u[nz])) - u[nz]
    return out


def _cell_potential_matrix(points, edges, c):
    """A[i, j] = int over cell j of c V(c (points_i - y)) dy."""
    a, b = edges[:-1], edges[1:]
    # log part of c V(c u) = -(c/pi^2)(log c + log|u|) + c R(c u)
    P = points[:, None]
    log_part = _log_antiderivative(P - a[None, :]) - _log_antiderivative(P - b[None, :])
    A = -(c / PI2) * (math.log(c) * (b - a)[None, :] + log_part)
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b)[:, None] + half[:, None] * _GAUSS_X[None, :]
    weights = half[:, None] * _GAUSS_W[None, :]
    u = c * (points[:, None, None] - nodes[None, :, :])
    A += c * np.einsum("ijk,jk->ij", kernels.v_regular(u), weights)
    return A


def _solve_on_support(A, mids, widths, k):
    """Solve A_SS rho + x_S = lam, sum rho |I| = 1 on the first k cells."""
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = A[:k, :k]
    M[:k, k] = -1.0
    M[k, :k] = widths[:k]
    rhs = np.append(-mids[:k], 1.0)
    try:
        sol = scipy.linalg.solve(M, rhs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SolverFailure(f"first-critical collocation system is singular: {exc}",
                            stage="solve-continuum") from exc
    return sol[:k], sol[k]


def solve_first_critical(c, settings=None):
    """Unit-mass solution of c V(c .) * rho + x = lambda on the support, rho = 0 beyond.

    Differentiating in x gives the force balance
    c^2 PV int phi(c(x - y)) rho(y) dy = 1.  The density is
    piecewise constant on a graded grid, collocated at cell midpoints; the
    support is the largest leading block of cells on which the collocation
    system has a non-negative solution.

    Returns
    -------
    DensityField
        Dimensionless, sampled at the support-cell midpoints plus the tip
        (value 0), trapezoid-normalised to unit mass.  ``meta`` records the
        multiplier ``lambda``, the support length, ``collocation_residual``
        (max residual of the collocated equation at the nodes) and
        ``interstitial_residual`` (the same equation evaluated at cell edges
        inside the support, a discretisation-error indicator).

    Raises
    ------
    SolverFailure
        If no support yields a non-negative density, or the residual exceeds
        ``linear_system_tolerance``.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    settings = settings or IntegralSolveSettings()
    N = settings.grid_size
    expected = min(HEAD_LOUAT_LENGTH * c, LINEAR_LENGTH)
    X = settings.domain_cutoff * expected
    for _ in range(6):
        edges = X * (np.arange(N + 1) / N) ** settings.grid_stretch
        mids = 0.5 * (edges[:-1] + edges[1:])
        widths = np.diff(edges)
        A = _cell_potential_matrix(mids, edges, c)

        def feasible(k):
            rho, lam = _solve_on_support(A, mids, widths, k)
            return np.all(rho >= 0), rho, lam

        lo, hi = 1, N
        if feasible(hi)[0]:
            lo = hi
        else:
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if feasible(mid)[0]:
                    lo = mid
                else:
                    hi = mid
        ok, rho, lam = feasible(lo)
        if not ok:
            raise SolverFailure("no support gives a non-negative first-critical density",
                                stage="solve-continuum")
        if lo < N:
            break
        X *= 2.0
    else:
        raise SolverFailure("first-critical support keeps reaching the domain end",
                            stage="solve-continuum")
    k = lo
    potential = A[:, :k] @ rho + mids
    collocation = float(np.max(np.abs(potential[:k] - lam)))
    outside_gap = float(np.min(potential[k:] - lam)) if k < N else math.inf
    inner_edges = edges[1:k]
    if inner_edges.size:
        Ae = _cell_potential_matrix(inner_edges, edges[:k + 1], c)
        interstitial = float(np.max(np.abs(Ae @ rho + inner_edges - lam)))
    else:
        interstitial = math.nan
    if not collocation < settings.linear_system_tolerance:
        raise SolverFailure(f"collocation residual {collocation:.3e} above tolerance",
                            stage="solve-continuum")
    grid = np.append(mids[:k], edges[k])
    values = np.append(rho, 0.0)
    field = DensityField(grid, values, DIMENSIONLESS, 1.0)
    field = field.scaled(1.0 / field.mass)
    return field.with_meta(model="first-critical", c=float(c), multiplier=float(lam),
                           support=float(edges[k]), cells=int(k),
                           collocation_residual=collocation,
                           interstitial_residual=interstitial,
                           obstacle_gap=outside_gap, cell_mass=float(rho @ widths[:k]))


# -- second critical regime --------------------------------------------------------

def _second_critical_primitive(t):
    """F(t) = t phi_eff(t) + V_eff(t); dF/dt = t phi_eff'(t)."""
    return t * kernels.phi_eff(t) + kernels.v_eff(t)


def _phi_eff_upper_spacing(target):
    """A spacing t with phi_eff(t) < target (phi_eff is decreasing)."""
    t = 1.0
    while kernels.phi_eff(t) >= target:
        t *= 2.0
    return t


def solve_second_critical(settings=None, beta=1.0):
    """Unit-mass solution of -(rho'/rho^3) phi_eff'(beta/rho) = 1/beta^3.

    With t = beta/rho the equation separates: dx = -beta t phi_eff'(t) dt.
    Integrating from t0 = beta/rho(0) gives x(t) = beta (F(t0) - F(t)) with
    F = t phi_eff + V_eff, and the mass equals beta^2 phi_eff(t0); t0 is
    found by root-finding so that the mass is one.  The support length is
    L = beta F(t0); near it the density decays like 2 pi beta / log(1/(L-x)).

    Grid nodes are uniform in x on [0, L) up to the density floor, and the
    tip (L, 0) closes the field.  ``meta["ode_residual"]`` is the largest
    deviation of (rho'/rho^3) phi_eff'(beta/rho) beta^3 from one, with rho'
    taken by central differences of the exact inverse relation.

    Raises
    ------
    SolverFailure
        If the mass condition cannot be bracketed.
    """
    settings = settings or IntegralSolveSettings()
    if not beta > 0:
        raise ValueError("beta must be positive")
    target = 1.0 / beta**2
    try:
        t_hi = _phi_eff_upper_spacing(target)
        t_lo = t_hi
        while kernels.phi_eff(t_lo) <= target:
            t_lo /= 2.0
            if t_lo < 1e-12:
                raise ValueError("lower bracket not found")
        t0 = scipy.optimize.brentq(lambda t: kernels.phi_eff(t) - target, t_lo, t_hi,
                                   xtol=1e-15, rtol=1e-15)
    except ValueError as exc:
        raise SolverFailure(f"mass condition could not be bracketed: {exc}",
                            stage="solve-continuum") from exc
    F0 = _second_critical_primitive(t0)
    L = beta * F0
    t_floor = beta / settings.density_floor

    def spacing_at(x):
        """t solving beta (F0 - F(t)) = x."""
        goal = F0 - x / beta
        if goal <= _second_critical_primitive(t_floor):
            return t_floor
        hi = t0 * 2.0
        while _second_critical_primitive(hi) > goal:
            hi *= 2.0
        return scipy.optimize.brentq(lambda t: _second_critical_primitive(t) - goal,
                                     t0, hi, xtol=1e-15 * hi, rtol=1e-15)

    N = settings.grid_size
    x = np.linspace(0.0, L, N + 1)[:-1]
    t = np.array([t0] + [spacing_at(v) for v in x[1:]])
    keep = t < t_floor
    x, t = x[keep], t[keep]
    grid = np.append(x, L)
    values = np.append(beta / t, 0.0)

    probe = x[1:-1][:: max(1, (x.size - 2) // 40)]
    probe = probe[(probe > 0.05 * L) & (probe < 0.9 * L)]
    ode = []
    for xp in probe:
        step = 1e-4 * L
        d_rho = (beta / spacing_at(xp + step) - beta / spacing_at(xp - step)) / (2.0 * step)
        tp = spacing_at(xp)
        rho = beta / tp
        ode.append(abs(d_rho / rho**3 * kernels.phi_eff_prime(tp) * beta**3 - 1.0))
    field = DensityField(grid, values, DIMENSIONLESS, 1.0)
    mass = field.mass
    return field.scaled(1.0 / mass).with_meta(
        model="second-critical", beta=float(beta), spacing_at_origin=float(t0),
        support=float(L), density_at_origin=float(beta / t0), trapezoid_mass=mass,
        ode_residual=float(max(ode)) if ode else math.nan)


def continuum_density(params, regime, settings=None, frame=DIMENSIONLESS):
    """Continuum equilibrium matching ``regime`` for these parameters."""
    regime = Regime.parse(regime)
    settings = settings or IntegralSolveSettings()
    if regime is Regime.SUBCRITICAL:
        return head_louat_density(params, settings.grid_size, frame=frame)
    if regime is Regime.INTERMEDIATE:
        return linear_density(params, settings.grid_size, frame=frame)
    if regime is Regime.SUPERCRITICAL:
        return constant_density(params, settings.grid_size, frame=frame)
    b = math.sqrt(params.K / (params.n * params.sigma * params.h))
    if regime is Regime.FIRST_CRITICAL:
        field = solve_first_critical(params.n * b, settings)
    else:
        field = solve_second_critical(settings, beta=b)
    return _frame(field, params, regime, frame)


# -- internal stresses -------------------------------------------------------------

def _pv_cauchy(x, grid, values):
    """PV int rho(y) / (x - y) dy for piecewise-linear rho, held constant on (0, grid[0])."""
    y = np.concatenate(([0.0], grid)) if grid[0] > 0 else grid
    r = np.concatenate(([values[0]], values)) if grid[0] > 0 else values
    ya, yb = y[:-1], y[1:]
    slope = np.diff(r) / np.diff(y)
    X = np.asarray(x, dtype=float)[:, None]
    line_at_x = r[:-1][None, :] + slope[None, :] * (X - ya[None, :])
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(X - ya[None, :]))
        lb = np.log(np.abs(X - yb[None, :]))
    # logarithms of zero distance cancel pairwise between neighbouring segments
    la[~np.isfinite(la)] = 0.0
    lb[~np.isfinite(lb)] = 0.0
    return np.sum(line_at_x * (la - lb) - slope[None, :] * (yb - ya)[None, :], axis=1)


def _smooth_convolution(x, grid, values, kernel):
    """int rho(y) kernel(x - y) dy for piecewise-linear rho and a smooth kernel."""
    y = np.concatenate(([0.0], grid)) if grid[0] > 0 else grid
    r = np.concatenate(([values[0]], values)) if grid[0] > 0 else values
    half = 0.5 * np.diff(y)
    nodes = 0.5 * (y[:-1] + y[1:])[:, None] + half[:, None] * _GAUSS_X[None, :]
    t = (nodes - y[:-1, None]) / (2.0 * half[:, None])
    rho_nodes = r[:-1, None] * (1.0 - t) + r[1:, None] * t
    w = half[:, None] * _GAUSS_W[None, :] * rho_nodes
    X = np.asarray(x, dtype=float)
    return np.einsum("ijk,jk->i", kernel(X[:, None, None] - nodes[None, :, :]), w)


def _derivative(rho):
    return np.gradient(rho.values, rho.grid, edge_order=2)


def internal_stress(regime_index, rho, params):
    """Internal stress of a dimensional density under the closure of a regime.

    1: (K/pi^2) PV int rho(y)/(x-y) dy
    2: (K/h) PV int rho(y) phi((x-y)/h) dy
    3: -(K h / 3 pi) rho'
    4: (K/h^2) rho'/rho^3 phi_eff'(1/(h rho))

    The two non-local forms are the log and V convolutions with rho' after
    integration by parts, with rho extended by zero to the left of 0.  They
    use piecewise-linear rho (constant on (0, grid[0])) with exact
    principal values.  The local forms use second-order differences.

    Raises
    ------
    UnsupportedRegimeError
        For regime 5, or any index outside 1..4.
    DensityDomainError
        For regime 4 when some sample of rho is not positive.
    ContractError
        If ``rho`` is not dimensional.
    """
    index = int(regime_index)
    if index == 5:
        raise UnsupportedRegimeError("the supercritical limit has no internal-stress closure")
    if index not in (1, 2, 3, 4):
        raise UnsupportedRegimeError(f"no closure for regime {regime_index!r}")
    if rho.frame != DIMENSIONAL:
        raise ContractError("internal_stress needs a dimensional density")
    K, h = params.K, params.h
    x = rho.grid
    if index == 1:
        return K / PI2 * _pv_cauchy(x, rho.grid, rho.values)
    if index == 2:
        singular = _pv_cauchy(x, rho.grid, rho.values) / PI2
        smooth = _smooth_convolution(x, rho.grid, rho.values,
                                     lambda u: kernels.phi_regular(u / h)) / h
        return K * (singular + smooth)
    if index == 3:
        return -(K * h / (3.0 * PI)) * _derivative(rho)
    if np.any(rho.values <= 0):
        raise DensityDomainError("the regime-4 closure needs a strictly positive density")
    v = rho.values
    return (K / h**2) * _derivative(rho) / v**3 * kernels.phi_eff_prime(1.0 / (h * v))


def gcz_stress(rho):
    """Logarithmic-derivative stress -rho'/rho (defined up to a constant factor)."""
    if np.any(rho.values <= 0):
        raise DensityDomainError("gcz_stress needs a strictly positive density")
    return -_derivative(rho) / rho.values


def nearest_neighbour_stress(rho, params, kernel="phi"):
    """Closure keeping only the nearest neighbour: (K/h^2) rho'/rho^3 f'(1/(h rho)).

    ``kernel="psi"`` gives (K/pi^2) times :func:`gcz_stress`.
    """
    if np.any(rho.values <= 0):
        raise DensityDomainError("nearest_neighbour_stress needs a strictly positive density")
    derivative = {"phi": kernels.phi_prime, "psi": kernels.psi_prime}.get(kernel)
    if derivative is None:
        raise ValueError(f"kernel must be 'phi' or 'psi', got {kernel!r}")
    v = rho.values
    return (params.K / params.h**2) * _derivative(rho) / v**3 * derivative(1.0 / (params.h * v))
