"""Discrete versus continuum agreement: normalisation, bulk errors and fits."""

import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.stats

from . import continuum, discrete
from .density import DIMENSIONAL, DIMENSIONLESS, DensityField
from .errors import ConvergenceError, DensityDomainError, PileupError, SolverFailure
from .scaling import Regime, classify


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    discrete: DensityField
    continuum: DensityField
    regime: object
    bulk_error_l2: float
    bulk_error_max: float
    boundary_exclusion_fraction: float
    fitted_parameters: dict = field(default_factory=dict)
    run_metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.boundary_exclusion_fraction < 0.5:
            raise ValueError("boundary_exclusion_fraction must lie in [0, 0.5)")

    def to_dict(self):
        """JSON-ready summary (density curves excluded)."""
        return {
            "regime": self.regime.to_dict(),
            "bulk_error_l2": self.bulk_error_l2,
            "bulk_error_max": self.bulk_error_max,
            "boundary_exclusion_fraction": self.boundary_exclusion_fraction,
            "fitted_parameters": self.fitted_parameters,
            "run_metadata": self.run_metadata,
        }


def normalize(rho, target_mass=1.0):
    """Scale ``rho`` so that its trapezoid mass equals ``target_mass``."""
    mass = rho.mass
    if not mass > 0:
        raise DensityDomainError("cannot normalise a density with zero mass")
    return rho.scaled(target_mass / mass).with_meta(normalized_mass=float(target_mass))


def support(rho):
    """Interval from the first grid node to the last node with positive density."""
    positive = np.nonzero(rho.values > 0)[0]
    if positive.size == 0:
        raise DensityDomainError("density vanishes everywhere")
    last = positive[-1]
    end = rho.grid[min(last + 1, rho.grid.size - 1)]
    return float(rho.grid[0]), float(end)


def bulk_interval(a, b, exclusion):
    lo = max(support(a)[0], support(b)[0])
    hi = min(support(a)[1], support(b)[1])
    if not hi > lo:
        raise DensityDomainError("the two densities have disjoint supports")
    trim = exclusion * (hi - lo)
    return lo + trim, hi - trim


def bulk_error(a, b, exclusion=0.1):
    """Relative L2 and max errors of ``b`` against ``a`` over the bulk.

    The bulk is the common support with ``exclusion`` of its length removed at
    each end.  ``b`` is interpolated onto the grid nodes of ``a`` inside the
    bulk; both norms are taken relative to ``a`` (L2 by the trapezoid rule).

    Returns
    -------
    l2, max : float
    """
    if not 0 <= exclusion < 0.5:
        raise ValueError("exclusion must lie in [0, 0.5)")
    lo, hi = bulk_interval(a, b, exclusion)
    keep = (a.grid >= lo) & (a.grid <= hi)
    if np.count_nonzero(keep) < 2:
        raise DensityDomainError("fewer than two samples in the retained bulk")
    x = a.grid[keep]
    ref = a.values[keep]
    diff = b(x) - ref
    l2 = math.sqrt(np.trapezoid(diff**2, x) / np.trapezoid(ref**2, x))
    return l2, float(np.max(np.abs(diff)) / np.max(np.abs(ref)))


def _bulk_samples(rho, lo, hi):
    keep = (rho.grid >= lo) & (rho.grid <= hi)
    return rho.grid[keep], rho.values[keep]


def fit_slope(x, y):
    """Ordinary least-squares line; returns slope, intercept, stderr, residual norm."""
    res = scipy.stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    return {"slope": float(res.slope), "intercept": float(res.intercept),
            "slope_stderr": float(res.stderr), "r_squared": float(res.rvalue**2),
            "residual_norm": float(np.linalg.norm(resid))}


def fit_inverse_sqrt(x, y, confidence=0.95):
    """Least-squares fit of A sqrt((ell - x)/x) with confidence intervals."""

    def model(xx, amp, ell):
        return amp * np.sqrt(np.clip(ell - xx, 0.0, None) / xx)

    ell0 = 1.05 * x[-1]
    amp0 = float(np.median(y / np.sqrt(np.clip(ell0 - x, 1e-300, None) / x)))
    popt, pcov = scipy.optimize.curve_fit(model, x, y, p0=(amp0, ell0), maxfev=20000)
    resid = y - model(x, *popt)
    r2 = 1.0 - np.sum(resid**2) / np.sum((y - y.mean()) ** 2)
    stderr = np.sqrt(np.diag(pcov))
    q = scipy.stats.t.ppf(0.5 + confidence / 2.0, max(x.size - 2, 1))
    return {"amplitude": float(popt[0]), "length": float(popt[1]),
            "amplitude_ci": [float(popt[0] - q * stderr[0]), float(popt[0] + q * stderr[0])],
            "length_ci": [float(popt[1] - q * stderr[1]), float(popt[1] + q * stderr[1])],
            "r_squared": float(r2), "residual_norm": float(np.linalg.norm(resid))}


def prefactor_verdict(fit, candidates, separation=10.0, max_relative_deviation=0.05):
    """Which candidate amplitude the fit supports.

    Distances are measured in confidence-interval half-widths.  The closest
    candidate is supported when every other one is at least ``separation``
    times farther and it lies within ``max_relative_deviation`` of the fit.
    At finite n the fit carries a small systematic bias, so the supported
    value need not fall inside the purely statistical interval.
    """
    amp = fit["amplitude"]
    lo, hi = fit["amplitude_ci"]
    half = 0.5 * (hi - lo)
    dist = {k: abs(v - amp) / half for k, v in candidates.items()}
    ranked = sorted(dist, key=dist.get)
    best = ranked[0]
    rel = abs(candidates[best] - amp) / abs(amp)
    isolated = all(dist[k] >= separation * max(dist[best], 1.0) for k in ranked[1:])
    return {
        "supported_prefactor": best if isolated and rel <= max_relative_deviation else None,
        "discriminated": bool(isolated and rel <= max_relative_deviation),
        "ci_halfwidths_from_fit": dist,
        "inside_interval": {k: bool(lo <= v <= hi) for k, v in candidates.items()},
        "relative_deviation": {k: abs(v - amp) / abs(amp) for k, v in candidates.items()},
    }


def _regime_fits(regime, params, disc_dimensional, disc_norm, lo, hi, ell_n):
    fits = {}
    if regime is Regime.INTERMEDIATE:
        x, y = _bulk_samples(disc_norm, lo, hi)
        fits["linear"] = fit_slope(x, y)
        fits["linear"]["expected_slope"] = -3.0 * math.pi
    elif regime is Regime.SUBCRITICAL:
        x, y = _bulk_samples(disc_dimensional, lo * ell_n, hi * ell_n)
        fit = fit_inverse_sqrt(x, y)
        candidates = {"sigma/K": params.sigma / params.K,
                      "pi*sigma/K": math.pi * params.sigma / params.K}
        fit["candidate_prefactors"] = candidates
        fit.update(prefactor_verdict(fit, candidates))
        fit["expected_length"] = 2.0 * params.n * params.K / (math.pi**2 * params.sigma)
        fits["inverse_sqrt"] = fit
    elif regime is Regime.SUPERCRITICAL:
        _, y = _bulk_samples(disc_norm, lo, hi)
        fits["plateau"] = {"level": float(np.mean(y)), "min": float(np.min(y)),
                           "max": float(np.max(y)), "expected": 1.0}
    return fits


def discrete_dimensionless_density(config, params, length_scale):
    """Density 1/(n dx) of a dimensional configuration in units of ``length_scale``."""
    dimless = config.dimensionless(length_scale)
    rho = discrete.discrete_density(dimless)
    return rho.scaled(1.0 / params.n)


def run_comparison(params, settings=None, integral_settings=None, exclusion=0.1,
                   thresholds=None, regime=None, frame=DIMENSIONLESS):
    """Solve the discrete pile-up and its continuum limit and compare them.

    Both densities are normalised to unit mass in the requested frame.  The
    continuum field is interpolated onto the wall positions.  Regime-specific
    fits are made on the bulk of the discrete density: a straight line for
    the intermediate regime, A sqrt((ell - x)/x) on the dimensional density
    for the subcritical one, and the plateau level for the supercritical one.

    Raises
    ------
    ConvergenceError, SolverFailure
        With ``stage`` naming the failing step.
    """
    settings = settings or discrete.SolveSettings()
    integral_settings = integral_settings or continuum.IntegralSolveSettings()
    if regime is not None:
        settings = dataclasses.replace(settings, regime=regime)
    cls = classify(params, thresholds, settings.regime)
    timings = {}
    t = time.perf_counter()
    try:
        config = discrete.solve_equilibrium(params, settings)
    except ConvergenceError as exc:
        exc.stage = "solve-discrete"
        raise
    timings["discrete"] = time.perf_counter() - t
    t = time.perf_counter()
    try:
        cont = continuum.continuum_density(params, cls.regime, integral_settings,
                                           frame=DIMENSIONLESS)
    except PileupError as exc:
        raise SolverFailure(f"continuum stage failed: {exc}", stage="solve-continuum") from exc
    timings["continuum"] = time.perf_counter() - t

    ell_n = cls.length_scale
    disc_raw = discrete_dimensionless_density(config, params, ell_n)
    disc_norm = normalize(disc_raw)
    cont_norm = normalize(cont)
    lo, hi = bulk_interval(disc_norm, cont_norm, exclusion)
    fits = _regime_fits(cls.regime, params, discrete.discrete_density(config),
                        disc_norm, lo, hi, ell_n)
    if frame == DIMENSIONAL:
        disc_out = normalize(DensityField(disc_norm.grid * ell_n, disc_norm.values,
                                          DIMENSIONAL, 1.0, dict(disc_norm.meta)))
        cont_out = normalize(DensityField(cont_norm.grid * ell_n, cont_norm.values,
                                          DIMENSIONAL, 1.0, dict(cont_norm.meta)))
    elif frame == DIMENSIONLESS:
        disc_out, cont_out = disc_norm, cont_norm
    else:
        raise ValueError(f"unknown frame {frame!r}")
    l2, mx = bulk_error(disc_out, cont_out, exclusion)
    meta = {
        "n": params.n, "frame": frame, "normalization": "unit trapezoid mass for both fields",
        "bulk_interval": [lo, hi] if frame == DIMENSIONLESS else [lo * ell_n, hi * ell_n],
        "discrete_iterations": config.info["iterations"],
        "discrete_residual_norm": config.info["residual_norm"],
        "discrete_mass_before_normalization": disc_raw.mass,
        "continuum_meta": {k: v for k, v in cont.meta.items()
                           if isinstance(v, (int, float, str))},
        "residual_tolerance": settings.residual_tolerance,
        "grid_size": integral_settings.grid_size,
        "timings_seconds": timings,
    }
    return ComparisonReport(disc_out, cont_out, cls, l2, mx, exclusion, fits, meta)
