"""Regime classification from beta_n = sqrt(K / (n sigma h)).

The five asymptotic regimes are separated by n*beta ~ 1 and beta ~ 1.  At
finite n the "~ 1" is replaced by configurable bands; a value inside a band
is classified as the corresponding critical regime.
"""

import enum
import math
from dataclasses import dataclass, field

from .errors import InadmissibleParametersError, NoClosedFormError
from .params import MaterialParams


class Regime(enum.IntEnum):
    SUBCRITICAL = 1
    FIRST_CRITICAL = 2
    INTERMEDIATE = 3
    SECOND_CRITICAL = 4
    SUPERCRITICAL = 5

    @property
    def label(self):
        return _LABELS[self]

    @classmethod
    def parse(cls, value):
        """Accept a Regime, its index 1..5, or its label ("Subcritical", ...)."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip()
            if key.isdigit():
                return cls(int(key))
            for regime, label in _LABELS.items():
                if key.lower() in (label.lower(), regime.name.lower()):
                    return regime
            raise ValueError(f"unknown regime {value!r}")
        return cls(int(value))


_LABELS = {
    Regime.SUBCRITICAL: "Subcritical",
    Regime.FIRST_CRITICAL: "FirstCritical",
    Regime.INTERMEDIATE: "Intermediate",
    Regime.SECOND_CRITICAL: "SecondCritical",
    Regime.SUPERCRITICAL: "Supercritical",
}


@dataclass(frozen=True)
class ClassifierThresholds:
    """Finite-n bands: ``low_band`` on n*beta, ``high_band`` on beta (both inclusive)."""

    low_band: tuple = (1.0, 8.0)
    high_band: tuple = (0.2, 5.0)

    def __post_init__(self):
        for name in ("low_band", "high_band"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= 1 <= hi:
                raise ValueError(f"{name} must satisfy 0 < lower <= 1 <= upper, got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))


DEFAULT_THRESHOLDS = ClassifierThresholds()


@dataclass(frozen=True)
class RegimeClassification:
    regime: Regime
    beta: float
    alpha: float
    length_scale: float
    boundary_margins: tuple
    thresholds: ClassifierThresholds = field(default=DEFAULT_THRESHOLDS)
    overridden: bool = False

    @property
    def c(self):
        """n * beta, the first-critical constant at this n."""
        return self.boundary_margins[0]

    def to_dict(self):
        return {
            "regime": self.regime.label,
            "regime_index": int(self.regime),
            "beta": self.beta,
            "alpha": self.alpha,
            "length_scale": self.length_scale,
            "n_beta": self.boundary_margins[0],
            "margin_beta": self.boundary_margins[1],
            "low_band": list(self.thresholds.low_band),
            "high_band": list(self.thresholds.high_band),
            "overridden": self.overridden,
        }


def beta(params):
    return math.sqrt(params.K / (params.n * params.sigma * params.h))


def _supercritical_log(params):
    arg = 2.0 * params.K / (params.n * params.h * params.sigma)
    if arg <= 1.0:
        raise InadmissibleParametersError(
            f"supercritical scaling needs 2K/(n h sigma) > 1, got {arg:.6g}")
    return math.log(arg)


def scaling_for(params, regime):
    """Aspect ratio alpha_n and length scale ell_n for the given regime.

    Returns
    -------
    alpha, length_scale : float
    """
    regime = Regime.parse(regime)
    K, h, sigma, n = params.K, params.h, params.sigma, params.n
    if regime is Regime.SUBCRITICAL:
        return K / (sigma * h), K * n / sigma
    if regime is Regime.SUPERCRITICAL:
        alpha = _supercritical_log(params) / (2.0 * math.pi)
        return alpha, n * h * alpha
    b = beta(params)
    return b, math.sqrt(K * n * h / sigma)


def classify(params, thresholds=None, regime=None):
    """Classify a problem instance and attach its scaling.

    Parameters
    ----------
    params : MaterialParams
    thresholds : ClassifierThresholds, optional
    regime : Regime or int or str, optional
        Skip classification and use this regime (the CLI ``--regime`` flag).
    """
    thresholds = thresholds or DEFAULT_THRESHOLDS
    b = beta(params)
    nb = params.n * b
    if regime is not None:
        chosen = Regime.parse(regime)
    else:
        lo, hi = thresholds.low_band
        if nb < lo:
            chosen = Regime.SUBCRITICAL
        elif nb <= hi:
            chosen = Regime.FIRST_CRITICAL
        elif b < thresholds.high_band[0]:
            chosen = Regime.INTERMEDIATE
        elif b <= thresholds.high_band[1]:
            chosen = Regime.SECOND_CRITICAL
        else:
            chosen = Regime.SUPERCRITICAL
    alpha, ell = scaling_for(params, chosen)
    return RegimeClassification(chosen, b, alpha, ell, (nb, b), thresholds,
                                overridden=regime is not None)


def pileup_length(params, regime):
    """Physical pile-up length of the explicit continuum solutions.

    Differs from the scaling length ``ell_n`` by a numerical factor.
    """
    regime = Regime.parse(regime)
    K, h, sigma, n = params.K, params.h, params.sigma, params.n
    if regime is Regime.SUBCRITICAL:
        return 2.0 * n * K / (math.pi**2 * sigma)
    if regime is Regime.INTERMEDIATE:
        return math.sqrt(2.0 * n * K * h / (3.0 * math.pi * sigma))
    if regime is Regime.SUPERCRITICAL:
        return n * h * _supercritical_log(params) / (2.0 * math.pi)
    raise NoClosedFormError(
        f"{regime.label} regime has no closed-form pile-up length; "
        "use the continuum solver instead")


def params_for_beta(beta_value, n, K=1.0, h=1.0):
    """Convenience wrapper around :meth:`MaterialParams.from_beta`."""
    return MaterialParams.from_beta(beta_value, n, K=K, h=h)
