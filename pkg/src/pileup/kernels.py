"""Wall-wall interaction kernels and their effective neighbour sums.

All functions accept scalars or arrays and return the same shape; a float
comes back for scalar input.  Separations are dimensionless (distance / h).

Three evaluation branches are used, selected by :class:`KernelEvalPolicy`:

* ``|s| < small_arg_threshold``: Laurent/Taylor series around 0;
* the middle range: closed forms written in terms of ``q = exp(-2 pi |s|)``,
  which never overflow and avoid the cancellation between
  ``s coth(pi s) / pi`` and ``log(2 sinh(pi s)) / pi**2``;
* ``|s| > large_arg_threshold``: the exponential tail with its first
  correction in ``q``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import KernelDomainError, SingularArgumentError

PI = math.pi
PI2 = PI * PI

#: Integral of V over (0, inf).
V_HALF_INTEGRAL = 1.0 / (6.0 * PI)
#: Value of the regular part V(s) + log|s| / pi**2 at s = 0.
V_REGULAR_AT_ZERO = (1.0 - math.log(2.0 * PI)) / PI2


class AsymptoticFallbackWarning(RuntimeWarning):
    """An effective sum needed more terms than allowed; the small-t expansion was used."""


@dataclass(frozen=True)
class KernelEvalPolicy:
    small_arg_threshold: float = 1e-4
    large_arg_threshold: float = 15.0
    tail_tolerance: float = 1e-14
    max_terms: int = 10**7

    def __post_init__(self):
        if not 0 < self.small_arg_threshold < self.large_arg_threshold:
            raise ValueError("need 0 < small_arg_threshold < large_arg_threshold")
        if not self.tail_tolerance > 0:
            raise ValueError("tail_tolerance must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_POLICY = KernelEvalPolicy()


def _prepare(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr == 0):
        raise SingularArgumentError("kernel evaluated at zero separation")
    return arr, np.abs(arr)


def _finish(arr, out):
    return float(out) if arr.ndim == 0 else out


def _branches(a, policy):
    small = a < policy.small_arg_threshold
    large = a > policy.large_arg_threshold
    return small, ~(small | large), large


def phi(s, policy=None):
    """Wall-wall stress s / sinh(pi s)**2 (odd in s)."""
    policy = policy or DEFAULT_POLICY
    arr, a = _prepare(s)
    small, mid, large = _branches(a, policy)
    out = np.empty_like(a)

    x = a[small]
    x2 = x * x
    out[small] = 1.0 / (PI2 * x) + x * (-1.0 / 3.0 + x2 * (PI2 / 15.0 + x2 * (
        -2.0 * PI2**2 / 189.0 + x2 * PI2**3 / 675.0)))

    x = a[mid]
    out[mid] = x / np.sinh(PI * x) ** 2

    x = a[large]
    q = np.exp(-2.0 * PI * x)
    out[large] = 4.0 * x * q * (1.0 + 2.0 * q)

    return _finish(arr, np.sign(arr) * out)


def phi_prime(s, policy=None):
    """Derivative of :func:`phi` (even in s, negative everywhere)."""
    policy = policy or DEFAULT_POLICY
    arr, a = _prepare(s)
    small, mid, large = _branches(a, policy)
    out = np.empty_like(a)

    x = a[small]
    x2 = x * x
    out[small] = -1.0 / (PI2 * x2) - 1.0 / 3.0 + x2 * (PI2 / 5.0 + x2 * (
        -10.0 * PI2**2 / 189.0 + x2 * 7.0 * PI2**3 / 675.0))

    x = a[mid]
    q = np.exp(-2.0 * PI * x)
    om = -np.expm1(-2.0 * PI * x)
    out[mid] = 4.0 * q / om**2 - 8.0 * PI * x * q * (1.0 + q) / om**3

    x = a[large]
    q = np.exp(-2.0 * PI * x)
    out[large] = 4.0 * q * (1.0 + 2.0 * q) - 8.0 * PI * x * q * (1.0 + 4.0 * q)

    return _finish(arr, out)


def V(s, policy=None):
    """Interaction energy, the primitive of -phi vanishing at infinity (even in s).

    V(s) = s coth(pi s) / pi - log(2 sinh(pi s)) / pi**2 for s > 0.
    """
    policy = policy or DEFAULT_POLICY
    arr, a = _prepare(s)
    small, mid, large = _branches(a, policy)
    out = np.empty_like(a)

    x = a[small]
    x2 = x * x
    out[small] = (1.0 - np.log(2.0 * PI * x)) / PI2 + x2 * (1.0 / 6.0 + x2 * (
        -PI2 / 60.0 + x2 * PI2**2 / 567.0))

    x = a[mid]
    q = np.exp(-2.0 * PI * x)
    om = -np.expm1(-2.0 * PI * x)
    # log(1 - q): through expm1 when q ~ 1, through log1p when q is small
    log_om = np.where(q > 0.5, np.log(om), np.log1p(-q))
    out[mid] = (2.0 * x / PI) * q / om - log_om / PI2

    x = a[large]
    q = np.exp(-2.0 * PI * x)
    out[large] = (2.0 * x / PI) * q * (1.0 + q) + q * (1.0 + 0.5 * q) / PI2

    return _finish(arr, out)


def v_regular(s, policy=None):
    """Smooth part V(s) + log|s| / pi**2; finite at s = 0."""
    policy = policy or DEFAULT_POLICY
    arr = np.asarray(s, dtype=float)
    a = np.abs(arr)
    out = np.empty_like(a)
    small = a < policy.small_arg_threshold
    x2 = a[small] ** 2
    out[small] = V_REGULAR_AT_ZERO + x2 * (1.0 / 6.0 + x2 * (-PI2 / 60.0 + x2 * PI2**2 / 567.0))
    rest = ~small
    out[rest] = V(a[rest], policy) + np.log(a[rest]) / PI2
    return _finish(arr, out)


def psi(s):
    """Single-slip-plane stress 1 / (pi**2 s)."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr == 0):
        raise SingularArgumentError("kernel evaluated at zero separation")
    return _finish(arr, 1.0 / (PI2 * arr))


def psi_prime(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr == 0):
        raise SingularArgumentError("kernel evaluated at zero separation")
    return _finish(arr, -1.0 / (PI2 * arr * arr))


def phi_regular(s, policy=None):
    """Smooth odd part phi(s) - psi(s); finite at s = 0."""
    arr = np.asarray(s, dtype=float)
    a = np.abs(arr)
    out = np.empty_like(a)
    small = a < 0.05
    x = a[small]
    x2 = x * x
    out[small] = x * (-1.0 / 3.0 + x2 * (PI2 / 15.0 + x2 * (-2.0 * PI2**2 / 189.0 + x2 * (
        PI2**3 / 675.0 - x2 * 2.0 * PI2**4 / 10395.0))))
    rest = ~small
    out[rest] = phi(a[rest], policy) - 1.0 / (PI2 * a[rest])
    return _finish(arr, np.sign(arr) * out)


def log_potential(s):
    """Primitive of -psi: -log|s| / pi**2."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr == 0):
        raise SingularArgumentError("kernel evaluated at zero separation")
    return _finish(arr, -np.log(np.abs(arr)) / PI2)


def v_hat_shift(n, beta):
    """Constant added to V in the renormalised subcritical energy density."""
    if n < 1 or not beta > 0:
        raise ValueError("need n >= 1 and beta > 0")
    n_alpha = n * (n * beta**2)
    return (-1.0 + math.log(2.0 * PI * n_alpha)) / PI2


def v_hat(s, n, beta, policy=None):
    """Renormalised energy density V(s) + (-1 + log(2 pi n alpha_n)) / pi**2, alpha_n = n beta**2."""
    return V(s, policy) + v_hat_shift(n, beta)


# -- effective sums over k-th neighbours -------------------------------------

def _term_values(kind, k, t, policy):
    s = k * t
    if kind == "v":
        return V(s, policy)
    if kind == "phi":
        return k * phi(s, policy)
    return k * k * phi_prime(s, policy)


# (power of k, power of 1/(1 - r**m)) in the geometric tail bound of each sum
_TAIL_SHAPE = {"v": (1, 1), "phi": (2, 2), "dphi": (3, 3)}


def _tail_bound(kind, m, t):
    """Upper bound on |sum_{k >= m} term_k| from the exponential decay of phi and V."""
    p, w = _TAIL_SHAPE[kind]
    r = math.exp(-2.0 * PI * t)
    ratio = (1.0 + 1.0 / m) ** p * r
    if ratio >= 1.0:
        return math.inf
    coef = {"v": 2.0 * t / PI + 1.0 / PI2, "phi": 4.0 * t, "dphi": 4.0 + 16.0 * PI * t}[kind]
    log_b = math.log(coef) + p * math.log(m) - 2.0 * PI * t * m - math.log1p(-ratio)
    log_b -= w * math.log(-math.expm1(-2.0 * PI * t * m))
    return math.exp(log_b)


def _small_t_expansion(kind, t):
    # Euler-Maclaurin / Mellin expansion; the remainder is O(exp(-2 pi / t)).
    if kind == "v":
        return 1.0 / (6.0 * PI * t) + (math.log(t) - 1.0) / (2.0 * PI2)
    if kind == "phi":
        return 1.0 / (6.0 * PI * t * t) - 1.0 / (2.0 * PI2 * t)
    return -1.0 / (3.0 * PI * t**3) + 1.0 / (2.0 * PI2 * t * t)


def _effective_scalar(kind, t, policy):
    m = max(8, int(math.ceil(4.0 / t)))
    while True:
        if m - 1 > policy.max_terms:
            warnings.warn(
                f"effective sum at t={t:g} needs more than {policy.max_terms} terms; "
                "using the small-t expansion", AsymptoticFallbackWarning, stacklevel=4)
            return _small_t_expansion(kind, t)
        k = np.arange(1, m, dtype=float)
        total = float(np.sum(_term_values(kind, k, t, policy)[::-1]))
        if _tail_bound(kind, m, t) <= policy.tail_tolerance * abs(total):
            return total
        m = int(math.ceil(1.6 * m))


def _effective(kind, t, policy):
    policy = policy or DEFAULT_POLICY
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise KernelDomainError("effective sums need t > 0")
    flat = np.array([_effective_scalar(kind, float(v), policy) for v in arr.ravel()])
    return _finish(arr, flat.reshape(arr.shape))


def v_eff(t, policy=None):
    """Sum over k >= 1 of V(k t)."""
    return _effective("v", t, policy)


def phi_eff(t, policy=None):
    """Sum over k >= 1 of k phi(k t) (equal to -V_eff'(t))."""
    return _effective("phi", t, policy)


def phi_eff_prime(t, policy=None):
    """Sum over k >= 1 of k**2 phi'(k t)."""
    return _effective("dphi", t, policy)


def phi_eff_small_t(t):
    """Small-spacing expansion 1/(6 pi t^2) - 1/(2 pi^2 t) of :func:`phi_eff`."""
    return _small_t_expansion("phi", t)


def v_eff_small_t(t):
    return _small_t_expansion("v", t)
