import math
import warnings

import mpmath
import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from pileup import kernels
from pileup.errors import KernelDomainError, SingularArgumentError
from pileup.kernels import (KernelEvalPolicy, V, phi, phi_eff, phi_eff_prime, phi_prime, psi,
                            v_eff, v_hat)

from oracles import V_mp, phi_mp

# 40-digit mpmath evaluations of the closed forms and neighbour sums
PHI_1 = 0.0074977480096674078433
V_1 = 0.0013804636305990508579
V_07 = 0.0068030271516797648295
PHI_EFF = {1.0: 0.0075537811039954080482, 0.5: 0.11097924336269828789,
           0.1: 4.7985588515181556684}
V_EFF = {0.5: 0.020323370261942308475, 0.1: 0.36320556162213601791}
PHI_EFF_PRIME_05 = -0.64442411996952736724

separations = st.floats(min_value=1e-6, max_value=60.0, allow_nan=False)


def test_phi_reference_value():
    assert phi(1.0) == pytest.approx(PHI_1, rel=1e-14)


def test_V_reference_values():
    assert V(1.0) == pytest.approx(V_1, rel=1e-14)
    assert V(0.7) == pytest.approx(V_07, rel=1e-14)


@pytest.mark.parametrize("s", [1e-7, 3e-5, 9.9e-5, 1e-4, 0.01, 0.3, 1.0, 3.0, 7.5, 14.9,
                               15.0, 15.1, 40.0, 100.0])
def test_phi_and_V_match_high_precision(s):
    assert phi(s) == pytest.approx(float(phi_mp(s)), rel=1e-13)
    assert V(s) == pytest.approx(float(V_mp(s)), rel=1e-13)


def test_phi_laurent_limit():
    assert phi(1e-6) * math.pi**2 * 1e-6 == pytest.approx(1.0, rel=1e-5)


@given(separations)
def test_parity(s):
    assert phi(-s) == -phi(s)
    assert V(-s) == V(s)
    assert phi_prime(-s) == phi_prime(s)


def test_zero_separation_rejected():
    for fn in (phi, V, phi_prime, psi):
        with pytest.raises(SingularArgumentError):
            fn(0.0)
    with pytest.raises(SingularArgumentError):
        phi(np.array([1.0, 0.0]))


def test_array_and_scalar_shapes():
    s = np.linspace(0.1, 3, 12).reshape(3, 4)
    assert phi(s).shape == (3, 4)
    assert isinstance(phi(0.5), float)
    assert np.allclose(V(s).ravel(), [V(v) for v in s.ravel()], rtol=0, atol=0)


def test_no_overflow_at_huge_arguments():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert phi(1e3) == 0.0
        assert V(1e3) == 0.0
        assert phi_prime(800.0) == 0.0


def test_V_derivative_is_minus_phi():
    s = np.geomspace(1e-4, 20, 200)
    errors = []
    for step_rel in (1e-4, 1e-5, 1e-6, 1e-7):
        h = step_rel * s
        dV = (V(s + h) - V(s - h)) / (2 * h)
        errors.append(np.abs(dV + phi(s)) / np.abs(phi(s)))
    assert np.all(np.min(errors, axis=0) < 1e-8)


def test_V_derivative_at_07_step_sweep():
    errs = [abs((V(0.7 + d) - V(0.7 - d)) / (2 * d) + phi(0.7)) / phi(0.7)
            for d in (1e-3, 1e-4, 1e-5)]
    assert min(errs) < 1e-8


def test_phi_prime_matches_finite_difference():
    s = np.geomspace(1e-3, 12, 80)
    h = 1e-6 * s
    fd = (phi(s + h) - phi(s - h)) / (2 * h)
    assert np.allclose(fd, phi_prime(s), rtol=1e-7)
    assert np.all(phi_prime(s) < 0)


def test_V_integral():
    total = sum(scipy.integrate.quad(V, a, b, limit=200)[0]
                for a, b in [(0, 1e-4), (1e-4, 1), (1, 15), (15, 60)])
    assert abs(total - 1 / (6 * math.pi)) < 1e-8


def test_V_integral_truncated_below():
    # the omitted piece over (0, 1e-8) is about 1.9e-8 and is added back analytically
    total, _ = scipy.integrate.quad(V, 1e-8, 50, points=[1e-4, 1e-2, 1, 5, 15], limit=400)
    head = 1e-8 * (2 - math.log(2 * math.pi * 1e-8)) / math.pi**2
    assert abs(total + head - kernels.V_HALF_INTEGRAL) < 1e-8


@pytest.mark.parametrize("policy", [kernels.DEFAULT_POLICY,
                                    KernelEvalPolicy(small_arg_threshold=1e-3,
                                                     large_arg_threshold=10.0)])
def test_branch_continuity(policy):
    for threshold in (policy.small_arg_threshold, policy.large_arg_threshold):
        left = np.nextafter(threshold, 0)
        right = np.nextafter(threshold, np.inf)
        for fn in (phi, V, phi_prime):
            a, b = fn(left, policy), fn(right, policy)
            assert abs(a - b) <= 1e-12 * abs(a)


def test_policy_validation():
    with pytest.raises(ValueError):
        KernelEvalPolicy(small_arg_threshold=5.0, large_arg_threshold=1.0)
    with pytest.raises(ValueError):
        KernelEvalPolicy(tail_tolerance=0.0)


def test_psi():
    assert psi(1.0) == pytest.approx(1 / math.pi**2)
    assert psi(-2.5) == -psi(2.5)
    assert abs(phi(1e-3) - psi(1e-3)) / psi(1e-3) < 1e-3


def test_phi_regular_is_smooth_difference():
    s = np.array([1e-8, 1e-3, 0.049, 0.051, 0.5, 4.0])
    direct = np.array([float(phi_mp(v) - 1 / (mpmath.pi**2 * v)) for v in s])
    assert np.allclose(kernels.phi_regular(s), direct, rtol=1e-11, atol=1e-17)
    assert kernels.phi_regular(-0.3) == -kernels.phi_regular(0.3)


def test_v_regular_finite_at_zero():
    assert kernels.v_regular(0.0) == pytest.approx(kernels.V_REGULAR_AT_ZERO)
    assert kernels.v_regular(0.5) == pytest.approx(V(0.5) + math.log(0.5) / math.pi**2,
                                                   rel=1e-14)


class TestVHat:
    def test_shift_is_constant(self):
        s = np.array([0.01, 0.3, 2.0, 9.0])
        diff = v_hat(s, 10, 0.05) - V(s)
        assert np.ptp(diff) < 1e-15

    def test_unit_log_argument(self):
        # 2 pi n alpha_n = 1 with alpha_n = n beta^2
        n = 4
        beta = math.sqrt(1 / (2 * math.pi * n * n))
        assert v_hat(0.7, n, beta) == pytest.approx(V(0.7) - 1 / math.pi**2, rel=1e-14)

    def test_log_limit(self):
        n2b2 = 1e-8
        n = 1000
        beta = math.sqrt(n2b2) / n
        for s in (0.2, 1.0, 3.0):
            expected = -math.log(s) / math.pi**2
            assert abs(v_hat(n2b2 * s, n, beta) - expected) < 1e-3 * abs(expected) + 1e-3

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            v_hat(1.0, 0, 1.0)
        with pytest.raises(ValueError):
            v_hat(1.0, 3, -1.0)


class TestEffectiveSums:
    @pytest.mark.parametrize("t", sorted(PHI_EFF))
    def test_phi_eff_reference(self, t):
        assert phi_eff(t) == pytest.approx(PHI_EFF[t], rel=1e-13)

    @pytest.mark.parametrize("t", sorted(V_EFF))
    def test_v_eff_reference(self, t):
        assert v_eff(t) == pytest.approx(V_EFF[t], rel=1e-13)

    def test_phi_eff_prime_reference(self):
        assert phi_eff_prime(0.5) == pytest.approx(PHI_EFF_PRIME_05, rel=1e-12)

    def test_domain(self):
        for fn in (v_eff, phi_eff, phi_eff_prime):
            with pytest.raises(KernelDomainError):
                fn(0.0)
            with pytest.raises(KernelDomainError):
                fn(-1.0)

    def test_v_eff_bounds(self):
        t = np.geomspace(1e-2, 10, 15)
        assert np.all(v_eff(t) >= V(t))
        assert v_eff(10.0) - V(10.0) < 1e-20
        assert 1e-3 * v_eff(1e-3) == pytest.approx(1 / (6 * math.pi), rel=0.01)

    def test_phi_eff_limits(self):
        assert 2e-6 * phi_eff(1e-3) == pytest.approx(1 / (3 * math.pi), rel=0.01)
        assert phi_eff(10.0) / phi(10.0) == pytest.approx(1.0, abs=1e-6)

    def test_phi_eff_prime_small_t(self):
        t = 1e-3
        assert 0.99 <= phi_eff_prime(t) * (-3 * math.pi * t**3) <= 1.01

    @pytest.mark.parametrize("t", [5.0, 10.0, 20.0, 60.0])
    def test_phi_eff_prime_large_t(self, t):
        # -8 pi t exp(-2 pi t) is the leading term; the next one is the factor 1 - 1/(2 pi t)
        leading = -8 * math.pi * t * math.exp(-2 * math.pi * t)
        ratio = phi_eff_prime(t) / leading
        assert ratio == pytest.approx(1 - 1 / (2 * math.pi * t), rel=1e-9)
        assert abs(ratio - 1) < 1 / (2 * math.pi * t) * 1.001

    def test_phi_eff_prime_finite_difference(self):
        t, d = 0.8, 1e-5
        fd = (phi_eff(t + d) - phi_eff(t - d)) / (2 * d)
        assert fd == pytest.approx(phi_eff_prime(t), rel=1e-6)

    def test_sandwich(self):
        def moment(a, b=np.inf):
            val, _ = scipy.integrate.quad(lambda s: s * phi(s), a, b, limit=200)
            return val

        full = moment(1e-12, 1.0) + moment(1.0)
        assert full == pytest.approx(1 / (6 * math.pi), rel=1e-9)
        for t in np.geomspace(1e-3, 20, 25):
            value = phi_eff(t)
            assert moment(t) / t**2 <= value * (1 + 1e-12)
            assert value <= full / t**2 * (1 + 1e-12)

    def test_phi_eff_prime_negative(self):
        assert np.all(phi_eff_prime(np.geomspace(1e-3, 30, 40)) < 0)

    def test_small_t_expansion(self):
        t = 0.2
        assert kernels.phi_eff_small_t(t) == pytest.approx(phi_eff(t), rel=1e-11)
        assert kernels.v_eff_small_t(t) == pytest.approx(v_eff(t), rel=1e-11)

    def test_fallback_warns(self):
        policy = KernelEvalPolicy(max_terms=100)
        with pytest.warns(kernels.AsymptoticFallbackWarning):
            value = phi_eff(1e-3, policy)
        assert value == pytest.approx(kernels.phi_eff_small_t(1e-3))

    def test_deterministic(self):
        assert phi_eff(0.037) == phi_eff(0.037)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(min_value=0.05, max_value=5.0))
    def test_phi_eff_is_minus_v_eff_derivative(self, t):
        d = 1e-6 * t
        fd = -(v_eff(t + d) - v_eff(t - d)) / (2 * d)
        assert fd == pytest.approx(phi_eff(t), rel=1e-6)
