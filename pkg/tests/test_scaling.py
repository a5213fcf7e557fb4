import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pileup.errors import InadmissibleParametersError, NoClosedFormError
from pileup.params import MaterialParams
from pileup.scaling import (ClassifierThresholds, Regime, beta, classify, pileup_length,
                            scaling_for)

N = 150
positive = st.floats(min_value=1e-3, max_value=1e3)


def test_beta_mid_stress_figure():
    p = MaterialParams(K=1, h=10, sigma=0.0005, n=150)
    assert beta(p) == pytest.approx(math.sqrt(1 / 0.75), rel=1e-15)


def test_beta_unity():
    assert beta(MaterialParams(K=30.0, h=2.0, sigma=1.5, n=10)) == pytest.approx(1.0)


def test_from_beta_round_trip():
    target = 4 / (N * math.sqrt(N))
    assert beta(MaterialParams.from_beta(target, N)) == pytest.approx(target, rel=1e-14)


@pytest.mark.parametrize("b, expected", [
    (4 / (N * math.sqrt(N)), Regime.SUBCRITICAL),
    (6 / (N * math.sqrt(N)), Regime.SUBCRITICAL),
    (5 / N, Regime.FIRST_CRITICAL),
    (1 / math.sqrt(N), Regime.INTERMEDIATE),
    (1.0, Regime.SECOND_CRITICAL),
    (1e8, Regime.SUPERCRITICAL),
])
def test_figure_parameters(b, expected):
    assert classify(MaterialParams.from_beta(b, N)).regime is expected


def test_length_scales_per_regime():
    p = MaterialParams.from_beta(6 / (N * math.sqrt(N)), N, K=2.0, h=3.0)
    cls = classify(p)
    assert cls.length_scale == pytest.approx(p.K * p.n / p.sigma)
    assert cls.alpha == pytest.approx(p.K / (p.sigma * p.h))
    p = MaterialParams.from_beta(1 / math.sqrt(N), N, K=2.0, h=3.0)
    cls = classify(p)
    assert cls.length_scale == pytest.approx(math.sqrt(p.K * p.n * p.h / p.sigma))
    assert cls.alpha == pytest.approx(cls.beta)


def test_first_critical_constant():
    cls = classify(MaterialParams.from_beta(5 / N, N))
    assert cls.c == pytest.approx(5.0)


def test_supercritical_inadmissible():
    p = MaterialParams(K=1.0, h=1.0, sigma=1.0, n=4)  # 2K/(nh sigma) = 0.5
    with pytest.raises(InadmissibleParametersError):
        scaling_for(p, Regime.SUPERCRITICAL)
    with pytest.raises(InadmissibleParametersError):
        classify(p, regime=5)


def test_pileup_lengths():
    p = MaterialParams(K=2.0, h=3.0, sigma=0.1, n=40)
    assert pileup_length(p, "Subcritical") == pytest.approx(2 * 40 * 2.0 / (math.pi**2 * 0.1))
    assert pileup_length(p, 3) == pytest.approx(math.sqrt(2 * 40 * 2.0 * 3.0 / (3 * math.pi * 0.1)))
    # 2K/(n h sigma) = e gives ell = n h / (2 pi)
    q = MaterialParams(K=1.0, h=1.0, sigma=2.0 / (10 * math.e), n=10)
    assert pileup_length(q, Regime.SUPERCRITICAL) == pytest.approx(10 / (2 * math.pi))
    for regime in (Regime.FIRST_CRITICAL, Regime.SECOND_CRITICAL):
        with pytest.raises(NoClosedFormError):
            pileup_length(p, regime)


def test_override_and_labels():
    p = MaterialParams.from_beta(1.0, N)
    cls = classify(p, regime="intermediate")
    assert cls.regime is Regime.INTERMEDIATE and cls.overridden
    assert Regime.parse("4") is Regime.SECOND_CRITICAL
    assert Regime.parse("FirstCritical") is Regime.FIRST_CRITICAL
    with pytest.raises(ValueError):
        Regime.parse("bogus")
    d = cls.to_dict()
    assert d["regime"] == "Intermediate" and d["low_band"] == [1.0, 8.0]


def test_thresholds_validation():
    with pytest.raises(ValueError):
        ClassifierThresholds(low_band=(2.0, 5.0))
    with pytest.raises(ValueError):
        ClassifierThresholds(high_band=(0.5, 0.9))
    narrow = ClassifierThresholds(low_band=(0.2, 5.0))
    assert classify(MaterialParams.from_beta(4 / (N * math.sqrt(N)), N), narrow).regime \
        is Regime.FIRST_CRITICAL


@given(positive, positive, positive, st.integers(1, 5000))
def test_alpha_is_length_over_nh(K, h, sigma, n):
    p = MaterialParams(K=K, h=h, sigma=sigma, n=n)
    for regime in Regime:
        try:
            alpha, ell = scaling_for(p, regime)
        except InadmissibleParametersError:
            continue
        assert alpha == pytest.approx(ell / (n * h), rel=1e-12)


@given(positive, positive, positive, st.integers(1, 5000))
def test_subcritical_length_below_critical_iff_n_beta_small(K, h, sigma, n):
    p = MaterialParams(K=K, h=h, sigma=sigma, n=n)
    _, l1 = scaling_for(p, Regime.SUBCRITICAL)
    _, l2 = scaling_for(p, Regime.INTERMEDIATE)
    nb = n * beta(p)
    if abs(nb - 1) > 1e-9:
        assert (l1 <= l2) == (nb <= 1)


@given(positive, positive, positive, st.integers(1, 500), st.floats(1e-3, 1e3))
def test_joint_rescaling_keeps_classification(K, h, sigma, n, lam):
    p = MaterialParams(K=K, h=h, sigma=sigma, n=n)
    q = MaterialParams(K=lam * K, h=h, sigma=lam * sigma, n=n)
    assert beta(q) == pytest.approx(beta(p), rel=1e-12)
    try:
        assert classify(q).regime is classify(p).regime
    except InadmissibleParametersError:
        with pytest.raises(InadmissibleParametersError):
            classify(p)


@given(st.floats(0.01, 100), st.floats(1.0, 10.0))
def test_length_nonincreasing_in_sigma(sigma, factor):
    base = MaterialParams(K=1.0, h=1.0, sigma=sigma, n=50)
    more = base.replace(sigma=sigma * factor)
    for regime in (Regime.SUBCRITICAL, Regime.INTERMEDIATE):
        assert scaling_for(more, regime)[1] <= scaling_for(base, regime)[1] * (1 + 1e-12)


def test_material_params_validation():
    with pytest.raises(ValueError):
        MaterialParams(K=-1, h=1, sigma=1, n=1)
    with pytest.raises(ValueError):
        MaterialParams(K=1, h=1, sigma=1, n=0)
    p = MaterialParams.from_elastic(G=2.0, b=0.5, nu=0.3, h=1.0, sigma=0.1, n=3)
    assert p.K == pytest.approx(math.pi * 2.0 * 0.5 / (2 * 0.7))
    with pytest.raises(ValueError):
        MaterialParams.from_elastic(G=2.0, b=0.5, nu=0.5, h=1.0, sigma=0.1, n=3)
    with pytest.raises(ValueError):
        MaterialParams(K=1.0, h=1, sigma=1, n=1, G=2.0, b=0.5, nu=0.3)
