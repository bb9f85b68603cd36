import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from relsens import distributions as d
from relsens.errors import DomainError, InvalidMoments, InvalidProbability

MARGINALS = [
    d.normal(200.0, 60.0),
    d.lognormal(20.0, 4.0),
    d.lognormal(1.0, 0.5),
    d.uniform(5.0, 2.0),
    d.truncated_normal(1.0, 2.0, -1.0, 4.0),
    d.truncated_normal(0.0, 1.0, 0.5, math.inf),
]


def _mp_phi(x):
    mpmath.mp.dps = 40
    return float(mpmath.ncdf(x))


def test_phi_against_high_precision():
    xs = np.linspace(-8.0, 8.0, 641)
    got = d.std_normal_cdf(xs)
    ref = np.array([_mp_phi(x) for x in xs])
    assert np.max(np.abs(got - ref)) < 1e-12


def test_phi_at_minus_two():
    assert d.std_normal_cdf(-2.0) == pytest.approx(0.02275, abs=5e-6)


def test_quantile_matches_high_precision_deep_tail():
    ps = np.array([1e-300, 1e-100, 1e-12, 1e-9, 1e-6, 0.02275, 0.3, 0.5, 0.9, 1 - 1e-9])
    mpmath.mp.dps = 50
    for p in ps:
        ref = float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1)) if p > 1e-20 else float(special.ndtri(p))
        assert d.std_normal_quantile(p) == pytest.approx(ref, rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_quantile_rejects_bad_probability(p):
    with pytest.raises(InvalidProbability):
        d.std_normal_quantile(p)
    with pytest.raises(InvalidProbability):
        d.lognormal(20.0, 4.0).quantile(p)


def test_from_moments_normal():
    m = d.from_moments("normal", 200.0, 60.0)
    assert m.kind is d.Kind.NORMAL
    assert (m.mean, m.std_dev) == (200.0, 60.0)
    assert d.normal().cdf(0.0) == 0.5


def test_lognormal_parameters_and_moments():
    m = d.from_moments(d.Kind.LOGNORMAL, 20.0, 4.0)
    zeta = math.sqrt(math.log(1 + 0.2**2))
    assert m.zeta == pytest.approx(zeta, rel=1e-14)
    assert m.lam == pytest.approx(math.log(20.0) - zeta**2 / 2, rel=1e-14)
    # moments by numerical integration of the density
    mean = integrate.quad(lambda x: x * float(m.pdf(x)), 0, np.inf, limit=200)[0]
    var = integrate.quad(lambda x: (x - mean) ** 2 * float(m.pdf(x)), 0, np.inf, limit=200)[0]
    assert mean == pytest.approx(20.0, rel=1e-8)
    assert math.sqrt(var) == pytest.approx(4.0, rel=1e-8)


def test_lognormal_median():
    m = d.lognormal(20.0, 4.0)
    x_med = math.exp(m.lam)
    assert m.cdf(x_med) == pytest.approx(0.5, abs=1e-14)
    mass = integrate.quad(lambda x: float(m.pdf(x)), 0, x_med)[0]
    assert mass == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("m", MARGINALS, ids=lambda m: f"{m.kind.value}")
def test_pdf_integrates_to_one(m):
    lo, hi = m.support()
    total = integrate.quad(lambda x: float(m.pdf(x)), lo, hi, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("m", MARGINALS, ids=lambda m: f"{m.kind.value}")
def test_pdf_is_derivative_of_cdf(m):
    xs = m.quantile(np.linspace(0.02, 0.98, 25))
    h = 1e-5 * np.maximum(1.0, np.abs(xs))
    fd = (m.cdf(xs + h) - m.cdf(xs - h)) / (2 * h)
    assert np.allclose(fd, m.pdf(xs), rtol=1e-6, atol=1e-10)


@pytest.mark.parametrize("m", MARGINALS, ids=lambda m: f"{m.kind.value}")
def test_quantile_cdf_roundtrip(m):
    ps = np.concatenate([np.geomspace(1e-8, 0.5, 40), 1 - np.geomspace(1e-8, 0.5, 40)])
    back = m.cdf(m.quantile(ps))
    # near a finite truncation bound x cannot resolve F(x) - F(lo) below ~eps
    atol = 1e-15 if m.kind in (d.Kind.TRUNCATED_NORMAL, d.Kind.UNIFORM) else 0.0
    assert np.allclose(back, ps, rtol=1e-9, atol=atol)
    assert float(m.cdf(m.quantile(0.5))) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-8, max_value=1 - 1e-8))
def test_standard_quantile_roundtrip(p):
    assert float(d.std_normal_cdf(d.std_normal_quantile(p))) == pytest.approx(p, rel=1e-9)


@pytest.mark.parametrize("m", MARGINALS, ids=lambda m: f"{m.kind.value}")
def test_standard_normal_mapping_roundtrip(m):
    z = np.linspace(-5, 5, 41)
    x = m.from_standard_normal(z)
    assert np.allclose(m.to_standard_normal(x), z, rtol=0, atol=1e-8)


def test_cdf_monotone_and_clamped():
    m = d.uniform(5.0, 2.0)
    lo, hi = m.support()
    xs = np.linspace(lo - 1, hi + 1, 200)
    c = m.cdf(xs)
    assert np.all(np.diff(c) >= 0)
    assert m.cdf(lo - 1) == 0.0 and m.cdf(hi + 1) == 1.0
    assert m.pdf(hi + 1) == 0.0
    assert d.lognormal(1.0, 0.5).pdf(-1.0) == 0.0


def test_outside_support_raises_domain_error():
    with pytest.raises(DomainError):
        d.lognormal(20.0, 4.0).to_standard_normal(-1.0)
    with pytest.raises(DomainError):
        d.truncated_normal(0.0, 1.0, -1.0, 1.0).to_standard_normal(2.0)


@pytest.mark.parametrize("args", [
    ("normal", 0.0, 0.0),
    ("normal", 0.0, -1.0),
    ("lognormal", -1.0, 1.0),
    ("lognormal", 0.0, 1.0),
    ("truncated_normal", 0.0, 1.0, 2.0, 1.0),
])
def test_invalid_moments(args):
    with pytest.raises(InvalidMoments):
        d.from_moments(*args)


def test_truncated_normal_realised_moments():
    from scipy import stats

    m = d.truncated_normal(1.0, 2.0, -1.0, 4.0)
    ref = stats.truncnorm((-1 - 1) / 2, (4 - 1) / 2, loc=1.0, scale=2.0)
    mean, std = m.moments()
    assert mean == pytest.approx(ref.mean(), rel=1e-12)
    assert std == pytest.approx(ref.std(), rel=1e-12)


def test_sampled_moments_match():
    rng = np.random.default_rng(7)
    z = rng.standard_normal(1_000_000)
    for m in (d.lognormal(20.0, 4.0), d.uniform(5.0, 2.0)):
        x = m.from_standard_normal(z)
        assert x.mean() == pytest.approx(m.mean, rel=5e-3)
        assert x.std() == pytest.approx(m.std_dev, rel=1e-2)
