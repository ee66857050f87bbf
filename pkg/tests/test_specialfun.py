import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from quelab.errors import DivergentIntegral, DomainError, Underflow
from quelab.specialfun import (
    BesselOrder, archimedean_triple_factor, bessel_k, bessel_k_complex, bessel_product_moment,
    binomial_gamma_identity, gamma_ratio_error, whittaker_l2_local,
)


@given(st.floats(0.0, 20.0), st.floats(0.05, 30.0))
@settings(max_examples=40, deadline=None)
def test_bessel_imaginary_order_matches_mpmath(t, x):
    ref = float(mpmath.besselk(mpmath.mpc(0, t), x).real)
    got = bessel_k(BesselOrder("imaginary", t), x)
    scale = max(abs(ref), float(mpmath.besselk(0, x)) * math.exp(-math.pi * t / 2))
    assert abs(got - ref) <= 1e-10 * scale


@given(st.floats(0.0, 10.0), st.floats(0.05, 30.0))
@settings(max_examples=30, deadline=None)
def test_bessel_real_order(nu, x):
    assert bessel_k(nu, x) == pytest.approx(float(mpmath.besselk(nu, x)), rel=1e-12)


def test_bessel_complex_order():
    nu = complex(0.3, 2.0)
    assert bessel_k_complex(nu, 1.7) == pytest.approx(complex(mpmath.besselk(nu, 1.7)), rel=1e-11)


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_k(1.0, 0.0)


def test_bessel_moment_spot_value():
    assert bessel_product_moment(2.0, 0.0, 0.0) == pytest.approx(math.pi ** 2 / 32, rel=1e-14)


@pytest.mark.parametrize("lam,mu,nu", [(1.0, 0.2, 0.4), (2.5, 3j, 1.5j), (0.7, 0.1, 2j), (3.0, 1.2, 0.0)])
def test_bessel_moment_modes_agree(lam, mu, nu):
    c = bessel_product_moment(lam, mu, nu, "closed-form")
    q = bessel_product_moment(lam, mu, nu, "quadrature")
    assert q == pytest.approx(c, rel=1e-8)


def test_bessel_moment_divergent():
    with pytest.raises(DivergentIntegral):
        bessel_product_moment(0.5, 1.0, 1.0)


def test_gamma_ratio_s1_exact_zero():
    assert all(gamma_ratio_error(1, k) == 0.0 for k in (50, 100, 800))


@given(st.floats(0.1, 4.0), st.floats(-10, 10), st.integers(50, 2000))
def test_gamma_ratio_scaled_bound(re, im, k):
    s = complex(re, im)
    assert gamma_ratio_error(s, k) * k / (abs(s) + 1) ** 2 < 2.0


@pytest.mark.parametrize("place", ["real", "complex"])
@pytest.mark.parametrize("k", [2, 12, 40])
def test_whittaker_modes_agree(place, k):
    c = whittaker_l2_local(place, k, log=True)
    q = whittaker_l2_local(place, k, "quadrature", log=True)
    assert abs(q - c) < 1e-9


def test_whittaker_errors():
    with pytest.raises(DomainError):
        whittaker_l2_local("real", 3)
    with pytest.raises(Underflow):
        whittaker_l2_local("real", 400)  # exceeds the double range
    assert math.isfinite(whittaker_l2_local("real", 400, log=True))


@given(st.integers(0, 60))
def test_binomial_gamma_identity(k):
    lhs, rhs = binomial_gamma_identity(k)
    assert lhs == rhs


def test_triple_factor_watson_decays():
    vals = [archimedean_triple_factor("real", k, 1.0, variant="watson") for k in (20, 40, 80, 160)]
    ratios = [a / b for a, b in zip(vals, vals[1:])]
    assert all(r == pytest.approx(2.0, rel=0.1) for r in ratios)
