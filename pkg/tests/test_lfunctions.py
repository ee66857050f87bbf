import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quelab.errors import AbscissaViolation, PoleAtS1
from quelab.lfunctions import (
    EulerData, character_sum_l, constant_euler, dedekind_zeta, dedekind_zeta_exact, dirichlet_l,
    m_k, mertens_block, pointwise_quadratic_check, rankin_selberg_partial, sym2_l_value,
    weak_ramanujan_blocks, zeta_residue,
)
from quelab.modforms import delta_form, delta_prime_lambdas
from quelab.numberfield import field_from_label


@pytest.mark.parametrize("label", ["Q", "Q(sqrt5)", "Q(i)"])
@pytest.mark.parametrize("s", [2.0, 2.3, complex(1.5, 4.0)])
def test_ideal_sum_matches_continuation(label, s):
    F = field_from_label(label)
    v = dedekind_zeta(F, s, cutoff=50000)
    assert abs(v.value - dedekind_zeta_exact(F, s)) <= v.tail


def test_residues():
    assert zeta_residue(field_from_label("Q")) == 1.0
    assert zeta_residue(field_from_label("Q(i)")) == pytest.approx(math.pi / 4)
    F = field_from_label("Q(sqrt5)")
    assert zeta_residue(F) == pytest.approx(2 * F.R / math.sqrt(5))


def test_abscissa_and_pole():
    F = field_from_label("Q")
    with pytest.raises(AbscissaViolation):
        dedekind_zeta(F, 1.0)
    with pytest.raises(PoleAtS1):
        dedekind_zeta_exact(F, 1.0)


def test_character_sum_oracle():
    assert character_sum_l(-4, 2.0) == pytest.approx(float(dirichlet_l(-4, 2.0).real), rel=1e-10)


@given(st.floats(-2, 2), st.integers(0, 12))
def test_power_sums_match_satake(lam, j):
    e = EulerData(np.array([2]), np.array([lam]))
    a, b = e.satake()
    assert e.power_sums(j)[0] == pytest.approx((a ** j + b ** j).real[0], abs=1e-9)


@given(st.floats(-2, 2))
def test_hecke_power_recursion(lam):
    e = EulerData(np.array([2]), np.array([lam]))
    assert e.hecke_power(2)[0] == pytest.approx(lam ** 2 - 1, abs=1e-12)
    assert e.hecke_power(3)[0] == pytest.approx(lam ** 3 - 2 * lam, abs=1e-12)


def test_sym2_band_nests():
    ps, lam = delta_prime_lambdas(200000)
    e = EulerData(ps, lam, "Delta")
    small, big = sym2_l_value(e, 20000), sym2_l_value(e)
    assert small.contains(big.value)
    assert big.width < small.width


def test_weak_ramanujan_constant_model():
    # lambda = 2 means alpha = beta = 1, so every prime power term is 4 log p / p^j
    e = constant_euler(2.0, 30000)
    (x, b), = weak_ramanujan_blocks(e, [10000])
    assert b >= 4 * mertens_block(10000)
    assert b == pytest.approx(4 * mertens_block(10000), rel=0.01)


def test_weak_ramanujan_needs_data():
    with pytest.raises(ValueError):
        weak_ramanujan_blocks(constant_euler(1.0, 1000), [1000])


def test_mk_zero_eigenvalues():
    e = constant_euler(0.0, 10000)
    r = m_k(e, 1000, 1.0)
    assert r.prime_product == 1.0
    assert r.Mk == pytest.approx(1 / math.log(1000) ** 2)
    assert r.core == pytest.approx(math.exp(-sum(1 / p for p in e.primes if p <= 1000)))


@given(st.fractions())
def test_pointwise_quadratic(x):
    assert pointwise_quadratic_check([x])


def test_pointwise_quadratic_equality_case():
    x = Fraction(2, 3)
    assert 2 * x == Fraction(2, 3) + Fraction(3, 2) * x * x


def test_rankin_selberg_slope():
    # sum_{n<=X} lambda(n)^2 / n grows like L(1, sym^2) / zeta(2) log X
    lam = delta_form(10 ** 5 + 2).lam(10 ** 5)
    s = rankin_selberg_partial(lam, [10 ** 3, 10 ** 5])
    slope = (s[1] - s[0]) / math.log(100)
    ps, lp = delta_prime_lambdas(10 ** 5)
    L = sym2_l_value(EulerData(ps, lp)).value
    assert slope == pytest.approx(L / (math.pi ** 2 / 6), rel=0.1)
