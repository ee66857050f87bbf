import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quelab.errors import NotCoprime, UnsupportedField
from quelab.numberfield import (
    _ideal_counts, bezout, factor_element, field_from_label, kronecker, make_field,
    prime_ideals_above, primes_up_to, totally_positive_associate,
)

FIELDS = [field_from_label(s) for s in ("Q", "Q(sqrt5)", "Q(i)", "Q(sqrt2)", "Q(sqrt-3)")]
coef = st.integers(-60, 60)


def test_allowlist():
    with pytest.raises(UnsupportedField):
        make_field("real", 3)  # fundamental unit of norm +1
    with pytest.raises(UnsupportedField):
        make_field("imaginary", -5)  # class number 2


def test_invariants_sqrt5():
    F = field_from_label("Q(sqrt5)")
    assert (F.D, F.r1, F.r2, F.w) == (5, 2, 0, 2)
    assert F.R == pytest.approx(math.log((1 + math.sqrt(5)) / 2), rel=1e-14)
    assert F.element(*F.eps).norm() == -1
    assert F.covolume() == pytest.approx(math.sqrt(5))


def test_invariants_gaussian():
    F = field_from_label("Q(i)")
    assert (F.D, F.w, F.omega_plus) == (-4, 4, 2)
    assert F.covolume() == pytest.approx(1.0)


@given(st.sampled_from(FIELDS), coef, coef, coef, coef)
def test_norm_multiplicative(F, a, b, c, d):
    if F.kind == "rational":
        b = d = 0
    x, y = F.element(a, b), F.element(c, d)
    assert (x * y).norm() == x.norm() * y.norm()
    assert np.allclose((x * y).embeddings(), x.embeddings() * y.embeddings())


@given(st.sampled_from(FIELDS), coef, coef, coef, coef)
@settings(max_examples=60)
def test_bezout(F, a, b, c, d):
    if F.kind == "rational":
        b = d = 0
    x, y = F.element(a, b), F.element(c, d)
    if x.is_zero() or y.is_zero():
        return
    try:
        s, t = bezout(x, y)
    except NotCoprime:
        common = {P for P, _ in factor_element(x)} & {P for P, _ in factor_element(y)}
        assert common
        return
    assert s * x + t * y == F.one()


@given(st.sampled_from(FIELDS[1:3]), coef, coef)
def test_factorization_norm(F, a, b):
    x = F.element(a, b)
    if x.is_zero():
        return
    fac = factor_element(x)
    assert math.prod(P.norm ** e for P, e in fac) == abs(x.norm())


@given(st.integers(-40, 40), st.integers(-40, 40))
def test_totally_positive_associate(a, b):
    F = field_from_label("Q(sqrt5)")
    x = F.element(a, b)
    if x.is_zero():
        return
    y = totally_positive_associate(x)
    assert y.is_totally_positive()
    assert abs(y.norm()) == abs(x.norm())


def test_splitting_types():
    F = field_from_label("Q(sqrt5)")
    assert [P.kind for P in prime_ideals_above(F, 11)] == ["split", "split"]
    assert prime_ideals_above(F, 2)[0].kind == "inert"
    assert prime_ideals_above(F, 5)[0].kind == "ramified"
    assert kronecker(-4, 3) == -1 and kronecker(-4, 5) == 1


@pytest.mark.parametrize("label", ["Q", "Q(sqrt5)", "Q(i)"])
def test_ideal_counts_match_primes(label):
    F = field_from_label(label)
    c = _ideal_counts(F, 200)
    assert c[1] == 1
    for P in primes_up_to(F, 200):
        assert c[P.norm] >= 1


def test_ideal_count_density():
    # sum_{n<=X} a_n ~ rho X with rho the residue of zeta_F at 1
    F = field_from_label("Q(i)")
    X = 20000
    c = _ideal_counts(F, X)
    assert c.sum() / X == pytest.approx(math.pi / 4, rel=0.02)
