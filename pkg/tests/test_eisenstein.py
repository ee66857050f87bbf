import math

import numpy as np
import pytest

from quelab import eisenstein as eis
from quelab.errors import NotConvergent
from quelab.numberfield import _ideal_counts, field_from_label
from quelab.profiles import LogGaussian, ProductProfile

Q, K5, KI = (field_from_label(s) for s in ("Q", "Q(sqrt5)", "Q(i)"))


def _pt(F, x, y):
    return eis.PointOnH.make(x, y)


def _direct(F, s, z, m=None):
    return eis.eisenstein_direct(eis.EisParams(F, s, m if m is not None else F.zero_m()), z).value


@pytest.mark.parametrize("F,z", [
    (Q, ([0.13], [1.1])),
    (K5, ([0.2, -0.31], [1.2, 0.9])),
    (KI, ([complex(0.1, 0.27)], [1.05])),
])
def test_direct_matches_fourier(F, z):
    z = _pt(F, *z)
    prm = eis.EisParams(F, 2.3, F.zero_m())
    d = eis.eisenstein_direct(prm, z).value
    f = eis.eisenstein_fourier(prm, z).value
    assert abs(d - f) < 1e-6 * abs(f)


def test_nontrivial_character_needs_re_s_above_one():
    z = _pt(K5, [0.1, 0.2], [1.0, 1.0])
    with pytest.raises(NotConvergent):
        eis.eisenstein_direct(eis.EisParams(K5, 0.8, (1,)), z)


def test_invariance_rational():
    z = _pt(Q, [0.21], [1.3])
    e0 = _direct(Q, 2.0, z)
    assert _direct(Q, 2.0, eis.act_inversion(Q, z)) == pytest.approx(e0, rel=1e-8)
    assert _direct(Q, 2.0, eis.act_translation(Q, z, Q.element(1))) == pytest.approx(e0, rel=1e-10)


def test_invariance_sqrt5():
    z = _pt(K5, [0.1, -0.2], [1.1, 0.95])
    e0 = _direct(K5, 2.0, z)
    eps = K5.element(*K5.eps)
    for w in (eis.act_translation(K5, z, K5.element(0, 1)), eis.act_unit(K5, z, eps),
              eis.act_inversion(K5, z)):
        assert _direct(K5, 2.0, w) == pytest.approx(e0, rel=1e-7)


def test_invariance_gaussian():
    z = _pt(KI, [complex(0.1, 0.2)], [1.1])
    e0 = _direct(KI, 2.0, z)
    for w in (eis.act_inversion(KI, z), eis.act_translation(KI, z, KI.element(0, 1)),
              eis.act_unit(KI, z, KI.element(0, 1))):
        assert _direct(KI, 2.0, w) == pytest.approx(e0, rel=1e-8)


def test_constant_term_rational():
    # the x-average of E(s, x + iy) is y^s + phi(s) y^(1-s)
    s, y, n = 2.0, 1.0, 16
    avg = np.mean([_direct(Q, s, _pt(Q, [j / n], [y])) for j in range(n)])
    phi = eis.scattering_phi(eis.EisParams(Q, s))
    assert avg == pytest.approx(y ** s + phi * y ** (1 - s), rel=1e-8)


@pytest.mark.parametrize("F", [Q, K5, KI])
def test_scattering_functional_equation(F):
    s = complex(0.3, 2.0)
    a = eis.scattering_phi(eis.EisParams(F, s))
    b = eis.scattering_phi(eis.EisParams(F, 1 - s))
    assert a * b == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("F", [Q, K5, KI])
def test_scattering_residue_two_ways(F):
    assert eis.scattering_residue(F) == pytest.approx(eis.scattering_residue_formula(F), rel=1e-6)


@pytest.mark.parametrize("F", [Q, K5, KI])
def test_cusp_volume_jacobian(F):
    assert eis.cusp_volume_jacobian(F) == pytest.approx(eis.cusp_volume_element(F), rel=1e-8)


@pytest.mark.parametrize("F", [K5, KI])
def test_ideal_generators_count(F):
    gens = eis.ideal_generators(F, 200)
    assert len(gens) == int(_ideal_counts(F, 200)[1:].sum())
    assert len({g for g in gens}) == len(gens)


def test_volume_rational_and_sqrt5():
    assert eis.volume_Y(Q) == pytest.approx(math.pi / 3, abs=1e-12)
    assert eis.volume_Y(K5) == pytest.approx(eis.volume_residue_oracle(K5), rel=1e-6)
    assert eis.volume_by_quadrature(Q) == pytest.approx(math.pi / 3, rel=1e-12)


def test_gaussian_quadrature_agrees_with_residue_oracle():
    # the Picard-domain quadrature is an independent check on the oracle
    assert eis.volume_by_quadrature(KI) == pytest.approx(eis.volume_residue_oracle(KI), rel=1e-8)


def test_incomplete_series_two_ways():
    psi = LogGaussian(0.0, 0.3)
    z = _pt(Q, [0.17], [0.9])
    d = eis.incomplete_eisenstein(Q, psi, None, z)
    m = eis.incomplete_eisenstein_mellin(Q, psi, None, z)
    assert d == pytest.approx(m, rel=1e-8)


def test_unipotent_methods_and_inner_product():
    g = ProductProfile((LogGaussian(0.0, 0.2), LogGaussian(0.1, 0.2)))
    z = _pt(K5, [0.1, 0.3], [1.0, 1.2])
    a = eis.unipotent_eisenstein(K5, g, z, "pairs")
    b = eis.unipotent_eisenstein(K5, g, z, "orbits")
    assert a == pytest.approx(b, rel=1e-10)
    quad, closed = eis.unipotent_inner_product(K5, g)
    assert quad == pytest.approx(closed, rel=1e-8)
