import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import near_pi
from quadlin.coeffs import (
    CoefficientFamily,
    check_fff,
    check_fhh,
    check_gsum,
    lemma_margin,
    lemma_margin_closed_form,
    rhombic_nome_reduction_check,
)
from quadlin.errors import DomainError, PoleError, RegimeError

angle = st.floats(0.0, 2 * math.pi)

# (f, g0, g1, h) at alpha = 1.3, reference values from mpmath at 30 digits, frozen.
RECT_ORACLE = (0.7586840780239519, 0.7731728542091411, 0.16403082740647415, 0.8980293418762652)
RHOMB_ORACLE = (0.761722082121521, 0.7474196039082492, None, -1.081876141912039j)


def test_frozen_rectangular_values():
    fam = CoefficientFamily.rectangular(1.0, 0.4)
    got = (fam.f(1.3), fam.g0(1.3), fam.g1(1.3), fam.h(1.3))
    for x, ref in zip(got, RECT_ORACLE):
        assert abs(x - ref) < 1e-14


def test_frozen_rhombic_values():
    fam = CoefficientFamily.rhombic(1.0, 2.95)
    assert abs(fam.f(1.3) - RHOMB_ORACLE[0]) < 1e-14
    assert abs(fam.g0(1.3) - RHOMB_ORACLE[1]) < 1e-14
    assert abs(fam.h(1.3) - RHOMB_ORACLE[3]) < 1e-14


def test_degenerate_is_trigonometric():
    fam = CoefficientFamily.degenerate(0.4)
    a = np.linspace(0.1, 3.0, 7)
    assert np.allclose(fam.f(a), np.tan(a / 2), rtol=1e-15)
    assert np.allclose(fam.g0(a), np.tan(a / 2), rtol=1e-15)
    assert np.all(fam.h(a) == 1)


def test_g1_rectangular_only(rhomb):
    with pytest.raises(RegimeError):
        rhomb.g1(0.3)


def test_pole_guard(rect, rhomb):
    with pytest.raises(PoleError) as info:
        rect.f(math.pi + 0.01)
    assert info.value.location is not None
    with pytest.raises(PoleError):
        rhomb.h(rhomb.lambda0 + math.pi)
    with pytest.raises(PoleError):
        rect.g0(-math.pi)


def test_h_rejects_complex_angles(rect):
    with pytest.raises(DomainError):
        rect.h(0.3 + 0.1j)


def test_serialization_round_trip(family):
    assert CoefficientFamily.from_json(family.to_json()) == family


def test_make_validates():
    with pytest.raises(RegimeError):
        CoefficientFamily.make("square", 1.0)
    with pytest.raises(DomainError):
        CoefficientFamily.make("rectangular")


def test_reality_structure(rect, rhomb):
    a = np.linspace(-3, 3, 13)
    assert np.max(np.abs(rect.f(a).imag)) < 1e-14
    assert np.max(np.abs(rect.h(a).imag)) < 1e-14
    assert np.max(np.abs(rhomb.f(a).imag)) < 1e-14
    assert np.max(np.abs(rhomb.h(a).real)) < 1e-14


@given(a=angle, b=angle, c=angle, d=angle)
def test_fff(family, a, b, c, d):
    for x, y in ((a, b), (b, c), (c, d), (d, a), (a, c), (b, d)):
        assume(not near_pi(x - y))
    assert abs(check_fff(a, b, c, d, family)) < 1e-10


@given(a=angle, b=angle, c=angle)
def test_fhh_and_gsum(family, a, b, c):
    for x, y in ((a, b), (b, c), (c, a)):
        assume(not near_pi(x - y))
    if family.regime == "rhombic":
        for x in (a, b, c):
            assume(not near_pi(x - family.lambda0))
    assert abs(check_fhh(a, b, c, family)) < 1e-10
    assert abs(check_gsum(a, b, c, family)) < 1e-10


@given(a=angle)
def test_shift_by_pi(family, a):
    assume(not near_pi(a) and not near_pi(a + math.pi))
    if family.regime == "rhombic":
        assume(not near_pi(a - family.lambda0) and not near_pi(a + math.pi - family.lambda0))
    assert abs(family.f(a) * family.f(a + math.pi) + 1) < 1e-10
    assert abs(family.h(a) * family.h(a + math.pi) - 1) < 1e-10


@given(a=angle, tau0=st.sampled_from([0.5, 1.0, 2.0]))
def test_rhombic_nome_reduction(a, tau0):
    assume(not near_pi(a))
    assert abs(rhombic_nome_reduction_check(a, tau0)) < 1e-10


@pytest.mark.parametrize("tau0", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("regime", ["rectangular", "rhombic"])
def test_lemma_margins(regime, tau0):
    fam = CoefficientFamily.make(regime, tau0)
    a = np.linspace(0.05, math.pi - 0.05, 60)
    m = lemma_margin(a, fam)
    assert np.all(m > 0)
    assert np.max(np.abs(m - lemma_margin_closed_form(a, fam))) < 1e-10


def test_lemma_margin_domain(rect):
    with pytest.raises(DomainError):
        lemma_margin(0.0, rect)
    assert lemma_margin(1.0, CoefficientFamily.degenerate()) == 0.0
