import math
import warnings

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import skyrmions
from skyrme_s3 import perturbation as pt
from skyrme_s3.model import identity_energy, identity_profile, reflect_profile, topological_charge

SQRT2 = math.sqrt(2.0)
amplitudes = st.floats(-0.5, 0.5)


def sympy_identity_energy_along_branch():
    """Oracle: 6 pi^2 (L + 1/L) / (12 pi^2 * 3 sqrt2/4) expanded at L = sqrt2 (1 + 11 x^2/60)."""
    x = sp.symbols("x")
    L = sp.sqrt(2) * (1 + sp.Rational(11, 60) * x**2)
    e = 6 * sp.pi**2 * (L + 1 / L) / (12 * sp.pi**2 * 3 * sp.sqrt(2) / 4)
    return x, sp.series(e, x, 0, 8).removeO()


def test_zero_amplitude_is_identity():
    psi = np.linspace(0, math.pi, 33)
    np.testing.assert_array_equal(pt.perturbative_profile(psi, 0.0), psi)


def test_amplitude_derivative_is_instability_mode():
    psi = np.linspace(0, math.pi, 33)
    h = 1e-5
    d = (pt.perturbative_profile(psi, h) - pt.perturbative_profile(psi, -h)) / (2 * h)
    np.testing.assert_allclose(d, np.sin(psi), atol=1e-9)


def test_value_at_equator():
    got = pt.perturbative_profile(math.pi / 2, 0.1)
    want = math.pi / 2 + 0.1 - 1e-3 * (29369 / 316800 + 11 / 480)
    assert float(got) == pytest.approx(want, abs=1e-15)
    assert float(got) - math.pi / 2 == pytest.approx(0.0998844, abs=1e-7)


@given(amplitudes)
def test_endpoints_preserved(x):
    F = pt.perturbative_profile(np.array([0.0, math.pi]), x)
    assert F[0] == 0.0
    assert abs(F[1] - math.pi) < 1e-15
    assert topological_charge(pt.perturbative_profile_object(x, 65)) == 1


@given(amplitudes)
def test_energy_even(x):
    assert pt.perturbative_energy(x) == pt.perturbative_energy(-x)


@given(amplitudes)
def test_reflection_maps_amplitude_to_minus(x):
    p = pt.perturbative_profile_object(x, grid=257)
    r = reflect_profile(p)
    dev = np.max(np.abs(r.F - pt.perturbative_profile(r.psi, -x)))
    assert dev <= 0.2 * x * x + 1e-15
    # at this truncation order the mapping is in fact exact
    assert dev <= 1e-14


def test_energy_series_values():
    assert pt.perturbative_energy(0.0) == pytest.approx(9 * SQRT2 * math.pi**2, rel=1e-15)
    x = 0.3
    want = 12 * math.pi**2 * (3 * SQRT2 / 4) * (
        1 + (11 / 180) * 0.09 - (209 / 10800) * 0.0081 + (5209 / 864000) * 0.000729)
    assert pt.perturbative_energy(x) == pytest.approx(want, rel=1e-14)


def test_quadratic_coefficient_matches_identity_expansion():
    x, series = sympy_identity_energy_along_branch()
    assert series.coeff(x, 0) == 1
    assert series.coeff(x, 2) == pt.E2 == sp.Rational(11, 180)


def test_quartic_gap_coefficient():
    # identity minus series energy at order x^4, in units of 12 pi^2 * 3 sqrt2/4
    x, series = sympy_identity_energy_along_branch()
    ident4 = series.coeff(x, 4)
    assert ident4 == sp.Rational(121, 10800)
    assert ident4 - sp.Rational(pt.E4.numerator, pt.E4.denominator) == sp.Rational(330, 10800)


def test_series_below_identity_for_small_amplitude():
    for x in (0.05, 0.1, 0.2, 0.4):
        L = pt.radius_from_amplitude(x)
        assert pt.perturbative_energy(x) < identity_energy(L)


def test_radius_relation():
    assert pt.radius_from_amplitude(0.0) == SQRT2
    assert pt.radius_from_amplitude(0.3) == pytest.approx(SQRT2 * (1 + (11 / 60) * 0.09), rel=1e-15)
    assert pt.radius_from_amplitude(0.3, "literal") == pytest.approx(SQRT2 * (1 + (11 / 60) * 0.3**4), rel=1e-15)
    with pytest.raises(ValueError):
        pt.radius_from_amplitude(0.1, "other")
    with pytest.raises(ValueError):
        pt.amplitude_from_radius(1.3)


@given(st.floats(0.05, 0.5), st.sampled_from(["adopted", "literal"]))
def test_relation_roundtrip(x, relation):
    # below ~1e-3 the literal relation's x^4 drops out of L in double precision
    L = pt.radius_from_amplitude(x, relation)
    assert pt.amplitude_from_radius(L, relation) == pytest.approx(x, rel=1e-8)


def test_guard_warns():
    with pytest.warns(RuntimeWarning):
        pt.perturbative_energy(0.7)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pt.perturbative_energy(0.5)


def test_measure_identity_is_zero():
    assert pt.measure_amplitude(identity_profile()) == 0.0


def test_measure_of_series_matches_exact_projection():
    # oracle: symbolic g-projection of the series on sin psi
    psi, x = sp.symbols("psi x")
    F = (x * sp.sin(psi) + sp.Rational(3, 20) * x**2 * sp.sin(2 * psi)
         - x**3 * (sp.Rational(29369, 316800) * sp.sin(psi) - sp.Rational(11, 480) * sp.sin(3 * psi)))
    num = sp.integrate(sp.expand(F * sp.sin(psi) ** 3), (psi, 0, sp.pi))
    den = sp.integrate(sp.sin(psi) ** 4, (psi, 0, sp.pi))
    proj = sp.expand(sp.simplify(num / den))
    assert proj == x - (sp.Rational(29369, 316800) + sp.Rational(11, 1440)) * x**3
    for xv in (0.1, 0.3, -0.2):
        got = pt.measure_amplitude(pt.perturbative_profile_object(xv))
        assert got == pytest.approx(float(proj.subs(x, xv)), rel=1e-13)
    assert pt.measure_amplitude(pt.perturbative_profile_object(0.1)) == pytest.approx(0.1, rel=2e-3)


def test_measure_requires_unit_charge():
    from skyrme_s3.model import vacuum_profile
    with pytest.raises(ValueError):
        pt.measure_amplitude(vacuum_profile())


def test_measured_amplitude_near_critical():
    L = SQRT2 + 0.01
    xs = sorted(pt.measure_amplitude(r.profile) for r in skyrmions(L))
    assert xs[0] < 0 < xs[1]
    assert xs[0] == pytest.approx(-xs[1], abs=1e-6)
    assert abs(xs[1] - pt.amplitude_from_radius(L)) / pt.amplitude_from_radius(L) <= 0.05


@pytest.mark.parametrize("dL", [0.001, 0.01, 0.05])
def test_series_energy_matches_numerics(dL):
    L = SQRT2 + dL
    for r in skyrmions(L):
        x = pt.measure_amplitude(r.profile)
        assert abs(pt.perturbative_energy(x) - r.energy) / r.energy <= 1e-3


def test_fit_relation():
    radii = [SQRT2 + d for d in (0.005, 0.02)]
    x = [pt.amplitude_from_radius(L) for L in radii]
    np.testing.assert_allclose(pt.fit_relation(radii, x), 0, atol=1e-15)
    assert np.all(pt.fit_relation(radii, x, "literal") > 0.4)


def test_state():
    s = pt.perturbative_state(0.2)
    assert s.L_implied == pt.radius_from_amplitude(0.2)
    np.testing.assert_allclose(np.array([0.2, 0.04, 0.008]) @ s.profile_coeffs, pt.perturbative_modes(0.2), rtol=1e-15)
    assert s.energy_series_value == pt.perturbative_energy(0.2)
