import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from skyrme_s3 import model
from skyrme_s3.model import (
    Profile,
    energy,
    gauss_legendre_rule,
    identity_energy,
    identity_profile,
    inner_g,
    reflect_profile,
    series_profile,
    topological_charge,
)
from skyrme_s3.perturbation import perturbative_profile_object

SQRT2 = math.sqrt(2.0)

coeffs = st.lists(st.floats(-0.3, 0.3), min_size=1, max_size=6)
radii = st.floats(0.3, 8.0)


def _sympy_identity_energy():
    """Oracle: symbolic integration of the energy functional at F = psi."""
    psi, L = sp.symbols("psi L", positive=True)
    F = psi
    s2 = sp.sin(F) ** 2 / sp.sin(psi) ** 2
    dens = 4 * sp.pi * sp.sin(psi) ** 2 * (
        L * (sp.diff(F, psi) ** 2 + 2 * s2) + (2 * sp.diff(F, psi) ** 2 + s2) * s2 / L
    )
    return L, sp.simplify(sp.integrate(sp.simplify(dens), (psi, 0, sp.pi)))


def test_identity_profile_on_five_nodes():
    p = identity_profile(5)
    np.testing.assert_allclose(p.F, [0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi], atol=1e-15)
    assert topological_charge(p) == 1


@pytest.mark.parametrize("n", [3, 17, 513])
def test_identity_charge_any_grid(n):
    p = identity_profile(n)
    assert p.F[-1] - p.F[0] == math.pi


def test_identity_energy_matches_symbolic_integral():
    L, U = _sympy_identity_energy()
    assert sp.simplify(U - 6 * sp.pi**2 * (L + 1 / L)) == 0
    for Lv in (0.5, 1.0, SQRT2, 2.0, 5.0):
        want = float(U.subs(L, Lv))
        assert energy(identity_profile(), Lv).total == pytest.approx(want, rel=1e-13)


def test_identity_energy_at_critical_radius():
    # 9 sqrt2 pi^2 = (3 sqrt2 / 4) * 12 pi^2
    assert energy(identity_profile(), SQRT2).total == pytest.approx(9 * SQRT2 * math.pi**2, rel=1e-13)
    assert 9 * SQRT2 * math.pi**2 == pytest.approx(125.61955559, abs=1e-8)


def test_energy_breakdown_identity():
    e = energy(identity_profile(), 2.0)
    # sigma part 4 pi L * int(sin^2 + 2 sin^2) = 6 pi^2 L, Skyrme part 6 pi^2 / L
    assert e.sigma_term == pytest.approx(6 * math.pi**2 * 2, rel=1e-13)
    assert e.skyrme_term == pytest.approx(6 * math.pi**2 / 2, rel=1e-13)


def test_vacuum_energy_zero():
    assert energy(model.vacuum_profile(), 1.7).total == 0.0


def test_energy_rejects_bad_radius():
    with pytest.raises(ValueError):
        energy(identity_profile(), -1.0)
    with pytest.raises(ValueError):
        model.Radius(0.0)


def test_charge_of_series_profile():
    psi = model.uniform_grid(257)
    p = perturbative_profile_object(0.2, grid=psi)
    assert topological_charge(p) == 1
    assert topological_charge(model.vacuum_profile()) == 0


def test_profile_rejects_bad_boundary():
    psi = model.uniform_grid(9)
    with pytest.raises(ValueError):
        Profile(psi=psi, F=psi + 0.1, charge=1)
    with pytest.raises(ValueError):
        Profile(psi=psi, F=psi, charge=2)
    with pytest.raises(ValueError):
        Profile(psi=psi[::-1], F=psi, charge=1)


def test_reflect_identity_fixed():
    p = identity_profile(33)
    r = reflect_profile(p)
    np.testing.assert_allclose(r.F, p.F, atol=1e-15)


def test_reflect_first_harmonic():
    x = 0.17
    p = series_profile([x], grid=65)
    r = reflect_profile(p)
    np.testing.assert_allclose(r.F, r.psi - x * np.sin(r.psi), atol=1e-14)


def test_reflect_requires_unit_charge():
    with pytest.raises(ValueError):
        reflect_profile(model.vacuum_profile())


@given(coeffs)
def test_reflection_is_involution(c):
    p = series_profile(c, grid=129)
    rr = reflect_profile(reflect_profile(p))
    np.testing.assert_allclose(rr.F, p.F, atol=1e-14)
    np.testing.assert_allclose(rr.modes, p.modes, atol=0)


@given(coeffs, radii)
def test_reflection_preserves_energy(c, L):
    p = series_profile(c, grid=129)
    assert energy(reflect_profile(p), L).total == pytest.approx(energy(p, L).total, rel=1e-10)


@given(coeffs, radii)
def test_energy_nonnegative(c, L):
    e = energy(series_profile(c, grid=65), L)
    assert e.sigma_term >= 0 and e.skyrme_term >= 0


@given(coeffs, radii)
def test_identity_energy_below_perturbed_at_small_radius(c, L):
    # below sqrt(2) the identity is the minimum in its sector (small perturbations)
    if L >= 1.3:
        return
    c = [0.1 * v for v in c]
    assert energy(series_profile(c), L).total >= identity_energy(L) - 1e-9


def test_profile_spectral_and_hermite_agree():
    c = [0.2, -0.05, 0.01]
    p = series_profile(c, grid=2049)
    h = Profile(psi=p.psi, F=p.F, charge=1, dF=p.dF)
    x = np.linspace(0.01, 3.1, 50)
    np.testing.assert_allclose(h.evaluate(x), p.evaluate(x), atol=1e-11)


# -- scalar product and quadrature


def test_inner_g_closed_forms():
    assert inner_g(np.sin, np.sin) == pytest.approx(1.5 * math.pi**2, rel=1e-14)
    assert abs(inner_g(np.sin, lambda x: 2 * np.sin(2 * x))) < 1e-13
    assert inner_g(lambda x: 0 * x, np.sin) == 0.0


def test_inner_g_accepts_samples():
    q = model.default_rule()
    assert inner_g(np.sin(q.nodes), np.sin(q.nodes), q) == pytest.approx(1.5 * math.pi**2, rel=1e-14)
    with pytest.raises(ValueError):
        inner_g(np.ones(7), np.sin, q)


@given(st.integers(1, 12), st.integers(1, 12))
def test_inner_g_sine_pairs(k, m):
    # oracle: sin^2 = (1 - cos 2psi)/2 and product-to-sum by hand
    want = {0: math.pi**2, 2: -0.5 * math.pi**2}.get(abs(k - m), 0.0)
    if k == m == 1:
        want = 1.5 * math.pi**2
    got = inner_g(lambda x: np.sin(k * x), lambda x: np.sin(m * x))
    assert got == pytest.approx(want, abs=1e-12)


def test_quadrature_self_validation():
    q = gauss_legendre_rule()
    assert abs(q.integrate(q.sin2) - math.pi / 2) <= 1e-13
    assert abs(q.integrate(q.sin2**2) - 3 * math.pi / 8) <= 1e-13
    assert q.nodes.size == 2048 and np.all(np.diff(q.nodes) > 0)
    np.testing.assert_allclose(q.nodes + q.nodes[::-1], math.pi, atol=1e-14)


def test_quadrature_rejects_bad_sizes():
    with pytest.raises(ValueError):
        gauss_legendre_rule(100, 32)


def test_profile_csv_roundtrip(tmp_path):
    p = series_profile([0.3, 0.1], grid=101)
    f = tmp_path / "p.csv"
    model.write_profile_csv(p, f)
    assert f.read_text().splitlines()[0] == "psi,F"
    back = model.read_profile_csv(f)
    np.testing.assert_allclose(back.F, p.F, rtol=1e-14, atol=1e-15)
    assert back.charge == 1


def test_profile_csv_bad_header(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("x,y\n0,0\n")
    with pytest.raises(ValueError):
        model.read_profile_csv(f)
