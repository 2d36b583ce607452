"""Small-amplitude expansion of the skyrmion branch near L = sqrt(2).

The branch is parametrised by an amplitude x: the profile is a short sine
series in psi whose coefficients are polynomials in x, and the energy is an
even polynomial in x.  Two readings of the amplitude-radius relation are
provided:

* ``"adopted"``: x^2 = (60/11) (L/sqrt(2) - 1)
* ``"literal"``: x^2 = sqrt((60/11) (L/sqrt(2) - 1))

Only the adopted one makes the order-x^2 energy term cancel against the
expansion of the identity energy 6 pi^2 (L + 1/L); the numerical branch
decides between them (see ``fit_relation``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from .model import FloatArray, Profile, QuadratureRule, as_radius, inner_g, series_profile

Relation = Literal["adopted", "literal"]

AMPLITUDE_GUARD = 0.5
SQRT2 = math.sqrt(2.0)

# profile: psi + x sin psi + C2 x^2 sin 2psi - x^3 (C3A sin psi - C3B sin 3psi)
C2 = Fraction(3, 20)
C3A = Fraction(29369, 316800)
C3B = Fraction(11, 480)
# energy / (12 pi^2) = (3 sqrt2 / 4) (1 + E2 x^2 + E4 x^4 + E6 x^6)
E2 = Fraction(11, 180)
E4 = Fraction(-209, 10800)
E6 = Fraction(5209, 864000)
RELATION_SLOPE = Fraction(60, 11)


def _guard(x: float, guard: float) -> None:
    if abs(x) > guard:
        warnings.warn(
            f"amplitude |x|={abs(x):g} beyond the truncation guard {guard:g}",
            RuntimeWarning,
            stacklevel=3,
        )


def perturbative_modes(x: float) -> FloatArray:
    """Coefficients of sin psi, sin 2psi, sin 3psi in F(psi, x) - psi."""
    return np.array(
        [x - float(C3A) * x**3, float(C2) * x**2, float(C3B) * x**3]
    )


def perturbative_profile(psi: ArrayLike, x: float, guard: float = AMPLITUDE_GUARD) -> FloatArray:
    """Truncated series F(psi, x) for the skyrmion profile."""
    _guard(x, guard)
    psi = np.asarray(psi, dtype=float)
    a1, a2, a3 = perturbative_modes(x)
    return psi + a1 * np.sin(psi) + a2 * np.sin(2 * psi) + a3 * np.sin(3 * psi)


def perturbative_profile_object(
    x: float, grid: ArrayLike | int = 513, guard: float = AMPLITUDE_GUARD
) -> Profile:
    _guard(x, guard)
    return series_profile(perturbative_modes(x), charge=1, grid=grid)


def energy_polynomial(x: float) -> float:
    """U / (12 pi^2) as the truncated even polynomial in x."""
    x2 = x * x
    return 0.75 * SQRT2 * (1 + x2 * (float(E2) + x2 * (float(E4) + x2 * float(E6))))


def perturbative_energy(x: float, guard: float = AMPLITUDE_GUARD) -> float:
    _guard(x, guard)
    return 12 * math.pi**2 * energy_polynomial(x)


def radius_from_amplitude(x: float, relation: Relation = "adopted") -> float:
    if relation == "adopted":
        return SQRT2 * (1 + x * x / float(RELATION_SLOPE))
    if relation == "literal":
        return SQRT2 * (1 + x**4 / float(RELATION_SLOPE))
    raise ValueError(f"unknown relation {relation!r}")


def amplitude_from_radius(L: float, relation: Relation = "adopted") -> float:
    """Positive amplitude on the branch at radius L >= sqrt(2)."""
    L = as_radius(L)
    t = float(RELATION_SLOPE) * (L / SQRT2 - 1)
    if t < 0:
        raise ValueError(f"no real amplitude below the critical radius (L={L})")
    if relation == "adopted":
        return math.sqrt(t)
    if relation == "literal":
        return t**0.25
    raise ValueError(f"unknown relation {relation!r}")


def measure_amplitude(p: Profile, q: QuadratureRule | None = None) -> float:
    """Projection of F - psi on the instability mode sin psi in the g product."""
    if p.charge != 1:
        raise ValueError("amplitude is defined in the Q = 1 sector")
    dev = lambda x: p.evaluate(x) - x  # noqa: E731
    return inner_g(dev, np.sin, q) / inner_g(np.sin, np.sin, q)


@dataclass(frozen=True)
class PerturbativeState:
    x: float
    L_implied: float
    profile_coeffs: FloatArray  # rows: orders x, x^2, x^3; columns: sin psi, sin 2psi, sin 3psi
    energy_series_value: float


def perturbative_state(x: float, relation: Relation = "adopted") -> PerturbativeState:
    coeffs = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, float(C2), 0.0],
            [-float(C3A), 0.0, float(C3B)],
        ]
    )
    return PerturbativeState(
        x=x,
        L_implied=radius_from_amplitude(x, relation),
        profile_coeffs=coeffs,
        energy_series_value=perturbative_energy(x, guard=math.inf),
    )


def fit_relation(
    radii: ArrayLike, x_meas: ArrayLike, relation: Relation = "adopted"
) -> FloatArray:
    """Relative residuals |x_meas - x(L)| / x(L) of a relation on measured pairs."""
    radii = np.asarray(radii, dtype=float)
    x_meas = np.abs(np.asarray(x_meas, dtype=float))
    pred = np.array([amplitude_from_radius(L, relation) for L in radii])
    return np.abs(x_meas - pred) / pred
