"""Hedgehog profiles on the three-sphere and their static energy.

Units are fixed to e*f_pi = 1: lengths (including the sphere radius L) are
measured in (e f_pi)^-1 and energies in f_pi / (2 e).  A hedgehog is described
by a single chiral angle F(psi) on psi in [0, pi] with F(0) = 0 and
F(pi) = Q*pi for integer charge Q.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicHermiteSpline

FloatArray = NDArray[np.float64]

# Below this value of sin(psi) the ratio sin F / sin psi is taken from its
# l'Hopital limit.
SIN_GUARD = 1e-6
BOUNDARY_TOL = 1e-9
DEFAULT_QUAD_NODES = 2048
DEFAULT_QUAD_ORDER = 32


@dataclass(frozen=True)
class Radius:
    """Dimensionless radius of the base three-sphere."""

    L: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValueError(f"radius must be positive and finite, got {self.L!r}")

    def __float__(self) -> float:
        return float(self.L)


@dataclass(frozen=True)
class ChargeSector:
    Q: int

    def __post_init__(self) -> None:
        if int(self.Q) != self.Q:
            raise ValueError(f"topological charge must be an integer, got {self.Q!r}")

    def __int__(self) -> int:
        return int(self.Q)


def as_radius(L: float | Radius) -> float:
    return float(Radius(float(L)))


def as_charge(Q: int | ChargeSector) -> int:
    return int(Q if isinstance(Q, ChargeSector) else ChargeSector(Q))


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule on [0, pi].

    ``weights`` integrate plain functions, so ``sum(weights * f(nodes))``
    approximates the integral of f over [0, pi].  Each of the ``panels``
    equal sub-intervals carries ``order`` nodes, which makes the rule exact for
    polynomials in psi of degree ``2*order - 1`` and symmetric under
    psi -> pi - psi.
    """

    nodes: FloatArray
    weights: FloatArray
    order: int
    panels: int

    @property
    def degree(self) -> int:
        return 2 * self.order - 1

    @property
    def sin2(self) -> FloatArray:
        return np.sin(self.nodes) ** 2

    def integrate(self, values: ArrayLike) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def integrate_sin2(self, values: ArrayLike) -> float:
        """Integral of sin^2(psi) * values over [0, pi]."""
        return float(np.dot(self.weights * self.sin2, np.asarray(values, dtype=float)))

    def refined(self) -> "QuadratureRule":
        return gauss_legendre_rule(2 * len(self.nodes), self.order)


def gauss_legendre_rule(
    n_nodes: int = DEFAULT_QUAD_NODES, order: int = DEFAULT_QUAD_ORDER
) -> QuadratureRule:
    """Build and self-validate a composite Gauss-Legendre rule on [0, pi]."""
    if order < 2 or n_nodes < order or n_nodes % order:
        raise ValueError(
            f"n_nodes={n_nodes} must be a positive multiple of order={order} >= 2"
        )
    panels = n_nodes // order
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, math.pi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    rule = QuadratureRule(nodes=nodes, weights=weights, order=order, panels=panels)
    _validate_rule(rule)
    return rule


def _validate_rule(rule: QuadratureRule) -> None:
    s2 = rule.sin2
    checks = (
        (rule.integrate(s2), math.pi / 2),
        (rule.integrate(s2 * s2), 3 * math.pi / 8),
    )
    for got, want in checks:
        if abs(got - want) > 1e-13 * want:
            raise RuntimeError(
                f"quadrature self-check failed: {got!r} vs closed form {want!r}"
            )


_default_rule: QuadratureRule | None = None


def default_rule() -> QuadratureRule:
    global _default_rule
    if _default_rule is None:
        _default_rule = gauss_legendre_rule()
    return _default_rule


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """Chiral angle F sampled on a grid spanning [0, pi].

    Between nodes F is evaluated from the most accurate representation
    available: the sine coefficients ``modes`` of F(psi) - Q*psi when present
    (solver output, series profiles), otherwise a cubic Hermite interpolant
    using ``dF`` or finite-difference slopes.
    """

    psi: FloatArray
    F: FloatArray
    charge: int
    dF: FloatArray | None = None
    modes: FloatArray | None = None
    _spline: CubicHermiteSpline | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        psi = np.asarray(self.psi, dtype=float)
        F = np.array(self.F, dtype=float)
        Q = as_charge(self.charge)
        if psi.ndim != 1 or psi.size < 3:
            raise ValueError("profile grid needs at least 3 nodes")
        if F.shape != psi.shape:
            raise ValueError("F and psi must have the same length")
        if psi[0] != 0.0 or abs(psi[-1] - math.pi) > 1e-14:
            raise ValueError("profile grid must start at 0 and end at pi")
        if np.any(np.diff(psi) <= 0):
            raise ValueError("profile grid must be strictly increasing")
        if abs(F[0]) > BOUNDARY_TOL or abs(F[-1] - Q * math.pi) > BOUNDARY_TOL:
            raise ValueError(
                f"boundary values F(0)={F[0]!r}, F(pi)={F[-1]!r} do not match Q={Q}"
            )
        psi = psi.copy()
        psi[-1] = math.pi
        F[0] = 0.0
        F[-1] = Q * math.pi
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "charge", Q)
        if self.dF is not None:
            dF = np.asarray(self.dF, dtype=float)
            if dF.shape != psi.shape:
                raise ValueError("dF and psi must have the same length")
            object.__setattr__(self, "dF", dF)
        if self.modes is not None:
            object.__setattr__(self, "modes", np.asarray(self.modes, dtype=float))

    @property
    def size(self) -> int:
        return self.psi.size

    def evaluate(self, x: ArrayLike, nu: int = 0) -> FloatArray:
        """F or its ``nu``-th derivative at arbitrary points of [0, pi]."""
        x = np.asarray(x, dtype=float)
        if self.modes is not None:
            return sine_series_eval(self.modes, x, nu) + _linear_part(self.charge, x, nu)
        if nu > 2:
            raise ValueError("Hermite-interpolated profiles support nu <= 2")
        return self._hermite()(x, nu)

    def _hermite(self) -> CubicHermiteSpline:
        if self._spline is None:
            slopes = self.dF if self.dF is not None else np.gradient(self.F, self.psi, edge_order=2)
            object.__setattr__(self, "_spline", CubicHermiteSpline(self.psi, self.F, slopes))
        return self._spline


def _linear_part(Q: int, x: FloatArray, nu: int) -> FloatArray:
    if nu == 0:
        return Q * x
    if nu == 1:
        return np.full_like(x, float(Q))
    return np.zeros_like(x)


def sine_series_eval(coeffs: ArrayLike, x: ArrayLike, nu: int = 0) -> FloatArray:
    """Evaluate sum_k c_k sin(k x) (k = 1..K) or its nu-th derivative."""
    c = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    if c.size == 0:
        return np.zeros_like(x)
    k = np.arange(1, c.size + 1, dtype=float)
    phase = np.outer(x.ravel(), k) + nu * (math.pi / 2)
    out = np.sin(phase) @ (c * k**nu)
    return out.reshape(x.shape)


def series_profile(
    modes: ArrayLike, charge: int = 1, grid: ArrayLike | int = 513
) -> Profile:
    """Profile F(psi) = Q*psi + sum_k modes[k-1] sin(k psi) sampled on ``grid``."""
    psi = uniform_grid(grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    modes = np.asarray(modes, dtype=float)
    F = charge * psi + sine_series_eval(modes, psi)
    dF = charge + sine_series_eval(modes, psi, 1)
    return Profile(psi=psi, F=F, charge=charge, dF=dF, modes=modes)


def uniform_grid(n: int) -> FloatArray:
    n = int(n)
    if n < 3:
        raise ValueError("grid needs at least 3 nodes")
    psi = np.linspace(0.0, math.pi, n)
    psi[-1] = math.pi
    return psi


def _check_grid(grid: ArrayLike) -> FloatArray:
    psi = np.asarray(grid, dtype=float)
    if psi.ndim != 1 or psi.size < 3 or psi[0] != 0.0 or abs(psi[-1] - math.pi) > 1e-14:
        raise ValueError("grid must be 1-D with >= 3 nodes spanning [0, pi]")
    if np.any(np.diff(psi) <= 0):
        raise ValueError("grid must be strictly increasing")
    return psi


def identity_profile(grid: ArrayLike | int = 513) -> Profile:
    """The identity map F(psi) = psi, charge 1."""
    psi = uniform_grid(grid) if np.isscalar(grid) else _check_grid(grid)
    return Profile(
        psi=psi, F=psi.copy(), charge=1, dF=np.ones_like(psi), modes=np.zeros(0)
    )


def vacuum_profile(grid: ArrayLike | int = 513) -> Profile:
    psi = uniform_grid(grid) if np.isscalar(grid) else _check_grid(grid)
    return Profile(psi=psi, F=np.zeros_like(psi), charge=0, dF=np.zeros_like(psi), modes=np.zeros(0))


def sin_ratio(F: FloatArray, dF: FloatArray, psi: FloatArray) -> FloatArray:
    """sin F / sin psi, with its finite limit F' cos F / cos psi near the poles."""
    F, dF, psi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (F, dF, psi)))
    s = np.sin(psi)
    near = np.abs(s) < SIN_GUARD
    out = np.empty_like(F)
    out[~near] = np.sin(F[~near]) / s[~near]
    out[near] = dF[near] * np.cos(F[near]) / np.cos(psi[near])
    return out


# ---------------------------------------------------------------------------
# energy


@dataclass(frozen=True)
class EnergyBreakdown:
    sigma_term: float
    skyrme_term: float

    @property
    def total(self) -> float:
        return self.sigma_term + self.skyrme_term


def energy_density(
    F: FloatArray, dF: FloatArray, psi: FloatArray, L: float
) -> tuple[FloatArray, FloatArray]:
    """Sigma and Skyrme integrands, including the 4*pi*sin^2(psi) measure."""
    s = sin_ratio(F, dF, psi)
    sin2psi = np.sin(psi) ** 2
    sin2F = np.sin(F) ** 2
    sigma = 4 * math.pi * L * (sin2psi * dF**2 + 2 * sin2F)
    skyrme = 4 * math.pi / L * (2 * dF**2 + s**2) * sin2F
    return sigma, skyrme


def energy(
    p: Profile, L: float | Radius, q: QuadratureRule | None = None
) -> EnergyBreakdown:
    """Static hedgehog energy split into its L-weighted and 1/L-weighted parts."""
    L = as_radius(L)
    q = default_rule() if q is None else q
    x = q.nodes
    if x[0] < p.psi[0] or x[-1] > p.psi[-1]:
        raise ValueError("quadrature nodes fall outside the profile grid")
    F = p.evaluate(x)
    dF = p.evaluate(x, 1)
    sigma, skyrme = energy_density(F, dF, x, L)
    return EnergyBreakdown(sigma_term=q.integrate(sigma), skyrme_term=q.integrate(skyrme))


def identity_energy(L: float | Radius) -> float:
    """Closed-form energy of the identity map, 6 pi^2 (L + 1/L)."""
    L = as_radius(L)
    return 6 * math.pi**2 * (L + 1 / L)


def topological_charge(p: Profile) -> int:
    ratio = (p.F[-1] - p.F[0]) / math.pi
    Q = round(ratio)
    if abs(Q - ratio) > 1e-6:
        raise ValueError(f"non-integer winding (F(pi)-F(0))/pi = {ratio!r}")
    return int(Q)


def reflect_profile(p: Profile) -> Profile:
    """Image of p under psi -> pi - psi, F -> Q*pi - F.

    This is a symmetry of the static field equation, so it maps solutions to
    solutions with the same energy.
    """
    Q = p.charge
    if Q != 1:
        raise ValueError("reflection is only used in the Q = 1 sector")
    psi = math.pi - p.psi[::-1]
    psi[0] = 0.0
    psi[-1] = math.pi
    F = Q * math.pi - p.F[::-1]
    dF = None if p.dF is None else p.dF[::-1].copy()
    modes = None
    if p.modes is not None:
        k = np.arange(1, p.modes.size + 1)
        modes = p.modes * (-1.0) ** k
    return Profile(psi=psi, F=F, charge=Q, dF=dF, modes=modes)


# ---------------------------------------------------------------------------
# scalar product


def _sample(u: ArrayLike | Callable[[FloatArray], ArrayLike], q: QuadratureRule) -> FloatArray:
    if callable(u):
        return np.broadcast_to(np.asarray(u(q.nodes), dtype=float), q.nodes.shape)
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        return np.full(q.nodes.shape, float(u))
    if u.shape != q.nodes.shape:
        raise ValueError(
            f"samples have shape {u.shape}, quadrature rule has {q.nodes.size} nodes"
        )
    return u


def inner_g(
    u: ArrayLike | Callable[[FloatArray], ArrayLike],
    v: ArrayLike | Callable[[FloatArray], ArrayLike],
    q: QuadratureRule | None = None,
) -> float:
    """g(u, v) = 4 pi int_0^pi u v sin^2(psi) dpsi.

    ``u`` and ``v`` are callables or values sampled at the rule's nodes.
    """
    q = default_rule() if q is None else q
    return 4 * math.pi * q.integrate_sin2(_sample(u, q) * _sample(v, q))


# ---------------------------------------------------------------------------
# CSV I/O


def write_profile_csv(p: Profile, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["psi", "F"])
        for x, f in zip(p.psi, p.F):
            w.writerow([f"{x:.15e}", f"{f:.15e}"])


def read_profile_csv(path: str | Path, charge: int | None = None) -> Profile:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["psi", "F"]:
        raise ValueError(f"{path}: expected header 'psi,F'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    psi, F = data[:, 0], data[:, 1]
    if charge is None:
        charge = round((F[-1] - F[0]) / math.pi)
    return Profile(psi=psi, F=F, charge=charge)
