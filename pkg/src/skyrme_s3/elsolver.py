"""Euler-Lagrange equation for the hedgehog and a shooting solver for it.

Both poles are regular singular points of the field equation: near each pole
a regular solution behaves like F ~ a*psi (resp. Q*pi - c*(pi - psi)) while
the second local solution blows up like psi^-2.  Integrating away from a pole
is therefore stable and integrating towards one is not.  The solver proceeds
in two stages:

1. One-sided shots from psi = eps to pi - eps.  A shot that misses the
   solution peels away from Q*pi near the far pole, so the sign of the
   boundary miss brackets solutions on a mesh of initial slopes; the bracket
   is narrowed by bisection.
2. Each bracketed root is polished by two-sided shooting: the left slope a and
   the right slope c are adjusted until both half-trajectories meet at
   psi = pi/2 with equal value and derivative.

The polished solution is stored as a sine series of F - Q*psi, obtained by a
discrete sine transform of the matched trajectory.  Its residual in the field
equation is evaluated from that series, independently of the integrator.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.fft import dst
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, root

from . import _rk
from .model import (
    FloatArray,
    Profile,
    Radius,
    ChargeSector,
    as_charge,
    as_radius,
    energy,
    identity_profile,
    topological_charge,
    uniform_grid,
)

log = logging.getLogger(__name__)

EPS = 1e-6
RTOL = 1e-12
ATOL = 1e-13
DEFAULT_TOL = 1e-6
DEFAULT_GRID = 513
SPECTRAL_SIZE = 1024
MAX_SPECTRAL_SIZE = 16384
POLISH_RTOL = 1e-13
POLISH_ATOL = 1e-14
# Sine coefficients of a polished trajectory level off at ~5e-14 (integrator
# noise); anything below CHOP, or below NOISE_FACTOR times the median of the
# upper half of the spectrum, is dropped.
CHOP = 2e-13
NOISE_FACTOR = 20.0
# Extra mesh slopes around the identity (slope 1) separate the identity root
# from the two skyrmion roots, which approach it like sqrt(L - sqrt(2)).
IDENTITY_OFFSETS = (1e-4, 1e-3, 1e-2, 3e-2)
# One-sided shots are read off at pi - MATCH_DISTANCE (see shoot); on exact
# skyrmion slopes the extrapolated miss is ~1e-8, on the identity ~1e-13.
MATCH_DISTANCE = 0.02
SHOOT_BOUNDARY_TOL = 1e-6


def default_slope_mesh(Q: int = 1, n: int = 64, lo: float = 0.05, hi: float = 50.0) -> FloatArray:
    mesh = np.geomspace(lo, hi, n)
    extra: list[float] = []
    if Q == 1:
        extra = [1.0] + [1 + s * d for d in IDENTITY_OFFSETS for s in (-1.0, 1.0)]
    elif Q == 0:
        extra = [0.0]
    elif Q < 0:
        mesh = -mesh
    return np.unique(np.concatenate([mesh, extra]))


# ---------------------------------------------------------------------------
# the field equation


def el_residual(
    F: ArrayLike, Fp: ArrayLike, Fpp: ArrayLike, psi: ArrayLike, L: float | Radius
) -> FloatArray:
    """Left-hand side of the static hedgehog field equation.

    The term carrying sin 2F / sin 2psi is evaluated after multiplying out
    the sin 2psi, so nothing is singular at psi = pi/2.  ``psi`` must lie
    strictly inside (0, pi).
    """
    L = as_radius(L)
    F, Fp, Fpp, psi = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (F, Fp, Fpp, psi))
    )
    if np.any((psi <= 0) | (psi >= math.pi)):
        raise ValueError("el_residual is defined for interior points 0 < psi < pi only")
    sp2 = np.sin(psi) ** 2
    sF2 = np.sin(F) ** 2
    s2 = sF2 / sp2
    sin2F = np.sin(2 * F)
    return (
        (L * sp2 + (2 / L) * sF2) * Fpp
        + L * np.sin(2 * psi) * Fp
        + sin2F * Fp**2 / L
        - (L + s2 / L) * sin2F
    )


def _rhs(psi: float, y: Sequence[float], L: float) -> list[float]:
    F, Fp = y[0], y[1]
    sp = math.sin(psi)
    sF = math.sin(F)
    s = sF / sp
    sin2F = math.sin(2 * F)
    num = (L + s * s / L) * sin2F - L * math.sin(2 * psi) * Fp - Fp * Fp * sin2F / L
    den = L * sp * sp + (2 / L) * sF * sF
    return [Fp, num / den]


# ---------------------------------------------------------------------------
# local expansion at a pole


@dataclass(frozen=True)
class EndpointSeries:
    """Regular local solution a*t + b*t^3 about a pole, t the distance to it."""

    a: float
    b: float
    end: Literal["left", "right"]
    charge: int

    def __call__(self, psi: ArrayLike) -> FloatArray:
        psi = np.asarray(psi, dtype=float)
        if self.end == "left":
            return self.a * psi + self.b * psi**3
        u = math.pi - psi
        return self.charge * math.pi - self.a * u - self.b * u**3

    def derivative(self, psi: ArrayLike) -> FloatArray:
        psi = np.asarray(psi, dtype=float)
        t = psi if self.end == "left" else math.pi - psi
        return self.a + 3 * self.b * t**2


def cubic_coefficient(a: float, L: float) -> float:
    """Cubic Taylor coefficient fixed by the field equation given the slope a."""
    return a * (1 - a * a) * (2 * L * L + a * a) / (15 * (L * L + 2 * a * a))


def endpoint_series(
    slope: float,
    L: float | Radius,
    Q: int | ChargeSector = 1,
    end: Literal["left", "right"] = "left",
) -> EndpointSeries:
    L = as_radius(L)
    Q = as_charge(Q)
    if end not in ("left", "right"):
        raise ValueError(f"end must be 'left' or 'right', got {end!r}")
    if Q >= 1 and slope <= 0:
        raise ValueError(f"slope must be positive in sector Q={Q}, got {slope!r}")
    return EndpointSeries(a=float(slope), b=cubic_coefficient(slope, L), end=end, charge=Q)


# ---------------------------------------------------------------------------
# one-sided shots


@dataclass
class ShootingResult:
    profile: Profile | None
    slope0: float
    residual_norm: float
    boundary_miss: float
    iterations: int
    L: float
    charge: int
    right_slope: float | None = None
    diverged_at: float | None = None
    energy: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None


def _window_event(Q: int):
    lo = (min(Q, 0) - 1) * math.pi
    hi = (max(Q, 0) + 1) * math.pi

    def leave(psi, y, L):
        return (y[0] - lo) * (hi - y[0])

    leave.terminal = True
    return leave


def _integrate(L, Q, slope, stop, eps, rtol, atol, dense=False):
    series = endpoint_series(slope, L, Q)
    y0 = [float(series(eps)), float(series.derivative(eps))]
    return solve_ivp(
        _rhs,
        (eps, stop),
        y0,
        args=(L,),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=_window_event(Q),
        dense_output=dense,
    )


def _extrapolated_end(F: float, Fp: float, u0: float, L: float, Q: int) -> tuple[float, float]:
    """F(pi) and F'(pi) implied by the regular right-pole series through (F, F') at pi - u0."""
    c = Fp
    for _ in range(4):
        c = Fp - 3 * cubic_coefficient(c, L) * u0**2
    return F + c * u0 + cubic_coefficient(c, L) * u0**3, c


def shoot(
    L: float | Radius,
    Q: int | ChargeSector,
    slope0: float,
    grid_size: int = DEFAULT_GRID,
    *,
    eps: float = EPS,
    rtol: float = RTOL,
    atol: float = ATOL,
    match_distance: float = MATCH_DISTANCE,
    boundary_tol: float = SHOOT_BOUNDARY_TOL,
) -> ShootingResult:
    """Integrate from the left pole with F'(0) = slope0 and report the miss at pi.

    The right pole is singular: integration noise excites a mode growing
    like (pi - psi)^-2, so the trajectory is stopped at pi - match_distance
    and F(pi) is read off the regular right-pole series through the final
    state.  A trajectory leaving the window (-pi, (Q+1) pi) is stopped there
    and reported through ``diverged_at``; its ``boundary_miss`` still carries
    the sign of the miss.  A profile is attached when the miss is within
    ``boundary_tol``.
    """
    L = as_radius(L)
    Q = as_charge(Q)
    stop = math.pi - match_distance
    sol = _integrate(L, Q, slope0, stop, eps, rtol, atol, dense=True)
    diverged_at = float(sol.t[-1]) if sol.status == 1 or not sol.success else None
    if diverged_at is None:
        F_end, c = _extrapolated_end(float(sol.y[0, -1]), float(sol.y[1, -1]), match_distance, L, Q)
    else:
        F_end, c = float(sol.y[0, -1]), None
    miss = F_end - Q * math.pi
    profile = None
    res = math.inf
    if diverged_at is None and abs(miss) <= boundary_tol:
        psi = uniform_grid(grid_size)
        tail = EndpointSeries(a=c, b=cubic_coefficient(c, L), end="right", charge=Q)
        inner = psi[1:-1]
        left = np.clip(inner, eps, stop)
        F = np.where(inner <= stop, sol.sol(left)[0], tail(inner))
        dF = np.where(inner <= stop, sol.sol(left)[1], tail.derivative(inner))
        F = np.concatenate([[0.0], F, [Q * math.pi]])
        dF = np.concatenate([[slope0], dF, [c]])
        profile = Profile(psi=psi, F=F, charge=Q, dF=dF)
        res = residual_norm(profile, L)
    return ShootingResult(
        profile=profile,
        slope0=float(slope0),
        residual_norm=res,
        boundary_miss=miss,
        iterations=int(sol.nfev),
        L=L,
        charge=Q,
        right_slope=c,
        diverged_at=diverged_at,
    )


MAX_STEPS = 200_000


def _end_state(slope, L, Q, stop, eps, rtol, atol):
    series = endpoint_series(slope, L, Q)
    lo = (min(Q, 0) - 1) * math.pi
    hi = (max(Q, 0) + 1) * math.pi
    return _rk.shoot_end(
        L, float(series(eps)), float(series.derivative(eps)), eps, stop,
        rtol, atol, lo, hi, MAX_STEPS,
    )


def _miss(slope, L, Q, eps, rtol, atol) -> float:
    """F(pi - eps) - Q*pi of a one-sided shot (value at exit if it left the window)."""
    return float(_end_state(slope, L, Q, math.pi - eps, eps, rtol, atol)[1]) - Q * math.pi


# ---------------------------------------------------------------------------
# two-sided polish


@dataclass(frozen=True)
class _Halves:
    a: float
    c: float
    left: object
    right: object
    Q: int

    def __call__(self, psi: FloatArray, nu: int = 0) -> FloatArray:
        psi = np.asarray(psi, dtype=float)
        out = np.empty_like(psi)
        mid = math.pi / 2
        lm = psi <= mid
        out[lm] = self.left(psi[lm])[nu]
        r = self.right(math.pi - psi[~lm])[nu]
        out[~lm] = self.Q * math.pi - r if nu == 0 else r
        return out


def _half(L, Q, slope, eps, rtol, atol):
    sol = _integrate(L, Q, slope, math.pi / 2, eps, rtol, atol, dense=True)
    if sol.status != 0:
        return None
    return sol


def _mismatch(v, L, Q, eps, rtol, atol):
    a, c = v
    if Q >= 1 and (a <= 0 or c <= 0):
        return [1e3, 1e3]
    _, Fl, Fpl, sl, _ = _end_state(a, L, Q, math.pi / 2, eps, rtol, atol)
    _, Fr, Fpr, sr, _ = _end_state(c, L, Q, math.pi / 2, eps, rtol, atol)
    if sl != _rk.OK or sr != _rk.OK:
        return [1e3, 1e3]
    return [Fl - (Q * math.pi - Fr), Fpl - Fpr]


def match_two_sided(
    L: float,
    Q: int,
    a0: float,
    c0: float,
    *,
    eps: float = EPS,
    rtol: float = POLISH_RTOL,
    atol: float = POLISH_ATOL,
) -> tuple[_Halves, int, float]:
    """Adjust both pole slopes until the half-trajectories meet at pi/2.

    Returns the dense half-trajectories, the number of matching evaluations
    and the remaining value/derivative gap at pi/2.
    """
    sol = root(
        _mismatch,
        [a0, c0],
        args=(L, Q, eps, rtol, atol),
        method="hybr",
        options={"xtol": 1e-15},
    )
    a, c = (float(v) for v in sol.x)
    if Q >= 1 and (a <= 0 or c <= 0):
        raise RuntimeError(f"two-sided shooting left the admissible slopes at L={L}: ({a}, {c})")
    left = _half(L, Q, a, eps, rtol, atol)
    right = _half(L, Q, c, eps, rtol, atol)
    if left is None or right is None:
        raise RuntimeError(f"two-sided shooting diverged at L={L}, slopes ({a}, {c})")
    gap = max(
        abs(left.y[0, -1] - (Q * math.pi - right.y[0, -1])),
        abs(left.y[1, -1] - right.y[1, -1]),
    )
    return _Halves(a, c, left.sol, right.sol, Q), int(sol.nfev), float(gap)


def sine_coefficients(
    f, Q: int, n: int = SPECTRAL_SIZE, chop: float | None = None, n_max: int = MAX_SPECTRAL_SIZE
) -> FloatArray:
    """Sine coefficients of f(psi) - Q*psi, truncated at the noise level.

    Without an explicit ``chop`` the threshold is the larger of CHOP and
    NOISE_FACTOR times the median coefficient of the upper half of the
    spectrum, relative to the largest coefficient when that exceeds one.  The sampling is
    doubled until the retained coefficients end before half the Nyquist
    index, so the truncated series is free of aliasing.
    """
    while True:
        psi = np.arange(1, n) * (math.pi / n)
        coeffs = dst(f(psi) - Q * psi, type=1) / n
        level = chop
        if level is None:
            scale = max(1.0, float(np.max(np.abs(coeffs))))
            plateau = NOISE_FACTOR * float(np.median(np.abs(coeffs[n // 2 :])))
            level = max(CHOP * scale, plateau)
        big = np.nonzero(np.abs(coeffs) > level)[0]
        K = int(big[-1]) + 1 if big.size else 0
        if K <= n // 2 or n >= n_max:
            if K > n // 2:
                log.warning("sine series not resolved at %d samples", n)
            return coeffs[:K].copy()
        n *= 2


def residual_norm(p: Profile, L: float, points: FloatArray | None = None) -> float:
    """max |field-equation residual| of p over its interior grid nodes."""
    x = p.psi[1:-1] if points is None else np.asarray(points, dtype=float)
    return float(
        np.max(np.abs(el_residual(p.evaluate(x), p.evaluate(x, 1), p.evaluate(x, 2), x, L)))
    )


def _assemble(L, Q, halves: _Halves, grid_size: int) -> Profile:
    modes = sine_coefficients(halves, Q)
    psi = uniform_grid(grid_size)
    k = np.arange(1, modes.size + 1)
    F = Q * psi + np.sin(np.outer(psi, k)) @ modes
    dF = Q + np.cos(np.outer(psi, k)) @ (k * modes)
    F[0], F[-1] = 0.0, Q * math.pi
    return Profile(psi=psi, F=F, charge=Q, dF=dF, modes=modes)


def polish(
    L: float | Radius,
    Q: int | ChargeSector,
    a0: float,
    c0: float,
    grid_size: int = DEFAULT_GRID,
    *,
    eps: float = EPS,
    rtol: float = POLISH_RTOL,
    atol: float = POLISH_ATOL,
) -> ShootingResult:
    L = as_radius(L)
    Q = as_charge(Q)
    halves, nfev, gap = match_two_sided(L, Q, a0, c0, eps=eps, rtol=rtol, atol=atol)
    p = _assemble(L, Q, halves, grid_size)
    return ShootingResult(
        profile=p,
        slope0=halves.a,
        residual_norm=residual_norm(p, L),
        boundary_miss=gap,
        iterations=nfev,
        L=L,
        charge=topological_charge(p),
        right_slope=halves.c,
        energy=energy(p, L).total,
        meta={"matching_gap": gap, "n_modes": int(p.modes.size)},
    )


def _right_slope_guess(L, Q, a, eps, rtol, atol, u0=MATCH_DISTANCE) -> float:
    """Estimate F'(pi) from a one-sided shot stopped at pi - u0."""
    _, F, Fp, _, _ = _end_state(a, L, Q, math.pi - u0, eps, rtol, atol)
    return _extrapolated_end(float(F), float(Fp), u0, L, Q)[1]


# ---------------------------------------------------------------------------
# boundary-value problem


def _mesh_misses(L, Q, slopes, eps, rtol, atol, workers) -> list[float]:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_miss, float(s), L, Q, eps, rtol, atol) for s in slopes]
            return [f.result() for f in futs]
    return [_miss(float(s), L, Q, eps, rtol, atol) for s in slopes]


def solve_bvp(
    L: float | Radius,
    Q: int | ChargeSector = 1,
    tol: float = DEFAULT_TOL,
    *,
    slopes: ArrayLike | None = None,
    grid_size: int = DEFAULT_GRID,
    eps: float = EPS,
    rtol: float = RTOL,
    atol: float = ATOL,
    workers: int = 1,
) -> list[ShootingResult]:
    """All solutions with F(0)=0, F(pi)=Q*pi whose initial slope lies on the mesh.

    Results are ordered by initial slope.  Bracketed roots whose polished
    profile fails the residual tolerance are logged and dropped.
    """
    L = as_radius(L)
    Q = as_charge(Q)
    if not tol > 0:
        raise ValueError("tol must be positive")
    mesh = default_slope_mesh(Q) if slopes is None else np.sort(np.asarray(slopes, dtype=float))
    misses = _mesh_misses(L, Q, mesh, eps, rtol, atol, workers)

    candidates: list[float] = []
    found: list[ShootingResult] = []
    for i, (s, m) in enumerate(zip(mesh, misses)):
        if Q == 1 and s == 1.0:
            # the identity is exact; its shot only misses by rounding, and
            # brackets touching it would just rediscover it (slowly, at L = sqrt2)
            ident = identity_result(L, grid_size)
            if ident.residual_norm <= tol:
                found.append(ident)
        elif m == 0.0:
            candidates.append(float(s))
        elif i + 1 < len(mesh) and m * misses[i + 1] < 0:
            if Q == 1 and mesh[i + 1] == 1.0:
                continue
            a = brentq(
                _miss, mesh[i], mesh[i + 1], args=(L, Q, eps, rtol, atol),
                xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200,
            )
            candidates.append(float(a))

    for a in candidates:
        try:
            if Q == 0 and a == 0.0:
                c0 = 0.0
            else:
                c0 = _right_slope_guess(L, Q, a, eps, rtol, atol)
            res = polish(
                L, Q, a, c0, grid_size, eps=eps,
                rtol=min(rtol, POLISH_RTOL), atol=min(atol, POLISH_ATOL),
            )
        except (RuntimeError, ValueError) as exc:
            log.info("L=%g: bracket at slope %.12g rejected (%s)", L, a, exc)
            continue
        if res.residual_norm > tol or res.charge != Q or res.meta["matching_gap"] > 1e-8:
            log.info(
                "L=%g: slope %.12g rejected, residual %.3g, charge %d",
                L, a, res.residual_norm, res.charge,
            )
            continue
        if any(abs(res.slope0 - r.slope0) <= 10 * tol for r in found):
            continue
        found.append(res)

    if Q == 1:
        # The reflection psi -> pi - psi swaps the two pole slopes; partners
        # whose left slope falls outside the mesh are recovered from it.
        for res in list(found):
            c = res.right_slope
            if res.slope0 == 1.0 or any(abs(c - r.slope0) <= 10 * tol for r in found):
                continue
            try:
                twin = polish(
                    L, Q, c, res.slope0, grid_size, eps=eps,
                    rtol=min(rtol, POLISH_RTOL), atol=min(atol, POLISH_ATOL),
                )
            except (RuntimeError, ValueError) as exc:
                log.info("L=%g: reflected partner of slope %.12g failed (%s)", L, res.slope0, exc)
                continue
            if twin.residual_norm <= tol and twin.meta["matching_gap"] <= 1e-8:
                twin.meta["source"] = "reflection"
                found.append(twin)
    found.sort(key=lambda r: r.slope0)
    return found


def identity_result(L: float | Radius, grid_size: int = DEFAULT_GRID) -> ShootingResult:
    """The exact identity solution wrapped as a solver result."""
    L = as_radius(L)
    p = identity_profile(grid_size)
    return ShootingResult(
        profile=p,
        slope0=1.0,
        residual_norm=residual_norm(p, L),
        boundary_miss=0.0,
        iterations=0,
        L=L,
        charge=1,
        right_slope=1.0,
        energy=energy(p, L).total,
    )
