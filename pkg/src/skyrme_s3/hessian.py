"""Second variation of the hedgehog energy and its spectrum.

Perturbations xi vanish at both poles and are expanded in sin(k psi),
k = 1..K.  The quadratic form (stiffness) and the g scalar product (mass) are
assembled by quadrature for an arbitrary background profile, and the
symmetric-definite pencil A v = lambda B v is solved densely.  About the
identity map every eigenfunction is a finite sine sum, so the Galerkin
eigenvalues are exact there up to rounding.

A second-order finite-difference discretisation of the same quadratic form
is available as an independent cross-check (``method="fd"``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy.fft import dst
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal

from .model import (
    FloatArray,
    Profile,
    QuadratureRule,
    Radius,
    as_radius,
    default_rule,
    identity_profile,
    inner_g,
    sin_ratio,
    sine_series_eval,
)

FD_NODES = 4000


@dataclass(frozen=True)
class ModeBasis:
    """The admissible perturbations sin(k psi), k = 1..K."""

    K: int

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("basis needs at least one mode")

    @property
    def k(self) -> FloatArray:
        return np.arange(1, self.K + 1, dtype=float)

    def evaluate(self, coeffs: ArrayLike, psi: ArrayLike, nu: int = 0) -> FloatArray:
        c = np.asarray(coeffs, dtype=float)
        if c.size > self.K:
            raise ValueError(f"{c.size} coefficients exceed basis size {self.K}")
        return sine_series_eval(c, psi, nu)

    def tables(self, psi: FloatArray) -> tuple[FloatArray, FloatArray]:
        """sin(k psi) and its derivative at the given points, shape (N, K)."""
        arg = np.outer(psi, self.k)
        return np.sin(arg), np.cos(arg) * self.k


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: FloatArray
    eigenvectors: FloatArray  # columns, in the sine basis
    basis: ModeBasis
    L: float
    about: str
    method: str = "galerkin"

    def mode(self, n: int, psi: ArrayLike) -> FloatArray:
        return self.basis.evaluate(self.eigenvectors[:, n], psi)

    @property
    def lambda0(self) -> float:
        return float(self.eigenvalues[0])


# ---------------------------------------------------------------------------
# the quadratic form


def _coefficients(F, dF, psi, L):
    """Pieces of the second-variation integrand, 4*pi*sin^2 measure included.

    density = P xi'^2 + C xi xi' + V xi^2
    """
    s = sin_ratio(F, dF, psi)
    sF2 = np.sin(F) ** 2
    cos2F = np.cos(2 * F)
    P = L * np.sin(psi) ** 2 + (2 / L) * sF2
    C = (4 / L) * np.sin(2 * F) * dF
    V = (2 / L) * (1 + 2 * cos2F) * s**2 + 2 * cos2F * (L + dF**2 / L)
    return 4 * math.pi * P, 4 * math.pi * C, 4 * math.pi * V


def _xi_values(xi, dxi, psi):
    if callable(xi):
        v = np.asarray(xi(psi), dtype=float)
        if dxi is None:
            h = 1e-4
            d = (-xi(psi + 2 * h) + 8 * xi(psi + h) - 8 * xi(psi - h) + xi(psi - 2 * h)) / (12 * h)
        else:
            d = dxi(psi)
        ends = np.asarray(xi(np.array([0.0, math.pi])), dtype=float)
        if np.max(np.abs(ends)) > 1e-10:
            raise ValueError(f"perturbation must vanish at the poles, got {ends}")
        return v, np.asarray(d, dtype=float)
    c = np.asarray(xi, dtype=float)
    return sine_series_eval(c, psi), sine_series_eval(c, psi, 1)


def second_variation(
    p: Profile,
    xi: ArrayLike | Callable[[FloatArray], ArrayLike],
    L: float | Radius,
    q: QuadratureRule | None = None,
    dxi: Callable[[FloatArray], ArrayLike] | None = None,
) -> float:
    """delta^2 U[F](xi, xi) about the profile p.

    ``xi`` is either a vector of sine coefficients or a callable; for a
    callable the derivative ``dxi`` may be supplied, otherwise it is taken
    by a fourth-order central difference.
    """
    L = as_radius(L)
    q = default_rule() if q is None else q
    x = q.nodes
    P, C, V = _coefficients(p.evaluate(x), p.evaluate(x, 1), x, L)
    v, d = _xi_values(xi, dxi, x)
    return q.integrate(P * d * d + C * v * d + V * v * v)


def assemble(
    p: Profile, L: float | Radius, K: int, q: QuadratureRule | None = None
) -> tuple[FloatArray, FloatArray]:
    """Stiffness and mass matrices of the second variation in the sine basis."""
    L = as_radius(L)
    q = default_rule() if q is None else q
    x, w = q.nodes, q.weights
    S, D = ModeBasis(K).tables(x)
    P, C, V = _coefficients(p.evaluate(x), p.evaluate(x, 1), x, L)
    cross = (S * (w * C / 2)[:, None]).T @ D
    A = (D * (w * P)[:, None]).T @ D + cross + cross.T + (S * (w * V)[:, None]).T @ S
    B = (S * (4 * math.pi * w * q.sin2)[:, None]).T @ S
    return 0.5 * (A + A.T), 0.5 * (B + B.T)


def mass_matrix_closed_form(K: int) -> FloatArray:
    """g(sin k psi, sin m psi): pi^2 on the diagonal (3 pi^2/2 for k = 1),
    -pi^2/2 for |k - m| = 2, zero otherwise."""
    B = np.zeros((K, K))
    idx = np.arange(K)
    B[idx, idx] = math.pi**2
    B[0, 0] = 1.5 * math.pi**2
    off = np.arange(K - 2)
    B[off, off + 2] = B[off + 2, off] = -0.5 * math.pi**2
    return B


# ---------------------------------------------------------------------------
# closed forms about the identity


def analytic_lambda(n: int, L: float | Radius) -> float:
    """Closed-form eigenvalues of the second variation about the identity."""
    if n < 0:
        raise ValueError("mode index must be non-negative")
    L = as_radius(L)
    m = n * n + 4 * n
    return (2 / L) * (m + 1) + L * (m - 1)


def analytic_mode(n: int) -> FloatArray:
    """Unnormalised identity eigenfunction n as sine coefficients.

    Even n = 2j: sum_{k=0}^{j} (2k+1) sin((2k+1) psi);
    odd n = 2j+1: sum_{k=1}^{j+1} 2k sin(2k psi).
    """
    if n < 0:
        raise ValueError("mode index must be non-negative")
    c = np.zeros(n + 1)
    j = n // 2
    if n % 2 == 0:
        idx = 2 * np.arange(j + 1) + 1
    else:
        idx = 2 * np.arange(1, j + 2)
    c[idx - 1] = idx
    return c


def sl_weight(L: float | Radius, psi: ArrayLike) -> FloatArray:
    L = as_radius(L)
    return L / (2 + L * L) * np.sin(np.asarray(psi, dtype=float)) ** 2


def sl_operator_apply(xi: ArrayLike, L: float | Radius, psi: ArrayLike) -> FloatArray:
    """-(sin^2 xi')' + 2(1 - 2(L^2+1)/(L^2+2) sin^2) xi for sine coefficients xi."""
    L = as_radius(L)
    psi = np.asarray(psi, dtype=float)
    c = np.asarray(xi, dtype=float)
    v = sine_series_eval(c, psi)
    d1 = sine_series_eval(c, psi, 1)
    d2 = sine_series_eval(c, psi, 2)
    s2 = np.sin(psi) ** 2
    return -(np.sin(2 * psi) * d1 + s2 * d2) + 2 * (1 - 2 * (L * L + 1) / (L * L + 2) * s2) * v


# ---------------------------------------------------------------------------
# eigen-solvers


def _order(vals: FloatArray, vecs: FloatArray) -> tuple[FloatArray, FloatArray]:
    dominant = np.argmax(np.abs(vecs), axis=0)
    perm = np.lexsort((dominant, vals))
    vals, vecs = vals[perm], vecs[:, perm]
    # deterministic sign: positive slope at psi = 0
    slope = (np.arange(1, vecs.shape[0] + 1)[:, None] * vecs).sum(axis=0)
    sign = np.where(slope < 0, -1.0, 1.0)
    return vals, vecs * sign


def spectrum(
    about: Profile | None,
    L: float | Radius,
    K: int = 64,
    n_modes: int = 8,
    *,
    q: QuadratureRule | None = None,
    method: Literal["galerkin", "fd"] = "galerkin",
    label: str | None = None,
    fd_nodes: int = FD_NODES,
) -> SpectrumResult:
    """Lowest ``n_modes`` eigenpairs of the second variation about ``about``.

    ``about=None`` means the identity map.  Eigenvectors are returned as sine
    coefficients, g-orthonormal.
    """
    L = as_radius(L)
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    if K < n_modes + 8:
        raise ValueError(f"K={K} too small for {n_modes} modes (need K >= n_modes + 8)")
    if about is None:
        about = identity_profile(3)
        label = label or "identity"
    label = label or "profile"
    if method == "galerkin":
        A, B = assemble(about, L, K, q)
        try:
            vals, vecs = eigh(A, B, subset_by_index=[0, n_modes - 1])
        except LinAlgError as exc:
            raise RuntimeError("mass matrix is not positive definite") from exc
    elif method == "fd":
        vals, vecs = _fd_spectrum(about, L, n_modes, K, fd_nodes)
    else:
        raise ValueError(f"unknown method {method!r}")
    vals, vecs = _order(vals, vecs)
    return SpectrumResult(vals, vecs, ModeBasis(K), L, label, method)


def _fd_spectrum(p: Profile, L: float, n_modes: int, K: int, N: int):
    """Midpoint-rule discretisation of the quadratic form on a uniform grid.

    Values at the interior nodes psi_j = j*pi/N are the unknowns; the mass is
    lumped, which leaves a symmetric tridiagonal standard problem.
    """
    h = math.pi / N
    nodes = np.arange(1, N) * h
    mid = (np.arange(N) + 0.5) * h
    P, C, V = _coefficients(p.evaluate(mid), p.evaluate(mid, 1), mid, L)
    # cell j couples u_j and u_{j+1} (u_0 = u_N = 0):
    # P (du/h)^2 + C ubar du/h + V ubar^2, ubar = (u_j + u_{j+1})/2
    a_diag = P / h**2 - C / (2 * h) + V / 4  # coefficient of u_j^2 from cell j
    b_diag = P / h**2 + C / (2 * h) + V / 4  # coefficient of u_{j+1}^2
    off = -P / h**2 + V / 4  # coefficient of u_j u_{j+1} (each of the two)
    diag = h * (a_diag[1:] + b_diag[:-1])
    offd = h * off[1:-1]
    mass = 4 * math.pi * h * np.sin(nodes) ** 2
    r = 1 / np.sqrt(mass)
    vals, y = eigh_tridiagonal(
        diag * r * r, offd * r[:-1] * r[1:], select="i", select_range=(0, n_modes - 1)
    )
    u = y * r[:, None]
    coeffs = dst(u, type=1, axis=0) / N
    coeffs = coeffs[:K]
    # renormalise in g after truncation
    B = mass_matrix_closed_form(K)
    norms = np.sqrt(np.einsum("ki,kl,li->i", coeffs, B, coeffs))
    return vals, coeffs / norms


def oscillation_count(values: ArrayLike) -> int:
    v = np.asarray(values, dtype=float)
    v = v[v != 0]
    return int(np.count_nonzero(np.sign(v[1:]) != np.sign(v[:-1])))


def g_gram(result: SpectrumResult) -> FloatArray:
    V = result.eigenvectors
    return V.T @ mass_matrix_closed_form(result.basis.K) @ V


def identity_lambda0(L: float | Radius, K: int = 16, q: QuadratureRule | None = None) -> float:
    """Lowest numerical eigenvalue about the identity."""
    return spectrum(None, L, K=K, n_modes=1, q=q).lambda0


def rayleigh_quotient(p: Profile, coeffs: ArrayLike, L: float | Radius, q: QuadratureRule | None = None) -> float:
    q = default_rule() if q is None else q
    c = np.asarray(coeffs, dtype=float)
    u = sine_series_eval(c, q.nodes)
    return second_variation(p, c, L, q) / inner_g(u, u, q)


def write_spectrum_csv(result: SpectrumResult, path: str | Path) -> None:
    identity = result.about == "identity"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "lambda", "analytic_lambda", "abs_error"])
        for n, lam in enumerate(result.eigenvalues):
            if identity:
                ref = analytic_lambda(n, result.L)
                w.writerow([n, f"{lam:.15g}", f"{ref:.15g}", f"{abs(lam - ref):.15g}"])
            else:
                w.writerow([n, f"{lam:.15g}", "", ""])


def write_eigenvectors_csv(result: SpectrumResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"xi_{n}" for n in range(result.eigenvectors.shape[1])])
        for k, row in enumerate(result.eigenvectors, start=1):
            w.writerow([k] + [f"{v:.15g}" for v in row])
