"""Compiled Dormand-Prince 5(4) integrator for hedgehog shots.

Only the end state is returned; trajectories that need dense output go
through scipy instead.
"""

from __future__ import annotations

import math

import numba
import numpy as np

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus fourth order weights
E1 = 71 / 57600
E3 = -71 / 16695
E4 = 71 / 1920
E5 = -17253 / 339200
E6 = 22 / 525
E7 = -1 / 40

OK, EXITED, STALLED = 0, 1, 2


@numba.njit(cache=True)
def _f(psi, F, Fp, L):
    sp = math.sin(psi)
    sF = math.sin(F)
    s = sF / sp
    sin2F = math.sin(2 * F)
    num = (L + s * s / L) * sin2F - L * math.sin(2 * psi) * Fp - Fp * Fp * sin2F / L
    den = L * sp * sp + (2 / L) * sF * sF
    return num / den


@numba.njit(cache=True)
def shoot_end(L, F0, Fp0, t0, t1, rtol, atol, lo, hi, max_steps):
    """Integrate F'' = f(psi, F, F') from t0 to t1.

    Returns (t, F, F', status, steps); status is EXITED when F leaves
    (lo, hi) and STALLED when the step size collapses or max_steps is hit.
    """
    t = t0
    y0 = F0
    y1 = Fp0
    h = min(1e-2 * t0 + 1e-8, t1 - t0)
    k1a = y1
    k1b = _f(t, y0, y1, L)
    steps = 0
    while t < t1:
        if steps >= max_steps:
            return t, y0, y1, STALLED, steps
        if t + h > t1:
            h = t1 - t
        # stages
        u0 = y0 + h * A21 * k1a
        u1 = y1 + h * A21 * k1b
        k2a, k2b = u1, _f(t + C2 * h, u0, u1, L)
        u0 = y0 + h * (A31 * k1a + A32 * k2a)
        u1 = y1 + h * (A31 * k1b + A32 * k2b)
        k3a, k3b = u1, _f(t + C3 * h, u0, u1, L)
        u0 = y0 + h * (A41 * k1a + A42 * k2a + A43 * k3a)
        u1 = y1 + h * (A41 * k1b + A42 * k2b + A43 * k3b)
        k4a, k4b = u1, _f(t + C4 * h, u0, u1, L)
        u0 = y0 + h * (A51 * k1a + A52 * k2a + A53 * k3a + A54 * k4a)
        u1 = y1 + h * (A51 * k1b + A52 * k2b + A53 * k3b + A54 * k4b)
        k5a, k5b = u1, _f(t + C5 * h, u0, u1, L)
        u0 = y0 + h * (A61 * k1a + A62 * k2a + A63 * k3a + A64 * k4a + A65 * k5a)
        u1 = y1 + h * (A61 * k1b + A62 * k2b + A63 * k3b + A64 * k4b + A65 * k5b)
        k6a, k6b = u1, _f(t + h, u0, u1, L)
        n0 = y0 + h * (B1 * k1a + B3 * k3a + B4 * k4a + B5 * k5a + B6 * k6a)
        n1 = y1 + h * (B1 * k1b + B3 * k3b + B4 * k4b + B5 * k5b + B6 * k6b)
        k7a, k7b = n1, _f(t + h, n0, n1, L)
        e0 = h * (E1 * k1a + E3 * k3a + E4 * k4a + E5 * k5a + E6 * k6a + E7 * k7a)
        e1 = h * (E1 * k1b + E3 * k3b + E4 * k4b + E5 * k5b + E6 * k6b + E7 * k7b)
        s0 = atol + rtol * max(abs(y0), abs(n0))
        s1 = atol + rtol * max(abs(y1), abs(n1))
        err = math.sqrt(0.5 * ((e0 / s0) ** 2 + (e1 / s1) ** 2))
        steps += 1
        if not math.isfinite(err):
            h *= 0.2
            if h < 1e-15 * max(1.0, abs(t)):
                return t, y0, y1, STALLED, steps
            continue
        if err <= 1.0:
            t += h
            y0, y1 = n0, n1
            k1a, k1b = k7a, k7b  # first-same-as-last
            if not (lo < y0 < hi):
                return t, y0, y1, EXITED, steps
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < 1e-15 * max(1.0, abs(t)):
                return t, y0, y1, STALLED, steps
    return t, y0, y1, OK, steps


def warmup() -> None:
    shoot_end(1.0, 1e-6, 1.0, 1e-6, 0.1, 1e-8, 1e-10, -np.pi, 2 * np.pi, 1000)
