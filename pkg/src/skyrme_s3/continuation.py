"""Radius sweeps over the Q = 1 solutions and the pitchfork at L = sqrt(2)."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from . import elsolver
from .elsolver import ShootingResult, solve_bvp
from .hessian import analytic_lambda, identity_lambda0, spectrum
from .model import identity_energy
from .perturbation import measure_amplitude

Branch = Literal["identity", "skyrmion_plus", "skyrmion_minus", "other"]
BRANCH_ORDER = {"identity": 0, "skyrmion_plus": 1, "skyrmion_minus": 2, "other": 3}
SQRT2 = math.sqrt(2.0)
NEAR_CRITICAL = tuple(SQRT2 + np.geomspace(0.002, 0.05, 8))
IDENTITY_SLOPE_TOL = 1e-6


@dataclass(frozen=True)
class BranchPoint:
    L: float
    branch: Branch
    slope0: float
    energy: float
    lambda0: float
    x_meas: float


@dataclass
class BranchTable:
    points: list[BranchPoint]
    metadata: dict = field(default_factory=dict)

    def branch(self, name: Branch) -> list[BranchPoint]:
        return [p for p in self.points if p.branch == name]

    def radii(self) -> list[float]:
        return sorted({p.L for p in self.points})

    def at(self, L: float, name: Branch) -> BranchPoint | None:
        for p in self.points:
            if p.L == L and p.branch == name:
                return p
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["L", "branch", "slope0", "energy", "lambda0", "x_meas"])
        for p in self.points:
            w.writerow(
                [f"{p.L:.15g}", p.branch, f"{p.slope0:.15g}", f"{p.energy:.15g}",
                 f"{p.lambda0:.15g}", f"{p.x_meas:.15g}"]
            )
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())

    def to_records(self) -> list[dict]:
        return [asdict(p) for p in self.points]


@dataclass
class _Sample:
    L: float
    solutions: list[tuple[ShootingResult, float, float]]  # result, lambda0, x_meas
    error: str | None = None


def _solve_sample(L: float, tol: float, K: int, grid_size: int) -> _Sample:
    try:
        sols = solve_bvp(L, 1, tol, grid_size=grid_size)
    except Exception as exc:  # recorded, not fatal
        return _Sample(L, [], f"{type(exc).__name__}: {exc}")
    out = []
    for r in sols:
        lam = spectrum(r.profile, L, K=K, n_modes=1).lambda0
        out.append((r, lam, measure_amplitude(r.profile)))
    return _Sample(L, out)


def sweep_radii(L_min: float, L_max: float, steps: int, refine: bool = True) -> list[float]:
    radii = list(np.linspace(L_min, L_max, steps))
    if refine:
        radii += [L for L in NEAR_CRITICAL if L_min <= L <= L_max]
    return sorted({float(L) for L in radii})


def _classify(samples: list[_Sample]) -> tuple[list[BranchPoint], list[str]]:
    """Label solutions by nearest-slope continuation from the previous radius.

    A branch is seeded the first time it appears, from the sign of the
    amplitude; afterwards each skyrmion is matched to the nearest previous
    slope.  Disagreements with the amplitude sign are reported.
    """
    points: list[BranchPoint] = []
    notes: list[str] = []
    last: dict[str, float] = {}
    for s in samples:
        skyrmions = []
        for r, lam, x in s.solutions:
            if abs(r.slope0 - 1) < IDENTITY_SLOPE_TOL and abs(x) < 1e-8:
                points.append(BranchPoint(s.L, "identity", r.slope0, r.energy, lam, x))
            else:
                skyrmions.append((r, lam, x))
        labels: dict[int, str] = {}
        if len(skyrmions) == 2 and len(last) == 2:
            r0, r1 = skyrmions[0][0], skyrmions[1][0]
            keep = abs(r0.slope0 - last["skyrmion_plus"]) + abs(r1.slope0 - last["skyrmion_minus"])
            swap = abs(r0.slope0 - last["skyrmion_minus"]) + abs(r1.slope0 - last["skyrmion_plus"])
            labels = {0: "skyrmion_plus", 1: "skyrmion_minus"} if keep <= swap else {
                0: "skyrmion_minus", 1: "skyrmion_plus"}
        elif len(skyrmions) <= 2:
            for i, (_, _, x) in enumerate(skyrmions):
                labels[i] = "skyrmion_plus" if x > 0 else "skyrmion_minus"
            if len(set(labels.values())) < len(labels):
                labels = {i: "other" for i in labels}
        else:
            labels = {i: "other" for i in range(len(skyrmions))}
            notes.append(f"L={s.L:.15g}: {len(skyrmions)} non-identity solutions")
        for i, (r, lam, x) in enumerate(skyrmions):
            name = labels[i]
            expected = "skyrmion_plus" if x > 0 else "skyrmion_minus"
            if name != "other" and name != expected:
                notes.append(f"L={s.L:.15g}: continuity label {name} disagrees with amplitude sign")
            points.append(BranchPoint(s.L, name, r.slope0, r.energy, lam, x))
            if name != "other":
                last[name] = r.slope0
        if not skyrmions:
            last.clear()
    points.sort(key=lambda p: (p.L, BRANCH_ORDER[p.branch]))
    return points, notes


def sweep(
    L_min: float,
    L_max: float,
    steps: int,
    *,
    tol: float = elsolver.DEFAULT_TOL,
    K: int = 64,
    grid_size: int = elsolver.DEFAULT_GRID,
    refine: bool = True,
    workers: int = 1,
    radii: list[float] | None = None,
) -> BranchTable:
    """Solve, analyse and classify the Q = 1 solutions along a radius sweep."""
    if not (0 < L_min < L_max):
        raise ValueError("need 0 < L_min < L_max")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    radii = sweep_radii(L_min, L_max, steps, refine) if radii is None else sorted(radii)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            samples = list(ex.map(_solve_sample, radii, [tol] * len(radii),
                                  [K] * len(radii), [grid_size] * len(radii)))
    else:
        samples = [_solve_sample(L, tol, K, grid_size) for L in radii]
    points, notes = _classify(samples)
    metadata = {
        "L_min": L_min,
        "L_max": L_max,
        "steps": steps,
        "radii": radii,
        "refine_near_critical": refine,
        "tol": tol,
        "K": K,
        "grid_size": grid_size,
        "slope_mesh": {"n": 64, "lo": 0.05, "hi": 50.0,
                       "identity_offsets": list(elsolver.IDENTITY_OFFSETS)},
        "integrator": {"method": "DOP853", "rtol": elsolver.RTOL, "atol": elsolver.ATOL,
                       "polish_rtol": elsolver.POLISH_RTOL, "polish_atol": elsolver.POLISH_ATOL,
                       "eps": elsolver.EPS},
        "failures": {f"{s.L:.15g}": s.error for s in samples if s.error},
        "notes": notes,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    return BranchTable(points, metadata)


# ---------------------------------------------------------------------------
# critical radius


@dataclass(frozen=True)
class CriticalRadius:
    numerical: float
    analytic: float
    iterations: int


def bisect_sign_change(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, int]:
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo, 0
    if fhi == 0:
        return hi, 0
    if flo * fhi > 0:
        raise ValueError(f"no sign change of lambda_0 on [{lo}, {hi}]")
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        it += 1
        if fm == 0:
            return mid, it
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi), it


def critical_radius(
    tol: float = 1e-10, bracket: tuple[float, float] = (1.0, 2.0), K: int = 16
) -> CriticalRadius:
    """Radius where the lowest numerical eigenvalue about the identity changes sign."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    root, it = bisect_sign_change(lambda L: identity_lambda0(L, K=K), *bracket, tol)
    return CriticalRadius(numerical=root, analytic=SQRT2, iterations=it)


def critical_radius_closed_form(
    tol: float = 1e-13, bracket: tuple[float, float] = (1.0, 2.0)
) -> float:
    return bisect_sign_change(lambda L: analytic_lambda(0, L), *bracket, tol)[0]


# ---------------------------------------------------------------------------
# stability exchange


@dataclass(frozen=True)
class ExchangeRow:
    L: float
    lambda0_identity: float | None
    lambda0_identity_closed: float
    lambda0_skyrmion: float | None
    energy_gap: float | None  # identity minus skyrmion


@dataclass
class ExchangeReport:
    rows: list[ExchangeRow]
    skyrmion_monotone: bool
    skyrmion_positive: bool
    identity_matches_closed_form: float  # max abs deviation
    gap_positive_at_largest: bool


def stability_exchange_report(table: BranchTable, window: float = 0.1, min_points: int = 3) -> ExchangeReport:
    rows = []
    for L in table.radii():
        ident = table.at(L, "identity")
        sk = table.at(L, "skyrmion_plus") or table.at(L, "skyrmion_minus")
        rows.append(
            ExchangeRow(
                L=L,
                lambda0_identity=ident.lambda0 if ident else None,
                lambda0_identity_closed=2 / L - L,
                lambda0_skyrmion=sk.lambda0 if sk else None,
                energy_gap=(identity_energy(L) - sk.energy) if sk else None,
            )
        )
    near = [r for r in rows if r.lambda0_skyrmion is not None and SQRT2 < r.L <= SQRT2 + window]
    if len(near) < min_points:
        raise ValueError(
            f"only {len(near)} skyrmion samples within {window} of sqrt(2); need {min_points}"
        )
    sk_rows = [r for r in rows if r.lambda0_skyrmion is not None]
    lam = np.array([r.lambda0_skyrmion for r in sk_rows])
    dev = [abs(r.lambda0_identity - r.lambda0_identity_closed) for r in rows if r.lambda0_identity is not None]
    return ExchangeReport(
        rows=rows,
        skyrmion_monotone=bool(np.all(np.diff(lam) > 0)),
        skyrmion_positive=bool(np.all(lam > 0)),
        identity_matches_closed_form=max(dev) if dev else math.nan,
        gap_positive_at_largest=bool(sk_rows[-1].energy_gap > 0),
    )
