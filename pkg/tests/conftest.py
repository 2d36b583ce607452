import functools
import math

import pytest
from hypothesis import settings

from skyrme_s3 import elsolver

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

SQRT2 = math.sqrt(2.0)

# acceptance criterion lines, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


@functools.lru_cache(maxsize=None)
def solved(L: float) -> tuple:
    return tuple(elsolver.solve_bvp(L))


def skyrmions(L: float) -> list:
    return [r for r in solved(L) if abs(r.slope0 - 1) > 1e-6]


@pytest.fixture
def record():
    def _record(n: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
