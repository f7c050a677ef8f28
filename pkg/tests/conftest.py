import numpy as np
import pytest

from fbmdrift.grid import TimeGrid
from fbmdrift.model import SdeConfig


@pytest.fixture
def grid1024():
    return TimeGrid(1.0, 1024)


def sde(H, eps=0.02, n=1024, T=1.0, x0=1.0):
    return SdeConfig(x0, eps, H, TimeGrid(T, n))


def maxrel(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.abs(b)))


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
