import math

import numpy as np
import pytest

from fnslab import spectral as sp
from fnslab.physics import FlowState


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_state(grid, seed, amplitude=0.05, band=None, decay=2.0):
    """Band-limited random state scaled so that each field peaks at ``amplitude``."""
    rng = philox(seed)
    band = grid.n // 4 if band is None else band
    parts = []
    for comps in (1, grid.d, 1):
        f = sp.random_field(grid, rng, comps, band=band, decay=decay)
        parts.append(f * (amplitude / sp.max_abs(f)))
    return FlowState(*parts)


def mode_field(grid, k, amplitude=1.0, phase=0.0, kind="cos"):
    """Samples of ``amplitude * cos(k.x + phase)`` (or sin) as a spectral field."""
    x = grid.coords
    arg = sum(ki * xi for ki, xi in zip(k, x)) + phase
    vals = amplitude * (np.cos(arg) if kind == "cos" else np.sin(arg))
    return sp.forward_dft(sp.RealField(grid, vals))


def exact_mode(grid, k, amplitude=1.0):
    """Exact coefficients of ``amplitude * cos(k.x)``."""
    c = np.zeros((1,) + grid.shape, dtype=complex)
    idx = tuple(ki % grid.n for ki in k)
    neg = tuple((-ki) % grid.n for ki in k)
    c[(0,) + idx] += 0.5 * amplitude * grid.volume
    c[(0,) + neg] += 0.5 * amplitude * grid.volume
    return sp.SpectralField(grid, c)


@pytest.fixture
def grid2():
    return sp.Grid(2, 32)


@pytest.fixture
def grid3():
    return sp.Grid(3, 16)


@pytest.fixture
def rng():
    return philox(1234)


TWO_PI = 2 * math.pi


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results, key=lambda k: int(k[2:])):
            terminalreporter.write_line(results[key][1])
