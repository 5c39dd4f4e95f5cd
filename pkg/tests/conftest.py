import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


def random_profile(rng, kmax=16, zero_mean=False, scale=1.0):
    """Random Fourier profile used by the closed-form property tests."""
    from fklab.circle import BoundaryProfile

    k = rng.integers(1, kmax + 1)
    cos = rng.standard_normal(k) * scale
    sin = rng.standard_normal(k) * scale
    a0 = 0.0 if zero_mean else float(rng.standard_normal()) * scale
    return BoundaryProfile(a0, cos, sin)


@pytest.fixture(scope="session")
def combined_sweep():
    """The full acceptance sweep (8 ellipses + 52 random near-spheres),
    computed once per session and shared by every criterion that needs it."""
    from fklab import stability

    spec = stability.SweepSpec()
    workers = os.cpu_count() or 1
    start = time.monotonic()
    result = stability.sigma_scan(spec, workers=workers)
    elapsed = time.monotonic() - start
    return result, elapsed


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
