import time

import numpy as np
import pytest

from hyplab.lab import compute_surface
from hyplab.pants import sharpness_family, two_pants_surface

# Shared heavy computations (session scope): the acceptance sweep reuses one
# build+solve per surface across criteria 5, 6, 7 and 10.

SWEEP_H = 0.1
SWEEP_SEED = 7
TIMINGS = {}


@pytest.fixture(scope="session")
def sweep_runs():
    t0 = time.time()
    runs = []
    for n in (2, 4, 6):
        for eps in (0.05, 0.1, 0.2):
            runs.append(compute_surface(
                f"sharp-n{n}-eps{eps}", sharpness_family(n, eps), SWEEP_H,
                seed=SWEEP_SEED, for_heat=True,
            ))
    TIMINGS["sweep_build"] = time.time() - t0
    return runs


@pytest.fixture(scope="session")
def thick_run():
    return compute_surface("thick-g2", two_pants_surface(2.0, 2.0, 2.0),
                           SWEEP_H, seed=SWEEP_SEED, for_heat=True)


@pytest.fixture(scope="session")
def genus2_run():
    return compute_surface("genus2-unit", two_pants_surface(1.0, 1.0, 1.0),
                           SWEEP_H, seed=SWEEP_SEED, for_heat=True)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(np.random.PCG64(20260809))
