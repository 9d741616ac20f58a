import numpy as np
import pytest

from covpol.country_data import CountryRecord
from covpol.model import build_world


def random_countries(n, seed=0, locked=None):
    rng = np.random.default_rng(seed)
    locked = set(range(max(1, n // 10))) if locked is None else set(locked)
    return [
        CountryRecord(
            id=i,
            code=f"C{i:03d}",
            income=float(rng.uniform(500, 80000)),
            democracy=float(rng.uniform(0.5, 10)),
            capital_lat=float(rng.uniform(-60, 70)),
            capital_lon=float(rng.uniform(-180, 180)),
            pop_density=float(rng.lognormal(4.5, 1.2)),
            initial_lockdown=i in locked,
        )
        for i in range(n)
    ]


@pytest.fixture
def countries20():
    return random_countries(20, seed=7)


@pytest.fixture
def world20(countries20):
    return build_world(countries20)
