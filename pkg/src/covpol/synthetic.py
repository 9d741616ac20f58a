"""Synthetic countries and observations for desk-scale runs.

Countries are drawn around a handful of regional centres. Each country gets
a development score from its region plus noise; democracy is an affine map
of that score onto [1, 10] and log income is linear in it plus noise, so
the three similarity dimensions co-vary the way real countries do. Population
density is log-normal and independent.

The observation matrix is one run of the model itself from a random ~8 %
initial adoption, which makes the data an identical-twin experiment.
"""

from __future__ import annotations

import numpy as np

from .country_data import CountryRecord, ObservationSeries
from .model import ModelParams, build_world, run_trajectory

# lat, lon, share of countries, mean development in [0, 1]
REGIONS = np.array(
    [
        (50.0, 15.0, 44, 0.80),  # Europe
        (5.0, 20.0, 48, 0.30),  # Africa
        (28.0, 45.0, 15, 0.20),  # Middle East
        (30.0, 100.0, 25, 0.45),  # Asia
        (-10.0, -65.0, 20, 0.55),  # Latin America
        (40.0, -95.0, 6, 0.85),  # North America
        (-30.0, 140.0, 6, 0.85),  # Oceania
    ]
)

INITIAL_FRACTION = 0.08


def synthetic_countries(n: int, rng: np.random.Generator) -> list[CountryRecord]:
    share = REGIONS[:, 2] / REGIONS[:, 2].sum()
    region = rng.choice(len(REGIONS), size=n, p=share)
    lat = np.clip(REGIONS[region, 0] + rng.normal(0.0, 8.0, n), -89.0, 89.0)
    lon = (REGIONS[region, 1] + rng.normal(0.0, 12.0, n) + 180.0) % 360.0 - 180.0
    development = np.clip(REGIONS[region, 3] + rng.normal(0.0, 0.15, n), 0.0, 1.0)
    democracy = 1.0 + 9.0 * development
    income = np.exp(np.log(1500.0) + development * np.log(40.0) + rng.normal(0.0, 0.4, n))
    density = rng.lognormal(np.log(90.0), 1.3, n)

    locked = np.zeros(n, dtype=bool)
    locked[rng.choice(n, size=max(1, round(INITIAL_FRACTION * n)), replace=False)] = True
    return [
        CountryRecord(
            id=i,
            code=f"S{i:03d}",
            name=f"Synthetic {i}",
            income=float(income[i]),
            democracy=float(democracy[i]),
            capital_lat=float(lat[i]),
            capital_lon=float(lon[i]),
            pop_density=float(density[i]),
            initial_lockdown=bool(locked[i]),
        )
        for i in range(n)
    ]


def generate_synthetic(
    n_countries: int = 164,
    seed: int = 0,
    days: int = 31,
    params: ModelParams | None = None,
) -> tuple[list[CountryRecord], ObservationSeries]:
    """Countries plus ``days`` observed days (d0 .. d{days-1}) produced by the model."""
    if n_countries < 2:
        raise ValueError("need at least two countries")
    if days < 1:
        raise ValueError("need at least one day")
    rng = np.random.default_rng(seed)
    countries = synthetic_countries(n_countries, rng)
    world = build_world(countries, params or ModelParams())
    states = run_trajectory(world.initial_state(), days - 1, world, rng)
    matrix = np.stack([s.status for s in states], axis=1)
    return countries, ObservationSeries(matrix=matrix)
