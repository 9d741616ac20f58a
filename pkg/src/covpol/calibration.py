"""Grid-search calibration of the three global parameters.

Each grid cell runs an unfiltered ensemble from the observed day-0 state and
is scored by the summed squared error between ensemble-mean and observed
lockdown fractions. Pearson correlation is reported alongside. Cells are
seeded independently from (master seed, cell index) so any row of the score
table can be reproduced alone.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import metrics
from .country_data import ObservationSeries
from .model import ModelParams, World, with_params
from .particle_filter import FilterConfig, run_filter
from .seeding import derive_seed

SCORE_COLUMNS = ("B", "S", "p", "summed_mse", "pearson_rho", "seed")


@dataclass(frozen=True)
class GridScore:
    B: float
    S: float
    p: int
    summed_mse: float
    pearson_rho: float
    seed: int


def score_params(
    world: World,
    params: ModelParams,
    observations: ObservationSeries,
    horizon: int,
    ensemble_size: int,
    seed: int,
) -> tuple[float, float]:
    run = run_filter(FilterConfig(ensemble_size, None), with_params(world, params), observations, horizon, seed)
    observed = run.observed_fractions
    try:
        rho = metrics.pearson_correlation(run.mean_fraction, observed)
    except ValueError:
        rho = float("nan")
    return run.summed_mse, rho


def grid_search(
    world: World,
    observations: ObservationSeries,
    B_values: Sequence[float],
    S_values: Sequence[float],
    p_values: Sequence[int],
    *,
    ensemble_size: int = 100,
    horizon: int | None = None,
    seed: int = 0,
) -> tuple[ModelParams, list[GridScore]]:
    """Return the best parameters and the full score table.

    The best cell minimises summed MSE; ties go to the lexicographically
    smallest (B, S, p).
    """
    if not (len(B_values) and len(S_values) and len(p_values)):
        raise ValueError("empty calibration grid")
    if ensemble_size < 2:
        raise ValueError("calibration ensemble needs at least 2 runs")
    if horizon is None:
        horizon = observations.days - 1
    if np.ptp(observations.fractions()[: horizon + 1]) == 0:
        raise ValueError("observed lockdown fraction is constant; nothing to calibrate against")

    table: list[GridScore] = []
    for cell, (B, S, p) in enumerate(itertools.product(B_values, S_values, p_values)):
        params = replace(
            world.params,
            asocial_threshold_global=float(B),
            social_threshold_global=float(S),
            peer_group_size=int(p),
        )
        cell_seed = derive_seed(seed, "calibrate", cell)
        mse, rho = score_params(world, params, observations, horizon, ensemble_size, cell_seed)
        table.append(GridScore(B=float(B), S=float(S), p=int(p), summed_mse=mse, pearson_rho=rho, seed=cell_seed))

    best = min(table, key=lambda r: (r.summed_mse, r.B, r.S, r.p))
    best_params = replace(
        world.params,
        asocial_threshold_global=best.B,
        social_threshold_global=best.S,
        peer_group_size=best.p,
    )
    return best_params, table


def write_score_table(path: str | Path, table: Sequence[GridScore], header: str | None = None) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if header:
            fh.write(header)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_COLUMNS)
        for r in table:
            writer.writerow([repr(r.B), repr(r.S), r.p, repr(r.summed_mse), repr(r.pearson_rho), r.seed])
