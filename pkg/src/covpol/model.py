"""Forward agent-based model of lockdown adoption.

Each country is an agent with a binary lockdown status. On every day the
agents are activated one at a time in a fresh random order and a country not
yet in lockdown adopts if either

* the mean similarity distance to its ``p`` nearest locked-down peers is
  below its social threshold ``s_i`` (peer mimicry), or
* a uniform draw falls below its own-initiative probability ``b_i`` plus a
  global-pressure term ``exp(steepness * (f - 1))``, ``f`` being the
  fraction of countries already locked down.

Lockdown is absorbing. With the default sequential update an adoption is
visible to every agent activated later in the same day.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .country_data import CountryRecord, NormalizationContext, build_normalization, haversine_matrix

DENSITY_SCALINGS = ("mean", "raw")


@dataclass(frozen=True)
class ModelParams:
    """Global model knobs. Defaults are the calibrated base-run values."""

    social_threshold_global: float = 0.13
    asocial_threshold_global: float = 0.01
    peer_group_size: int = 18
    pressure_steepness: float = 50.0
    # "mean": log density divided by its average over the country set;
    # "raw": log density used as is.
    density_scaling: str = "mean"
    synchronous: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.social_threshold_global <= 1.0:
            raise ValueError(f"social_threshold_global must lie in [0, 1], got {self.social_threshold_global}")
        if not 0.0 <= self.asocial_threshold_global <= 1.0:
            raise ValueError(f"asocial_threshold_global must lie in [0, 1], got {self.asocial_threshold_global}")
        if int(self.peer_group_size) != self.peer_group_size or self.peer_group_size < 1:
            raise ValueError(f"peer_group_size must be a positive integer, got {self.peer_group_size}")
        if not self.pressure_steepness > 0:
            raise ValueError(f"pressure_steepness must be positive, got {self.pressure_steepness}")
        if self.density_scaling not in DENSITY_SCALINGS:
            raise ValueError(f"density_scaling must be one of {DENSITY_SCALINGS}, got {self.density_scaling!r}")


@dataclass(frozen=True)
class WorldState:
    day: int
    status: np.ndarray

    @property
    def fraction_locked(self) -> float:
        return float(self.status.mean())


@dataclass(frozen=True)
class DerivedThresholds:
    s: np.ndarray
    b: np.ndarray


def pairwise_distance(i: int, j: int, countries: Sequence[CountryRecord], norm: NormalizationContext) -> float:
    a, c = countries[i], countries[j]
    income = abs(a.income - c.income) / (norm.income_max - norm.income_min)
    democracy = abs(a.democracy - c.democracy) / (norm.democracy_max - norm.democracy_min)
    geo = haversine_matrix([a.capital_lat, c.capital_lat], [a.capital_lon, c.capital_lon])[0, 1] / norm.haversine_max
    return (income + democracy + geo) / 3.0


def distance_matrix(countries: Sequence[CountryRecord], norm: NormalizationContext | None = None) -> np.ndarray:
    """All pairwise similarity distances; symmetric with a zero diagonal."""
    if norm is None:
        norm = build_normalization(countries)
    income = np.array([c.income for c in countries])
    democracy = np.array([c.democracy for c in countries])
    geo = haversine_matrix([c.capital_lat for c in countries], [c.capital_lon for c in countries])
    d = (
        np.abs(income[:, None] - income[None, :]) / (norm.income_max - norm.income_min)
        + np.abs(democracy[:, None] - democracy[None, :]) / (norm.democracy_max - norm.democracy_min)
        + geo / norm.haversine_max
    ) / 3.0
    np.fill_diagonal(d, 0.0)
    # external extrema may be narrower than the set; keep the unit interval
    return np.clip(d, 0.0, 1.0)


def derive_thresholds(countries: Sequence[CountryRecord], params: ModelParams) -> DerivedThresholds:
    """Per-country social and own-initiative thresholds.

    ``s_i = S * y_i / mean(y)`` and ``b_i = P_i**2 * mean(y) / y_i * B``,
    both clamped to [0, 1], where ``y`` is the democracy score and ``P_i`` the
    log population density (divided by its set average unless
    ``density_scaling == "raw"``). A density below 1 gives a negative log,
    which the square turns positive; it is accepted as is.
    """
    if not countries:
        raise ValueError("no countries")
    y = np.array([c.democracy for c in countries], dtype=float)
    if np.any(y <= 0):
        bad = next(c.code for c in countries if c.democracy <= 0)
        raise ValueError(f"democracy score must be positive ({bad})")
    y_mean = y.mean()
    log_density = np.log([c.pop_density for c in countries])
    if params.density_scaling == "mean":
        scale = log_density.mean()
        if scale == 0:
            raise ValueError("mean log population density is zero; cannot normalize")
        log_density = log_density / scale
    s = np.clip(params.social_threshold_global * y / y_mean, 0.0, 1.0)
    b = np.clip(log_density**2 * (y_mean / y) * params.asocial_threshold_global, 0.0, 1.0)
    return DerivedThresholds(s=s, b=b)


def neighbor_order(distances: np.ndarray) -> np.ndarray:
    """Row ``i`` lists every other country by increasing distance to ``i``, ties by id."""
    n = distances.shape[0]
    order = np.argsort(distances, axis=1, kind="stable")
    if n == 1:
        return np.zeros((1, 0), dtype=np.int64)
    # drop self from each row; it sits first unless tied at distance 0
    keep = order != np.arange(n)[:, None]
    return order[keep].reshape(n, n - 1).astype(np.int64)


@dataclass(frozen=True)
class World:
    """Everything a step needs, precomputed once and shared read-only."""

    countries: tuple[CountryRecord, ...]
    params: ModelParams
    distances: np.ndarray
    order: np.ndarray
    thresholds: DerivedThresholds
    norm: NormalizationContext | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.countries)

    def initial_state(self) -> WorldState:
        return WorldState(day=0, status=np.array([c.initial_lockdown for c in self.countries], dtype=bool))


def build_world(
    countries: Sequence[CountryRecord],
    params: ModelParams | None = None,
    norm: NormalizationContext | None = None,
) -> World:
    params = params or ModelParams()
    if norm is None:
        norm = build_normalization(countries)
    d = distance_matrix(countries, norm)
    return World(
        countries=tuple(countries),
        params=params,
        distances=d,
        order=neighbor_order(d),
        thresholds=derive_thresholds(countries, params),
        norm=norm,
    )


def with_params(world: World, params: ModelParams) -> World:
    """Same countries and distances, new global parameters."""
    return World(
        countries=world.countries,
        params=params,
        distances=world.distances,
        order=world.order,
        thresholds=derive_thresholds(world.countries, params),
        norm=world.norm,
    )


def social_condition(i: int, status: np.ndarray, world: World) -> bool:
    status = np.asarray(status, dtype=bool)
    return bool(
        _kernels.social_ok(
            i,
            status,
            int(status.sum()),
            world.order,
            world.distances,
            world.thresholds.s[i],
            world.params.peer_group_size,
        )
    )


def adoption_probability(b_i: float, fraction_locked: float, steepness: float) -> float:
    return float(_kernels.adoption_probability(b_i, fraction_locked, steepness))


def asocial_condition(i: int, fraction_locked: float, world: World, rng: np.random.Generator) -> bool:
    prob = adoption_probability(world.thresholds.b[i], fraction_locked, world.params.pressure_steepness)
    return bool(rng.random() < prob)


def draw_day(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """One day's randomness: activation order, then one uniform per activation slot."""
    return rng.permutation(n), rng.random(n)


def advance(status: np.ndarray, rngs: Sequence[np.random.Generator], world: World) -> None:
    """Move a batch of statuses (particles x countries) one day forward, in place."""
    n_part, n = status.shape
    perms = np.empty((n_part, n), dtype=np.int64)
    u = np.empty((n_part, n))
    for q, rng in enumerate(rngs):
        perms[q], u[q] = draw_day(rng, n)
    p = world.params
    _kernels.step_batch(
        status,
        perms,
        u,
        world.order,
        world.distances,
        world.thresholds.s,
        world.thresholds.b,
        p.peer_group_size,
        p.pressure_steepness,
        p.synchronous,
    )


def step(state: WorldState, world: World, rng: np.random.Generator) -> WorldState:
    status = state.status.astype(bool).copy()[None, :]
    advance(status, [rng], world)
    return WorldState(day=state.day + 1, status=status[0])


def run_trajectory(initial: WorldState, horizon: int, world: World, rng: np.random.Generator) -> list[WorldState]:
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    states = [initial]
    for _ in range(horizon):
        states.append(step(states[-1], world, rng))
    return states


def run_ensemble(
    world: World,
    initial: np.ndarray,
    horizon: int,
    rngs: Sequence[np.random.Generator],
) -> np.ndarray:
    """Independent runs from a common initial status; returns (horizon+1, runs, countries)."""
    status = np.repeat(np.asarray(initial, dtype=bool)[None, :], len(rngs), axis=0)
    out = np.empty((horizon + 1, *status.shape), dtype=bool)
    out[0] = status
    for t in range(1, horizon + 1):
        advance(status, rngs, world)
        out[t] = status
    return out
