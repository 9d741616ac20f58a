"""Sequential importance resampling over model trajectories.

A population of particles, each an independent model run with its own random
stream, is propagated day by day. Every ``da_window`` days the particles are
scored against the observed lockdown vector, weighted by the squared fraction
of correctly predicted countries, and resampled systematically. Copies get
fresh streams so duplicates diverge again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import metrics
from .country_data import ObservationSeries
from .model import World, WorldState, advance
from .seeding import fresh_seeds, generators

Scorer = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class Particle:
    state: WorldState
    stream_seed: int
    weight: float


@dataclass(frozen=True)
class FilterConfig:
    n_particles: int = 1000
    # None: never assimilate
    da_window: int | None = 5

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise ValueError(f"n_particles must be >= 1, got {self.n_particles}")
        if self.da_window is not None and self.da_window < 1:
            raise ValueError(f"da_window must be >= 1, got {self.da_window}")

    def assimilation_days(self, horizon: int) -> list[int]:
        if self.da_window is None:
            return []
        return list(range(self.da_window, horizon + 1, self.da_window))


def compute_weight_scores(states: np.ndarray, observation: np.ndarray) -> np.ndarray:
    """Squared fraction of correctly estimated countries, one score per particle.

    ``states`` is (particles, countries); ``observation`` is (countries,).
    """
    states = np.atleast_2d(np.asarray(states, dtype=bool))
    observation = np.asarray(observation, dtype=bool)
    wrong = np.count_nonzero(states != observation[None, :], axis=1)
    correct = 1.0 - wrong / observation.shape[0]
    return correct**2


def uniform_scores(states: np.ndarray, observation: np.ndarray) -> np.ndarray:
    return np.ones(np.atleast_2d(states).shape[0])


def normalize_weights(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    if np.any(scores < 0):
        raise ValueError("scores must be non-negative")
    total = scores.sum()
    if total == 0:
        return np.full(len(scores), 1.0 / len(scores))
    return scores / total


def systematic_resample(weights, n_out: int, rng: np.random.Generator) -> np.ndarray:
    """Indices picked by one offset ``u0 ~ U[0, 1/n_out)`` stepped in ``1/n_out`` increments."""
    weights = np.asarray(weights, dtype=float)
    cdf = np.cumsum(weights)
    cdf[-1] = 1.0
    points = (rng.random() + np.arange(n_out)) / n_out
    idx = np.searchsorted(cdf, points, side="right")
    return np.minimum(idx, len(weights) - 1)


def weight_entropy(weights: np.ndarray) -> float:
    w = weights[weights > 0]
    return float(-(w * np.log(w)).sum())


@dataclass(frozen=True)
class AssimilationEvent:
    day: int
    weight_sum: float
    entropy: float
    max_weight: float
    n_unique: int


def _resample(
    states: np.ndarray,
    observation: np.ndarray,
    rng: np.random.Generator,
    scorer: Scorer,
    day: int,
) -> tuple[np.ndarray, np.ndarray, AssimilationEvent]:
    weights = normalize_weights(scorer(states, observation))
    idx = systematic_resample(weights, len(weights), rng)
    event = AssimilationEvent(
        day=day,
        weight_sum=float(weights.sum()),
        entropy=weight_entropy(weights),
        max_weight=float(weights.max()),
        n_unique=len(np.unique(idx)),
    )
    return idx, weights, event


def assimilate(
    particles: Sequence[Particle],
    observation: np.ndarray,
    rng: np.random.Generator,
    scorer: Scorer = compute_weight_scores,
) -> list[Particle]:
    if not particles:
        raise ValueError("empty particle population")
    states = np.stack([p.state.status for p in particles])
    idx, _, _ = _resample(states, observation, rng, scorer, particles[0].state.day)
    seeds = fresh_seeds(rng, len(particles))
    w = 1.0 / len(particles)
    return [
        Particle(
            state=WorldState(day=particles[k].state.day, status=particles[k].state.status.copy()),
            stream_seed=int(seed),
            weight=w,
        )
        for k, seed in zip(idx, seeds)
    ]


@dataclass
class FilterRunResult:
    """Per-day, per-particle record of one filtered run.

    Values on assimilation days are taken before resampling, so every entry
    is a genuine forecast.
    """

    fractions: np.ndarray  # (days, particles)
    accuracies: np.ndarray  # (days, particles)
    observed_fractions: np.ndarray
    events: list[AssimilationEvent] = field(default_factory=list)
    seed: int = 0
    initial_seeds: np.ndarray | None = None

    @property
    def mean_fraction(self) -> np.ndarray:
        return self.fractions.mean(axis=1)

    @property
    def mse(self) -> np.ndarray:
        return metrics.mse_curve(self.mean_fraction, self.observed_fractions)

    @property
    def summed_mse(self) -> float:
        return metrics.summed_mse(self.mse)

    @property
    def mean_accuracy(self) -> float:
        return float(self.accuracies.mean())


def run_filter(
    config: FilterConfig,
    world: World,
    observations: ObservationSeries,
    horizon: int,
    seed: int,
    scorer: Scorer = compute_weight_scores,
) -> FilterRunResult:
    """Propagate ``config.n_particles`` particles from the observed day-0 state.

    With ``config.da_window`` None or beyond ``horizon`` no assimilation
    happens and the result is a plain ensemble of independent runs.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if observations.days < horizon + 1:
        raise ValueError(f"observations cover {observations.days} days, horizon {horizon} needs {horizon + 1}")
    if observations.n_countries != world.n:
        raise ValueError("observations and world disagree on the number of countries")

    master = np.random.default_rng(seed)
    seeds = fresh_seeds(master, config.n_particles)
    rngs = generators(seeds)
    obs = observations.matrix
    status = np.repeat(obs[:, 0][None, :], config.n_particles, axis=0)
    events_on = set(config.assimilation_days(horizon))

    fractions = np.empty((horizon + 1, config.n_particles))
    accuracies = np.empty_like(fractions)
    fractions[0] = status.mean(axis=1)
    accuracies[0] = (status == obs[:, 0]).mean(axis=1)
    events: list[AssimilationEvent] = []
    for t in range(1, horizon + 1):
        advance(status, rngs, world)
        fractions[t] = status.mean(axis=1)
        accuracies[t] = (status == obs[:, t]).mean(axis=1)
        if t in events_on:
            idx, _, event = _resample(status, obs[:, t], master, scorer, t)
            events.append(event)
            status = status[idx]
            rngs = generators(fresh_seeds(master, config.n_particles))

    return FilterRunResult(
        fractions=fractions,
        accuracies=accuracies,
        observed_fractions=observations.fractions()[: horizon + 1],
        events=events,
        seed=seed,
        initial_seeds=seeds,
    )
