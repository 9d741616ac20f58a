"""Agent-based diffusion of lockdown policies with particle-filter data assimilation."""

from .country_data import (
    CountryRecord,
    DataError,
    NormalizationContext,
    ObservationSeries,
    build_normalization,
    haversine,
    load_countries,
    load_observations,
)
from .metrics import EnsembleSummary
from .model import ModelParams, World, WorldState, build_world, run_trajectory, step
from .particle_filter import FilterConfig, FilterRunResult, Particle, assimilate, run_filter
from .synthetic import generate_synthetic

__version__ = "0.1.0"
