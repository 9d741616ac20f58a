"""Experiment configuration, read from strict JSON (unknown keys are errors)."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .model import ModelParams
from .particle_filter import FilterConfig

EXPERIMENTS = (
    "base_run",
    "pf_vs_ensemble",
    "particle_count_sweep",
    "da_window_sweep",
    "calibrate",
    "generate_synthetic",
)


# override value meaning "da_window = null"
NO_WINDOW = object()


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(_Strict):
    social_threshold_global: float = Field(0.13, ge=0, le=1)
    asocial_threshold_global: float = Field(0.01, ge=0, le=1)
    peer_group_size: int = Field(18, ge=1)
    pressure_steepness: float = Field(50.0, gt=0)
    density_scaling: Literal["mean", "raw"] = "mean"
    synchronous: bool = False

    def params(self) -> ModelParams:
        return ModelParams(**self.model_dump())


class FilterSection(_Strict):
    n_particles: int = Field(1000, ge=1)
    da_window: Optional[int] = Field(5, ge=1)

    def config(self) -> FilterConfig:
        return FilterConfig(n_particles=self.n_particles, da_window=self.da_window)


class PathsSection(_Strict):
    countries: Optional[str] = None
    observations: Optional[str] = None
    out: str = "results"


class SweepSection(_Strict):
    particle_counts: list[int] = [2**k for k in range(6, 13)]
    # counts at or above this get a single trial
    single_trial_from: int = 1024
    # None means no filtering
    windows: list[Optional[int]] = [None, 15, 10, 5, 2, 1]
    window_trials: int = Field(1, ge=1)

    @field_validator("particle_counts")
    @classmethod
    def _positive_counts(cls, v: list[int]) -> list[int]:
        if not v or min(v) < 1:
            raise ValueError("particle_counts must be a non-empty list of positive integers")
        return v

    @field_validator("windows")
    @classmethod
    def _positive_windows(cls, v: list[Optional[int]]) -> list[Optional[int]]:
        if not v or any(w is not None and w < 1 for w in v):
            raise ValueError("windows must be a non-empty list of positive integers or null")
        return v


class CalibrationSection(_Strict):
    B: list[float] = [0.002, 0.005, 0.01, 0.02, 0.05]
    S: list[float] = [0.05, 0.09, 0.13, 0.17, 0.21, 0.25]
    p: list[int] = [6, 12, 18, 24, 30]


class SyntheticSection(_Strict):
    n_countries: int = Field(164, ge=2)
    days: int = Field(31, ge=1)
    # None: use master_seed
    seed: Optional[int] = None


class ExperimentConfig(_Strict):
    experiment: Optional[Literal[EXPERIMENTS]] = None  # type: ignore[valid-type]
    model: ModelSection = ModelSection()
    filter: FilterSection = FilterSection()
    ensemble_size: int = Field(100, ge=1)
    # None: span every observed day
    horizon_days: Optional[int] = Field(None, ge=1)
    master_seed: int = Field(20200301, ge=0, lt=2**64)
    trials: int = Field(20, ge=1)
    workers: int = Field(1, ge=1)
    clamp_monotone: bool = False
    paths: PathsSection = PathsSection()
    sweep: SweepSection = SweepSection()
    calibration: CalibrationSection = CalibrationSection()
    synthetic: SyntheticSection = SyntheticSection()

    def config_hash(self) -> str:
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """Apply CLI-style overrides; ``None`` values are ignored.

        Pass ``da_window=NO_WINDOW`` to switch assimilation off.
        """
        data = self.model_dump()
        mapping = {
            "experiment": ("experiment",),
            "seed": ("master_seed",),
            "particles": ("filter", "n_particles"),
            "da_window": ("filter", "da_window"),
            "ensemble": ("ensemble_size",),
            "out": ("paths", "out"),
        }
        for key, value in overrides.items():
            if value is None:
                continue
            if value is NO_WINDOW:
                value = None
            path = mapping[key]
            target = data
            for part in path[:-1]:
                target = target[part]
            target[path[-1]] = value
        return ExperimentConfig.model_validate(data)


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    return ExperimentConfig.model_validate_json(text)
