"""Macro and micro fit measures and ensemble summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnsembleSummary:
    """Per-day statistics over an ensemble; every array has one entry per day."""

    mean: np.ndarray
    std: np.ndarray
    ci50: np.ndarray  # (days, 2) lower/upper
    ci95: np.ndarray
    micro_mean: np.ndarray
    micro_std: np.ndarray

    @property
    def days(self) -> int:
        return len(self.mean)


def macro_fraction(status: np.ndarray) -> float:
    return float(np.mean(status))


def micro_accuracy(status: np.ndarray, observed: np.ndarray) -> float:
    """Fraction of countries whose predicted status equals the observed one."""
    status = np.asarray(status, dtype=bool)
    observed = np.asarray(observed, dtype=bool)
    if status.shape != observed.shape:
        raise ValueError(f"shape mismatch: {status.shape} vs {observed.shape}")
    return float(np.mean(status == observed))


def macro_fractions(trajectories: np.ndarray) -> np.ndarray:
    """(days, runs, countries) booleans -> (days, runs) fraction locked."""
    return trajectories.mean(axis=-1)


def micro_accuracies(trajectories: np.ndarray, observed: np.ndarray) -> np.ndarray:
    """(days, runs, countries) against observed (countries, days) -> (days, runs)."""
    obs = np.asarray(observed, dtype=bool).T[: trajectories.shape[0], None, :]
    return (trajectories == obs).mean(axis=-1)


def mse_curve(mean_fractions, observed_fractions) -> np.ndarray:
    a = np.asarray(mean_fractions, dtype=float)
    b = np.asarray(observed_fractions, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return (a - b) ** 2


def per_run_mse_curve(fractions: np.ndarray, observed_fractions) -> np.ndarray:
    """Mean over runs of each run's squared error; ``fractions`` is (days, runs)."""
    obs = np.asarray(observed_fractions, dtype=float)
    if fractions.shape[0] != obs.shape[0]:
        raise ValueError(f"length mismatch: {fractions.shape[0]} vs {obs.shape[0]}")
    return ((fractions - obs[:, None]) ** 2).mean(axis=1)


def summed_mse(mse) -> float:
    return float(np.sum(mse))


def summarize_ensemble(fractions: np.ndarray, accuracies: np.ndarray | None = None) -> EnsembleSummary:
    """Summarize (days, runs) arrays of macro fractions and micro accuracies.

    Bands are empirical quantiles (25-75 % and 2.5-97.5 %) across runs.
    """
    fractions = np.asarray(fractions, dtype=float)
    if fractions.ndim != 2 or fractions.shape[1] < 2:
        raise ValueError("summarizing an ensemble needs at least 2 runs")
    if accuracies is None:
        accuracies = np.full_like(fractions, np.nan)
    q = np.quantile(fractions, [0.025, 0.25, 0.75, 0.975], axis=1).T
    return EnsembleSummary(
        mean=fractions.mean(axis=1),
        std=fractions.std(axis=1, ddof=1),
        ci50=q[:, 1:3],
        ci95=q[:, [0, 3]],
        micro_mean=accuracies.mean(axis=1),
        micro_std=accuracies.std(axis=1, ddof=1),
    )


def pearson_correlation(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise ValueError("need two 1-d series of equal length >= 2")
    da, db = a - a.mean(), b - b.mean()
    va, vb = np.dot(da, da), np.dot(db, db)
    if va == 0 or vb == 0:
        raise ValueError("correlation undefined for a constant series")
    return float(np.clip(np.dot(da, db) / np.sqrt(va * vb), -1.0, 1.0))
