"""End-to-end experiments and their result files.

Every experiment is a pure function of its :class:`ExperimentConfig`: seeds
come from :func:`covpol.seeding.derive_seed` keyed by experiment, cell and
trial, and results are rendered to text with ``repr`` floats, so repeated runs
give byte-identical files and reading a file back reproduces the numbers
exactly.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import metrics
from .calibration import SCORE_COLUMNS, grid_search
from .config import ExperimentConfig
from .country_data import (
    CountryRecord,
    ObservationSeries,
    load_countries,
    load_observations,
    render_countries,
    render_observations,
)
from .model import World, build_world
from .particle_filter import FilterConfig, FilterRunResult, run_filter
from .seeding import derive_seed
from .synthetic import generate_synthetic

log = logging.getLogger(__name__)

# day indices (0 = 1 March) of the windows discussed for the comparison run
CRITICAL_PHASE = (9, 19)
LATE_PHASE = (19, 24)


@dataclass
class ExperimentResult:
    experiment: str
    summary: dict
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)
    # files written verbatim, without a provenance line
    raw_files: dict[str, str] = field(default_factory=dict)

    def render(self, config: ExperimentConfig) -> dict[str, str]:
        header = provenance_line(self.experiment, config)
        files = {name: header + _render_csv(cols, rows) for name, (cols, rows) in self.tables.items()}
        summary = {"experiment": self.experiment, "config_hash": config.config_hash(), "master_seed": config.master_seed}
        summary.update(self.summary)
        files["summary.json"] = json.dumps(summary, indent=2, sort_keys=True, allow_nan=True) + "\n"
        files.update(self.raw_files)
        return files

    def write(self, out_dir: str | Path, config: ExperimentConfig) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.render(config).items():
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
        return written


def provenance_line(experiment: str, config: ExperimentConfig) -> str:
    return f"# covpol experiment={experiment} config_hash={config.config_hash()} master_seed={config.master_seed}\n"


def _cell(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _render_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def read_result_table(path: str | Path) -> tuple[dict[str, str], dict[str, np.ndarray]]:
    """Read a result CSV back: (provenance fields, column name -> float array)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    meta: dict[str, str] = {}
    if lines and lines[0].startswith("#"):
        for token in lines[0][1:].split():
            if "=" in token:
                k, v = token.split("=", 1)
                meta[k] = v
        lines = lines[1:]
    reader = csv.reader(lines)
    columns = next(reader)
    rows = list(reader)
    data = {
        c: np.array([np.nan if r[i] in ("none", "") else float(r[i]) for r in rows], dtype=float)
        for i, c in enumerate(columns)
    }
    return meta, data


def read_summary(out_dir: str | Path) -> metrics.EnsembleSummary:
    """Rebuild the ensemble summary from ``macro_curve.csv`` and ``micro_curve.csv``."""
    out = Path(out_dir)
    _, macro = read_result_table(out / "macro_curve.csv")
    _, micro = read_result_table(out / "micro_curve.csv")
    return metrics.EnsembleSummary(
        mean=macro["mean"],
        std=macro["std"],
        ci50=np.column_stack([macro["ci50_lo"], macro["ci50_hi"]]),
        ci95=np.column_stack([macro["ci95_lo"], macro["ci95_hi"]]),
        micro_mean=micro["mean_accuracy"],
        micro_std=micro["std"],
    )


# -- inputs ------------------------------------------------------------------


@dataclass(frozen=True)
class Inputs:
    countries: list[CountryRecord]
    observations: ObservationSeries
    world: World
    horizon: int
    synthetic: bool


def load_inputs(config: ExperimentConfig) -> Inputs:
    """Read the data files named in the config, or generate a synthetic world."""
    paths = config.paths
    params = config.model.params()
    if paths.countries or paths.observations:
        if not (paths.countries and paths.observations):
            raise ValueError("paths.countries and paths.observations must be given together")
        countries = load_countries(paths.countries)
        observations = load_observations(paths.observations, countries, clamp_monotone=config.clamp_monotone)
        synthetic = False
    else:
        syn = config.synthetic
        seed = config.master_seed if syn.seed is None else syn.seed
        countries, observations = generate_synthetic(syn.n_countries, seed, syn.days, params)
        synthetic = True
    horizon = observations.days - 1 if config.horizon_days is None else config.horizon_days
    if horizon > observations.days - 1:
        raise ValueError(f"horizon_days={horizon} exceeds the {observations.days} observed days")
    return Inputs(countries, observations, build_world(countries, params), horizon, synthetic)


def _pool_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- table builders ----------------------------------------------------------


def _curve_tables(summary: metrics.EnsembleSummary, observed: np.ndarray) -> dict:
    days = range(summary.days)
    macro = [
        [t, summary.mean[t], summary.std[t], *summary.ci50[t], *summary.ci95[t], observed[t]] for t in days
    ]
    micro = [[t, summary.micro_mean[t], summary.micro_std[t]] for t in days]
    return {
        "macro_curve.csv": (["day", "mean", "std", "ci50_lo", "ci50_hi", "ci95_lo", "ci95_hi", "observed"], macro),
        "micro_curve.csv": (["day", "mean_accuracy", "std"], micro),
    }


def _summarize(run: FilterRunResult) -> metrics.EnsembleSummary:
    return metrics.summarize_ensemble(run.fractions, run.accuracies)


def _fit_stats(run: FilterRunResult) -> dict:
    mean, obs = run.mean_fraction, run.observed_fractions
    try:
        rho = metrics.pearson_correlation(mean, obs)
    except ValueError:
        rho = float("nan")
    dev = np.abs(mean - obs)
    std = run.fractions.std(axis=1, ddof=1) if run.fractions.shape[1] > 1 else np.zeros(len(mean))
    return {
        "rho": rho,
        "summed_mse": run.summed_mse,
        "summed_mse_per_run": metrics.summed_mse(metrics.per_run_mse_curve(run.fractions, obs)),
        "max_abs_deviation": float(dev.max()),
        "max_abs_deviation_day": int(dev.argmax()),
        "max_std": float(std.max()),
        "max_std_day": int(std.argmax()),
        "min_micro_accuracy": float(run.accuracies.mean(axis=1).min()),
        "final_micro_accuracy": float(run.accuracies.mean(axis=1)[-1]),
    }


# -- experiments -------------------------------------------------------------


def run_base(config: ExperimentConfig, inputs: Inputs | None = None) -> ExperimentResult:
    """Unfiltered ensemble of ``ensemble_size`` runs from the observed day-0 state."""
    inputs = inputs or load_inputs(config)
    if config.ensemble_size < 2:
        raise ValueError("base run needs an ensemble of at least 2 runs")
    seed = derive_seed(config.master_seed, "base_run")
    run = run_filter(FilterConfig(config.ensemble_size, None), inputs.world, inputs.observations, inputs.horizon, seed)
    summary = _summarize(run)
    tables = _curve_tables(summary, run.observed_fractions)
    per_run = metrics.per_run_mse_curve(run.fractions, run.observed_fractions)
    tables["mse_curve.csv"] = (
        ["day", "mse_nopf", "mse_nopf_per_run"],
        [[t, run.mse[t], per_run[t]] for t in range(len(per_run))],
    )
    stats = _fit_stats(run)
    stats.update(
        {
            "seed": seed,
            "ensemble_size": config.ensemble_size,
            "horizon": inputs.horizon,
            "synthetic": inputs.synthetic,
            "observed_inside_ci95": bool(
                np.all((summary.ci95[:, 0] <= run.observed_fractions) & (run.observed_fractions <= summary.ci95[:, 1]))
            ),
        }
    )
    result = ExperimentResult("base_run", stats, tables)
    result.run = run  # type: ignore[attr-defined]
    result.ensemble = summary  # type: ignore[attr-defined]
    return result


def per_day_reduction(mse_nopf: np.ndarray, mse_pf: np.ndarray, floor: float = 0.01) -> np.ndarray:
    """``1 - mse_pf / mse_nopf`` per day; NaN where the unfiltered error is below
    ``floor`` times its peak (day 0 and near-perfect days would divide by ~0)."""
    out = np.full(len(mse_nopf), np.nan)
    ok = mse_nopf > floor * mse_nopf.max() if mse_nopf.max() > 0 else np.zeros(len(mse_nopf), bool)
    out[ok] = 1.0 - mse_pf[ok] / mse_nopf[ok]
    return out


def run_pf_comparison(config: ExperimentConfig, inputs: Inputs | None = None) -> ExperimentResult:
    """Filtered population vs an equally sized unfiltered ensemble, independent seeds."""
    inputs = inputs or load_inputs(config)
    fcfg = config.filter.config()
    seed_nopf = derive_seed(config.master_seed, "pf_vs_ensemble", "nopf")
    seed_pf = derive_seed(config.master_seed, "pf_vs_ensemble", "pf")
    args = (inputs.world, inputs.observations, inputs.horizon)
    nopf = run_filter(FilterConfig(fcfg.n_particles, None), *args, seed_nopf)
    pf = run_filter(fcfg, *args, seed_pf)

    reduction = per_day_reduction(nopf.mse, pf.mse)
    ratio = np.divide(pf.mse, nopf.mse, out=np.full(len(pf.mse), np.nan), where=nopf.mse > 0)
    nopf_per_run = metrics.per_run_mse_curve(nopf.fractions, nopf.observed_fractions)
    pf_per_run = metrics.per_run_mse_curve(pf.fractions, pf.observed_fractions)
    tables = {
        "mse_curve.csv": (
            ["day", "mse_nopf", "mse_pf", "ratio", "mse_nopf_per_run", "mse_pf_per_run"],
            [
                [t, nopf.mse[t], pf.mse[t], None if np.isnan(ratio[t]) else ratio[t], nopf_per_run[t], pf_per_run[t]]
                for t in range(len(ratio))
            ],
        ),
        "assimilation.csv": (
            ["day", "weight_sum", "entropy", "max_weight", "n_unique"],
            [[e.day, e.weight_sum, e.entropy, e.max_weight, e.n_unique] for e in pf.events],
        ),
    }
    pf_summary = _summarize(pf) if fcfg.n_particles > 1 else None
    nopf_summary = _summarize(nopf) if fcfg.n_particles > 1 else None
    if pf_summary is not None:
        tables.update(_curve_tables(pf_summary, pf.observed_fractions))
        for name, table in _curve_tables(nopf_summary, nopf.observed_fractions).items():
            tables[name.replace(".csv", "_nopf.csv")] = table

    def _window_max(lo: int, hi: int) -> float | None:
        vals = reduction[lo : hi + 1]
        vals = vals[~np.isnan(vals)]
        return float(vals.max()) if vals.size else None

    def _window_min(lo: int, hi: int) -> float | None:
        vals = reduction[lo : hi + 1]
        vals = vals[~np.isnan(vals)]
        return float(vals.min()) if vals.size else None

    valid = ~np.isnan(reduction)
    summary = {
        "n_particles": fcfg.n_particles,
        "da_window": fcfg.da_window,
        "assimilation_days": [e.day for e in pf.events],
        "seed_pf": seed_pf,
        "seed_nopf": seed_nopf,
        "summed_mse_pf": pf.summed_mse,
        "summed_mse_nopf": nopf.summed_mse,
        "summed_mse_reduction": 1.0 - pf.summed_mse / nopf.summed_mse if nopf.summed_mse > 0 else None,
        "best_day_reduction": float(np.nanmax(reduction)) if valid.any() else None,
        "best_day": int(np.nanargmax(reduction)) if valid.any() else None,
        "critical_phase_reduction_min": _window_min(*CRITICAL_PHASE),
        "critical_phase_reduction_max": _window_max(*CRITICAL_PHASE),
        "late_phase_reduction_max": _window_max(*LATE_PHASE),
        "mean_micro_accuracy_pf": pf.mean_accuracy,
        "mean_micro_accuracy_nopf": nopf.mean_accuracy,
        "synthetic": inputs.synthetic,
    }
    result = ExperimentResult("pf_vs_ensemble", summary, tables)
    result.pf = pf  # type: ignore[attr-defined]
    result.nopf = nopf  # type: ignore[attr-defined]
    return result


def trials_for(count: int, config: ExperimentConfig) -> int:
    return 1 if count >= config.sweep.single_trial_from else config.trials


def run_particle_sweep(config: ExperimentConfig, inputs: Inputs | None = None) -> ExperimentResult:
    """Filtered vs unfiltered summed MSE over particle counts and repeated trials."""
    inputs = inputs or load_inputs(config)
    window = config.filter.da_window
    jobs = [(n, k) for n in config.sweep.particle_counts for k in range(trials_for(n, config))]
    args = (inputs.world, inputs.observations, inputs.horizon)

    def job(item):
        n, k = item
        seed_pf = derive_seed(config.master_seed, "particle_count_sweep", n, k, "pf")
        seed_nopf = derive_seed(config.master_seed, "particle_count_sweep", n, k, "nopf")
        pf = run_filter(FilterConfig(n, window), *args, seed_pf)
        nopf = run_filter(FilterConfig(n, None), *args, seed_nopf)
        log.info("particles=%d trial=%d pf=%.4f nopf=%.4f", n, k, pf.summed_mse, nopf.summed_mse)
        return [n, k, pf.summed_mse, nopf.summed_mse, seed_pf, seed_nopf]

    rows = _pool_map(job, jobs, config.workers)
    per_count = {}
    for n in config.sweep.particle_counts:
        sel = [r for r in rows if r[0] == n]
        pf_vals = np.array([r[2] for r in sel])
        nopf_vals = np.array([r[3] for r in sel])
        per_count[str(n)] = {
            "trials": len(sel),
            "pf_wins": int(np.sum(pf_vals < nopf_vals)),
            "median_summed_mse_pf": float(np.median(pf_vals)),
            "median_summed_mse_nopf": float(np.median(nopf_vals)),
            "mean_reduction": float(1.0 - pf_vals.mean() / nopf_vals.mean()) if nopf_vals.mean() > 0 else None,
        }
    columns = ["n_particles", "trial", "summed_mse_pf", "summed_mse_nopf", "seed_pf", "seed_nopf"]
    return ExperimentResult(
        "particle_count_sweep",
        {"da_window": window, "per_count": per_count, "synthetic": inputs.synthetic},
        {"sweep.csv": (columns, rows)},
    )


def run_window_sweep(config: ExperimentConfig, inputs: Inputs | None = None) -> ExperimentResult:
    """Summed MSE and micro accuracy for each assimilation window at a fixed particle count.

    ``sweep.window_trials`` repetitions are run per window; the reported
    per-window value is the trial mean.
    """
    inputs = inputs or load_inputs(config)
    n = config.filter.n_particles
    windows = config.sweep.windows
    jobs = [(c, k) for c in range(len(windows)) for k in range(config.sweep.window_trials)]
    args = (inputs.world, inputs.observations, inputs.horizon)

    def job(item):
        c, k = item
        w = windows[c]
        seed = derive_seed(config.master_seed, "da_window_sweep", c, k)
        fcfg = FilterConfig(n, w)
        run = run_filter(fcfg, *args, seed)
        events = len(fcfg.assimilation_days(inputs.horizon))
        log.info("window=%s trial=%d summed_mse=%.4f", w, k, run.summed_mse)
        return [w, events, k, run.summed_mse, run.mean_accuracy, seed]

    rows = _pool_map(job, jobs, config.workers)
    per_window = []
    for c, w in enumerate(windows):
        sel = [r for r in rows if r[0] == w]
        per_window.append(
            {
                "da_window": w,
                "n_events": sel[0][1],
                "summed_mse": float(np.mean([r[3] for r in sel])),
                "mean_micro_accuracy": float(np.mean([r[4] for r in sel])),
            }
        )
    events = np.array([p["n_events"] for p in per_window], dtype=float)
    mse = np.array([p["summed_mse"] for p in per_window])
    slope = float(np.polyfit(events, mse, 1)[0]) if len(set(events)) > 1 else None
    baseline = next((p for p in per_window if p["da_window"] is None), None)
    if baseline is not None:
        for p in per_window:
            p["reduction_vs_none"] = 1.0 - p["summed_mse"] / baseline["summed_mse"] if baseline["summed_mse"] else None
            p["micro_gain_vs_none"] = p["mean_micro_accuracy"] / baseline["mean_micro_accuracy"] - 1.0
    columns = ["da_window", "n_events", "trial", "summed_mse", "mean_micro_accuracy", "seed"]
    return ExperimentResult(
        "da_window_sweep",
        {"n_particles": n, "per_window": per_window, "slope_per_event": slope, "synthetic": inputs.synthetic},
        {"sweep.csv": (columns, rows)},
    )


def run_calibration(config: ExperimentConfig, inputs: Inputs | None = None) -> ExperimentResult:
    inputs = inputs or load_inputs(config)
    cal = config.calibration
    best, table = grid_search(
        inputs.world,
        inputs.observations,
        cal.B,
        cal.S,
        cal.p,
        ensemble_size=config.ensemble_size,
        horizon=inputs.horizon,
        seed=config.master_seed,
    )
    rows = [[r.B, r.S, r.p, r.summed_mse, r.pearson_rho, r.seed] for r in table]
    best_row = next(r for r in table if (r.B, r.S, r.p) == (
        best.asocial_threshold_global, best.social_threshold_global, best.peer_group_size))
    summary = {
        "best": {"B": best_row.B, "S": best_row.S, "p": best_row.p},
        "summed_mse": best_row.summed_mse,
        "rho": best_row.pearson_rho,
        "cells": len(table),
        "synthetic": inputs.synthetic,
    }
    return ExperimentResult("calibrate", summary, {"sweep.csv": (list(SCORE_COLUMNS), rows)})


def run_generate_synthetic(config: ExperimentConfig) -> ExperimentResult:
    syn = config.synthetic
    seed = config.master_seed if syn.seed is None else syn.seed
    countries, obs = generate_synthetic(syn.n_countries, seed, syn.days, config.model.params())
    raw = {
        "countries.csv": render_countries(countries),
        "observations.csv": render_observations(countries, obs),
    }
    fractions = obs.fractions()
    summary = {
        "n_countries": syn.n_countries,
        "days": syn.days,
        "seed": seed,
        "initial_fraction": float(fractions[0]),
        "final_fraction": float(fractions[-1]),
    }
    return ExperimentResult("generate_synthetic", summary, raw_files=raw)


RUNNERS = {
    "base_run": run_base,
    "pf_vs_ensemble": run_pf_comparison,
    "particle_count_sweep": run_particle_sweep,
    "da_window_sweep": run_window_sweep,
    "calibrate": run_calibration,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    if config.experiment is None:
        raise ValueError("no experiment selected")
    if config.experiment == "generate_synthetic":
        return run_generate_synthetic(config)
    return RUNNERS[config.experiment](config)
