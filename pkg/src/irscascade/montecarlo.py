"""
Monte Carlo sweep over PNR and trials.

Every trial draws one channel from a stream keyed on ``(seed, trial)``, so
all PNR points and estimators see the same channel. Estimator randomness
(training design and noise) comes from a stream keyed on ``(seed, pnr
index, trial, estimator family)``; the two variants of the proposed scheme
share a family and therefore identical noise. Results are gathered by
trial index, so the output does not depend on scheduling.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel import pnr_to_sigma, realize_channel, sample_paths
from .metrics import METRIC_NAMES, compute_metrics, ls_metrics
from .pipeline import ls_baseline, run_two_stage

_FAMILY = {"proposed": 0, "proposed_no_fbss": 0, "ls": 1}


@dataclass
class MetricsRecord:
    estimator: str
    pnr_db: float
    mse_theta_R: float
    mse_phi_T: float
    mse_irs: float
    mse_gamma: float
    nmse_H: float
    failure_rate: float
    trials: int
    failures: int
    mse_u: float = float("nan")
    mse_v: float = float("nan")
    mean_runtime_ms: float = float("nan")

    def as_dict(self):
        return asdict(self)


def channel_rng(seed, trial):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, trial)))


def estimator_rng(seed, pnr_index, trial, estimator):
    key = (1, pnr_index, trial, _FAMILY[estimator])
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def draw_channel(config, trial):
    tx, irs, rx = config.geometries()
    paths = sample_paths(config.L_F, config.L_G, config.angle_bounds,
                         channel_rng(config.seed, trial), planar_irs=config.planar,
                         azimuth_bounds=config.azimuth_bounds,
                         elevation_bounds=config.elevation_bounds,
                         min_separation=config.min_separation, spacing=config.spacing)
    return realize_channel(paths, tx, irs, rx)


def run_estimator(name, config, channel, sigma, rng):
    """Return ``(metrics, failed)`` for one estimator on one channel."""
    if name == "ls":
        return ls_metrics(channel, ls_baseline(channel, config, sigma, rng)), False
    result = run_two_stage(config, channel, sigma, rng, use_fbss=(name == "proposed"))
    return compute_metrics(channel, result), result.failed


def run_trial(config, trial):
    """Metrics for every (PNR, estimator) pair of one trial.

    Returns an array ``(n_pnr, n_est, n_metrics + 2)``: metrics, failure
    flag, runtime in ms.
    """
    channel = draw_channel(config, trial)
    out = np.full((len(config.pnr_db), len(config.estimators), len(METRIC_NAMES) + 2), np.nan)
    for p, pnr in enumerate(config.pnr_db):
        sigma = pnr_to_sigma(pnr)
        for e, name in enumerate(config.estimators):
            t0 = time.perf_counter()
            metrics, failed = run_estimator(name, config, channel, sigma,
                                            estimator_rng(config.seed, p, trial, name))
            out[p, e, :-2] = [metrics[m] for m in METRIC_NAMES]
            out[p, e, -2] = float(failed)
            out[p, e, -1] = 1e3 * (time.perf_counter() - t0)
    return out


def _trial_task(args):
    return run_trial(*args)


def _mean(values):
    values = values[np.isfinite(values)]
    return float(np.mean(values)) if values.size else float("nan")


def aggregate(config, per_trial):
    """Collapse ``(trials, n_pnr, n_est, k)`` results into records.

    Means run over successful trials only; the failure count is reported.
    """
    records = []
    idx = {m: i for i, m in enumerate(METRIC_NAMES)}
    for e, name in enumerate(config.estimators):
        for p, pnr in enumerate(config.pnr_db):
            block = per_trial[:, p, e, :]
            failed = block[:, -2] > 0
            ok = block[~failed]
            m = {k: _mean(ok[:, i]) for k, i in idx.items()}
            records.append(MetricsRecord(
                estimator=name, pnr_db=float(pnr),
                mse_theta_R=m["mse_theta_R"], mse_phi_T=m["mse_phi_T"], mse_irs=m["mse_irs"],
                mse_gamma=m["mse_gamma"], nmse_H=m["nmse_H"],
                failure_rate=float(failed.mean()), trials=int(block.shape[0]),
                failures=int(failed.sum()), mse_u=m["mse_u"], mse_v=m["mse_v"],
                mean_runtime_ms=_mean(block[:, -1])))
    return records


def run_monte_carlo(config, progress=None):
    """Full sweep; returns one :class:`MetricsRecord` per (estimator, PNR)."""
    config.validate()
    tasks = [(config, t) for t in range(config.trials)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_trial_task, tasks))
    else:
        results = []
        for task in tasks:
            results.append(_trial_task(task))
            if progress is not None:
                progress(len(results), config.trials)
    return aggregate(config, np.stack(results))


def run_trials_raw(config):
    """Per-trial metric arrays without aggregation (for analysis and tests)."""
    config.validate()
    return np.stack([run_trial(config, t) for t in range(config.trials)])
