"""Angle matching, RMSE and detection metrics, and the Monte Carlo experiments.

An estimator, for this harness, is any callable ``estimator(R, K) -> angles``
taking a sample covariance and the true source count and returning estimated
angles in degrees (possibly fewer or more than K). RMSE is computed over
index-matched sorted pairs; detection counts truths having an estimate
within a fixed angular tolerance under one-to-one greedy assignment. Misses
never enter the RMSE; they are what the detection probability reports.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .signals import SourceScene, random_coherence, sample_covariance, synthesize_snapshots


@dataclass(frozen=True)
class MatchedAngles:
    pairs: tuple     # (truth, estimate) pairs, both sorted ascending
    misses: int      # truths left un-paired
    surplus: int     # estimates left un-paired


def match_angles(estimated, truth) -> MatchedAngles:
    """Sort both lists and pair by index up to the shorter length."""
    est = np.sort(np.asarray(estimated, dtype=float))
    tru = np.sort(np.asarray(truth, dtype=float))
    count = min(len(est), len(tru))
    pairs = tuple((float(tru[i]), float(est[i])) for i in range(count))
    return MatchedAngles(pairs, len(tru) - count, len(est) - count)


def count_hits(estimated, truth, tolerance) -> int:
    """Greedy nearest-first one-to-one assignment within the tolerance."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    est = np.asarray(estimated, dtype=float)
    tru = np.asarray(truth, dtype=float)
    candidates = sorted(
        ((abs(e - t), i, j) for i, e in enumerate(est) for j, t in enumerate(tru)),
        key=lambda c: c[0],
    )
    used_est, used_tru = set(), set()
    hits = 0
    for dist, i, j in candidates:
        if dist > tolerance:
            break
        if i in used_est or j in used_tru:
            continue
        used_est.add(i)
        used_tru.add(j)
        hits += 1
    return hits


@dataclass(frozen=True)
class TrialResult:
    true_angles: tuple
    estimated_angles: tuple
    squared_errors: tuple   # deg^2, one per matched pair
    hits: int               # truths matched within the tolerance

    @classmethod
    def evaluate(cls, truth, estimated, tolerance):
        matched = match_angles(estimated, truth)
        sq = tuple((e - t) ** 2 for t, e in matched.pairs)
        return cls(
            tuple(float(t) for t in np.sort(np.asarray(truth, dtype=float))),
            tuple(float(e) for e in np.sort(np.asarray(estimated, dtype=float))),
            sq,
            count_hits(estimated, truth, tolerance),
        )


def rmse(trials) -> float:
    """Root mean square of matched angular errors pooled across trials."""
    errors = [e for t in trials for e in t.squared_errors]
    if not errors:
        raise ValueError("no matched pairs to average")
    return float(np.sqrt(np.mean(errors)))


def rmse_standard_error(trials) -> float:
    """Spread of per-trial RMSE values across trials, as a standard error."""
    per_trial = [np.sqrt(np.mean(t.squared_errors)) for t in trials if t.squared_errors]
    if len(per_trial) < 2:
        return float("nan")
    return float(np.std(per_trial, ddof=1) / np.sqrt(len(per_trial)))


def detection_probability(trials) -> float:
    """Total hits over total targets across trials."""
    total = sum(len(t.true_angles) for t in trials)
    return sum(t.hits for t in trials) / total if total else 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Protocols for the two benchmark experiments.

    The accuracy experiment sweeps SNR over a fixed coherent scene; the
    detection experiment spreads many coherent targets across the scan range
    at one SNR. Every trial redraws the multipath amplitudes/phases and the
    noise from a stream derived from (seed, experiment, snr/trial indices).
    """

    snr_list_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    trials: int = 100
    rmse_angles: tuple = (-15.0, -5.0)
    detection_angles: tuple = (-52.5, -37.5, -22.5, -7.5, 7.5, 22.5, 37.5, 52.5)
    detection_snr_db: float = 10.0
    coherent: bool = True
    num_snapshots: int = 800
    tolerance_deg: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.tolerance_deg <= 0:
            raise ValueError("tolerance must be positive")
        if not self.snr_list_db:
            raise ValueError("need at least one SNR point")


def _trial_covariance(angles, snr_db, cfg: ExperimentConfig, steering, rng):
    coherence = random_coherence(len(angles), rng) if cfg.coherent else None
    scene = SourceScene(tuple(angles), snr_db=snr_db,
                        num_snapshots=cfg.num_snapshots, coherence=coherence)
    return sample_covariance(synthesize_snapshots(scene, steering, rng))


def run_rmse_vs_snr(cfg: ExperimentConfig, estimators, steering):
    """RMSE per (snr, estimator) over seeded coherent-scene trials.

    ``estimators`` maps name -> callable(R, K) -> angles. Every estimator
    sees the same covariance draw per trial. Returns
    {estimator: {snr: (rmse, se, trials)}}.
    """
    if not estimators:
        raise ValueError("no estimators selected")
    angles = cfg.rmse_angles
    results = {name: {} for name in estimators}
    for i_snr, snr_db in enumerate(cfg.snr_list_db):
        per_est = {name: [] for name in estimators}
        for trial in range(cfg.trials):
            rng = np.random.default_rng([cfg.seed, 10, i_snr, trial])
            r = _trial_covariance(angles, snr_db, cfg, steering, rng)
            for name, estimator in estimators.items():
                est = estimator(r, len(angles))
                per_est[name].append(TrialResult.evaluate(angles, est, cfg.tolerance_deg))
        for name, trials in per_est.items():
            results[name][snr_db] = (rmse(trials), rmse_standard_error(trials), len(trials))
    return results


def run_detection_experiment(cfg: ExperimentConfig, estimators, steering):
    """Detection probability per estimator on the many-target coherent scene."""
    if not estimators:
        raise ValueError("no estimators selected")
    angles = cfg.detection_angles
    per_est = {name: [] for name in estimators}
    for trial in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, 20, trial])
        r = _trial_covariance(angles, cfg.detection_snr_db, cfg, steering, rng)
        for name, estimator in estimators.items():
            est = estimator(r, len(angles))
            per_est[name].append(TrialResult.evaluate(angles, est, cfg.tolerance_deg))
    return {name: detection_probability(trials) for name, trials in per_est.items()}


def write_rmse_csv(path, results, trials):
    """Rows: snr_db, estimator, rmse_deg, trials, se."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["snr_db", "estimator", "rmse_deg", "trials", "se"])
        for name in sorted(results):
            for snr_db in sorted(results[name]):
                value, se, used = results[name][snr_db]
                writer.writerow(
                    [f"{snr_db:g}", name, f"{value:.12g}", used, f"{se:.12g}"]
                )


def write_detection_csv(path, probabilities, tolerance_deg, trials):
    """Rows: estimator, tolerance_deg, p_detect, trials."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["estimator", "tolerance_deg", "p_detect", "trials"])
        for name in sorted(probabilities):
            writer.writerow(
                [name, f"{tolerance_deg:g}", f"{probabilities[name]:.12g}", trials]
            )
