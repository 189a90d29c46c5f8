"""Ready-made estimators behind the benchmark interface (R, K) -> angles.

Anything with this signature plugs into the experiment harness, so external
estimators can be compared against the built-in three without touching the
harness itself.
"""

from __future__ import annotations

import numpy as np

from .arrays import ArrayConfig, steering_function
from .baselines import music_spectrum, pick_music_peaks, ss_music
from .network import NetworkParams
from .scanning import ScanConfig, TemplateBank, estimate_doa
from .training import SubregionPartition


def autoencoder_estimator(params: NetworkParams, bank: TemplateBank,
                          scan_cfg: ScanConfig, partition: SubregionPartition,
                          unit_norm: bool = False):
    """Thresholded-peak network estimator.

    The network itself never needs the source count, but the harness hands
    every estimator the same K the subspace baselines receive; when the
    thresholded scan yields more than K peaks, only the K strongest are
    returned, which keeps weak spurious peaks from polluting the
    sorted-pair matching.
    """

    def estimate(r, num_sources):
        est = estimate_doa(r, params, bank, scan_cfg, partition, unit_norm=unit_norm)
        peaks = est.peaks
        if num_sources is not None and len(peaks) > num_sources:
            peaks = sorted(peaks, key=lambda p: p.gain, reverse=True)[:num_sources]
        return np.sort(np.array([p.angle for p in peaks]))

    return estimate


def music_estimator(cfg: ArrayConfig, grid_deg):
    """Plain MUSIC with the ideal steering model and known source count."""
    steering = steering_function(cfg)
    grid = np.asarray(grid_deg, dtype=float)

    def estimate(r, num_sources):
        spectrum = music_spectrum(r, num_sources, grid, steering)
        return pick_music_peaks(spectrum, num_sources).angles

    return estimate


def ssmusic_estimator(cfg: ArrayConfig, subarray_len: int, grid_deg):
    """Forward/backward spatial smoothing followed by MUSIC on the subarray."""
    sub_cfg = ArrayConfig(subarray_len, cfg.spacing)
    steering = steering_function(sub_cfg)
    grid = np.asarray(grid_deg, dtype=float)

    def estimate(r, num_sources):
        return ss_music(r, num_sources, subarray_len, grid, steering).angles

    return estimate
