"""Spatial scanning of the trained network's decoder outputs.

Each decoder block, turned back into a complex vector, is correlated against
a bank of unit-norm single-source covariance signatures over a fine angle
grid; the magnitude of that inner product is the decoder's spatial gain.
Grid angles where a gain curve peaks above a threshold are the estimated
directions of arrival.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .features import covariance_features, template, to_complex
from .network import NetworkParams, forward
from .training import SubregionPartition


@dataclass(frozen=True)
class ScanConfig:
    """Scan grid, detection threshold, and template-bank choices.

    ``template_model`` picks the steering model behind the bank: "array"
    reuses the training-label signatures (the response the network was
    trained to reconstruct, errors included), "ideal" scans against the
    error-free response instead, as an ablation.
    """

    grid_step: float = 0.1
    threshold: float = 0.3
    template_model: str = "array"
    restrict_to_subregion: bool = True

    def __post_init__(self):
        if self.grid_step <= 0:
            raise ValueError("grid step must be positive")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must lie in (0, 1]")
        if self.template_model not in ("array", "ideal"):
            raise ValueError(f"unknown template model {self.template_model!r}")


@dataclass(frozen=True, eq=False)
class TemplateBank:
    """Unit-norm complex covariance signatures over a scan grid."""

    grid: np.ndarray       # (G,) angles in degrees
    templates: np.ndarray  # (G, M(M-1)/2) complex, unit-norm rows

    @classmethod
    def build(cls, grid_deg, steering):
        grid = np.array(grid_deg, dtype=float)
        templates = np.stack([to_complex(template(theta, steering)) for theta in grid])
        grid.flags.writeable = False
        templates.flags.writeable = False
        return cls(grid, templates)


def scan_grid(partition: SubregionPartition, step: float) -> np.ndarray:
    """Closed grid over the partition range, endpoint included."""
    count = int(round((partition.theta_max - partition.theta_min) / step))
    return partition.theta_min + step * np.arange(count + 1)


@dataclass(frozen=True)
class GainCurve:
    decoder: int           # 1-based decoder index
    grid: np.ndarray       # degrees
    gains: np.ndarray      # non-negative, same length as grid


@dataclass(frozen=True)
class Peak:
    angle: float
    gain: float
    decoder: int


@dataclass(frozen=True)
class DoaEstimate:
    """Detected peaks sorted by angle; possibly empty."""

    peaks: tuple

    @property
    def angles(self) -> np.ndarray:
        return np.array([p.angle for p in self.peaks])

    def __len__(self):
        return len(self.peaks)


def decoder_outputs(params: NetworkParams, x: np.ndarray):
    """Forward pass, output split into per-decoder blocks as complex vectors."""
    y, _ = forward(params, np.asarray(x, dtype=float))
    block = params.spec.block_size
    return [to_complex(y[j * block: (j + 1) * block])
            for j in range(params.spec.num_decoders)]


def gain_response(decoder_out, bank: TemplateBank, decoder: int) -> GainCurve:
    """|template(theta)^H y| over the bank's grid."""
    gains = np.abs(bank.templates.conj() @ np.asarray(decoder_out))
    return GainCurve(decoder, bank.grid, gains)


def _local_peak_indices(values: np.ndarray):
    """Strictly-greater-than-both-neighbors peaks; a flat run counts once, at
    its leftmost point, and endpoints never qualify."""
    idx = []
    n = len(values)
    i = 1
    while i < n - 1:
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if j < n - 1 and values[i] > values[i - 1] and values[i] > values[j + 1]:
            idx.append(i)
        i = j + 1
    return idx


def detect_peaks(curves, cfg: ScanConfig,
                 partition: SubregionPartition | None = None) -> DoaEstimate:
    """Thresholded local maxima across all decoders.

    When a partition is given (and restriction is on), decoder j only keeps
    peaks inside its own subregion widened by one grid step per side; a
    source near a boundary still lands in exactly one decoder's window.
    """
    grids = [tuple(np.round(c.grid, 9)) for c in curves]
    if len(set(grids)) > 1:
        raise ValueError("gain curves must share one scan grid")
    peaks = []
    for curve in curves:
        lo, hi = -np.inf, np.inf
        if cfg.restrict_to_subregion and partition is not None:
            slack = cfg.grid_step + 1e-9
            lo = partition.boundaries[curve.decoder - 1] - slack
            hi = partition.boundaries[curve.decoder] + slack
        for i in _local_peak_indices(curve.gains):
            angle, gain = float(curve.grid[i]), float(curve.gains[i])
            if gain >= cfg.threshold and lo <= angle <= hi:
                peaks.append(Peak(angle, gain, curve.decoder))
    return DoaEstimate(tuple(sorted(peaks, key=lambda p: p.angle)))


def gain_curves(r: np.ndarray, params: NetworkParams, bank: TemplateBank,
                unit_norm: bool = False):
    """Covariance matrix -> per-decoder gain curves over the bank's grid."""
    x = covariance_features(r, unit_norm=unit_norm)
    outputs = decoder_outputs(params, x)
    return [gain_response(y, bank, j + 1) for j, y in enumerate(outputs)]


def estimate_doa(r: np.ndarray, params: NetworkParams, bank: TemplateBank,
                 cfg: ScanConfig, partition: SubregionPartition | None = None,
                 unit_norm: bool = False) -> DoaEstimate:
    """Full pipeline: features -> decoders -> gain curves -> thresholded peaks."""
    return detect_peaks(gain_curves(r, params, bank, unit_norm=unit_norm), cfg, partition)


def write_gain_csv(path, curves):
    """One row per grid angle: angle_deg, g1..gJ."""
    if not curves:
        raise ValueError("no gain curves to write")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["angle_deg"] + [f"g{c.decoder}" for c in curves])
        for i, angle in enumerate(curves[0].grid):
            writer.writerow([f"{angle:.6g}"] + [f"{c.gains[i]:.12g}" for c in curves])
