"""Subregion partition, single-source training set, and the training loop.

The scan range splits into J equal subregions; each network decoder owns one.
A training sample is the noisy covariance feature vector of a single source
on a fine angle grid, labeled with the block-sparse concatenation that puts
the clean (noise-free) signature of that angle into the owning decoder's
block and zeros everywhere else. The network therefore learns to de-noise
and to route by subregion at the same time.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .features import covariance_features, template
from .network import (
    DivergenceError,
    ModelChecksumError,
    ModelFormatError,
    ModelTruncatedError,
    ModelVersionError,
    NetworkParams,
    NetworkSpec,
    RmspropState,
    backward,
    forward,
    init_network,
    loss,
    rmsprop_step,
)
from .signals import SourceScene, sample_covariance, synthesize_snapshots

_DATASET_MAGIC = b"DOADS001"


@dataclass(frozen=True)
class SubregionPartition:
    """J+1 equally spaced boundaries over the scan range, in degrees."""

    boundaries: tuple

    def __post_init__(self):
        bounds = tuple(float(b) for b in self.boundaries)
        object.__setattr__(self, "boundaries", bounds)
        if len(bounds) < 2:
            raise ValueError("a partition needs at least two boundaries")
        gaps = np.diff(bounds)
        if np.any(gaps <= 0):
            raise ValueError("boundaries must be strictly increasing")
        if np.max(np.abs(gaps - gaps[0])) > 1e-9:
            raise ValueError("subregions must have equal width")

    @property
    def num_regions(self) -> int:
        return len(self.boundaries) - 1

    @property
    def theta_min(self) -> float:
        return self.boundaries[0]

    @property
    def theta_max(self) -> float:
        return self.boundaries[-1]


def build_partition(theta_min, theta_max, num_regions) -> SubregionPartition:
    if theta_min >= theta_max:
        raise ValueError(f"inverted range [{theta_min}, {theta_max}]")
    if num_regions < 1:
        raise ValueError("need at least one subregion")
    return SubregionPartition(tuple(np.linspace(theta_min, theta_max, num_regions + 1)))


def subregion_of(theta_deg, partition: SubregionPartition) -> int:
    """1-based subregion index; bins are [lo, hi) except the last, which is closed."""
    b = partition.boundaries
    if not b[0] <= theta_deg <= b[-1]:
        raise ValueError(f"angle {theta_deg} outside partition range [{b[0]}, {b[-1]}]")
    if theta_deg == b[-1]:
        return len(b) - 1
    return int(np.searchsorted(np.asarray(b), theta_deg, side="right"))


@dataclass(frozen=True)
class TrainingConfig:
    """Dataset and optimizer settings.

    ``snr_db`` is either one value or a list; a list mixes noise levels
    across samples (each sample draws one uniformly from its own stream),
    which keeps the network honest at test SNRs away from a single training
    point. ``unit_norm`` rescales inputs to unit norm; off by default so a
    multi-source scene presents each source at its natural per-path power,
    which is the scale the detection threshold is calibrated against.
    """

    num_samples: int = 1200
    grid_step: float = 0.1        # degrees between consecutive training angles
    num_snapshots: int = 800
    snr_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    batch_size: int = 100
    epochs: int = 1000
    learning_rate: float = 1e-3
    seed: int = 0
    label_mode: str = "clean"     # "clean": noise-free signature; "noisy": the input itself
    unit_norm: bool = False

    def __post_init__(self):
        snrs = self.snr_db if isinstance(self.snr_db, (tuple, list)) else (self.snr_db,)
        object.__setattr__(self, "snr_db", tuple(float(s) for s in snrs))
        if not self.snr_db:
            raise ValueError("need at least one training SNR")
        if min(self.num_samples, self.num_snapshots, self.batch_size, self.epochs) < 1:
            raise ValueError("counts must be positive")
        if self.grid_step <= 0 or self.learning_rate <= 0:
            raise ValueError("grid_step and learning_rate must be positive")
        if self.batch_size > self.num_samples:
            raise ValueError("batch size cannot exceed the sample count")
        if self.label_mode not in ("clean", "noisy"):
            raise ValueError(f"unknown label mode {self.label_mode!r}")


@dataclass(frozen=True)
class TrainingSample:
    input: np.ndarray        # noisy covariance features, length n
    label: np.ndarray        # block-sparse target, length J*n
    true_angle: float
    subregion_index: int     # 1-based


def training_angles(cfg: TrainingConfig, partition: SubregionPartition) -> np.ndarray:
    """Uniform grid theta_min + step*i, i = 1..I, tiling (theta_min, theta_max]."""
    angles = partition.theta_min + cfg.grid_step * np.arange(1, cfg.num_samples + 1)
    if angles[-1] > partition.theta_max + 1e-9:
        raise ValueError(
            f"{cfg.num_samples} samples at {cfg.grid_step} deg overrun the partition"
        )
    return angles


def gen_training_set(cfg: TrainingConfig, steering, partition: SubregionPartition):
    """Single-source samples over the training grid through the given array response.

    Each sample owns an independent RNG stream derived from (seed, sample
    index), so generation order does not affect the data.
    """
    num_regions = partition.num_regions
    samples = []
    for i, theta in enumerate(training_angles(cfg, partition)):
        rng = np.random.default_rng([cfg.seed, 1, i])
        snr_db = cfg.snr_db[rng.integers(len(cfg.snr_db))]
        scene = SourceScene((theta,), snr_db=snr_db, num_snapshots=cfg.num_snapshots)
        r = sample_covariance(synthesize_snapshots(scene, steering, rng))
        x = covariance_features(r, unit_norm=cfg.unit_norm)
        region = subregion_of(theta, partition)
        block = template(theta, steering) if cfg.label_mode == "clean" else x
        label = np.zeros(num_regions * x.shape[0])
        label[(region - 1) * x.shape[0]: region * x.shape[0]] = block
        samples.append(TrainingSample(x, label, float(theta), region))
    return samples


def train(samples, spec: NetworkSpec, cfg: TrainingConfig, progress=None):
    """Mini-batch RMSProp over shuffled epochs.

    Returns (params, history) where history holds the mean per-sample loss of
    each epoch. A non-finite loss aborts with a DivergenceError naming the
    epoch and batch. ``progress(epoch, mean_loss)`` is called per epoch when
    given.
    """
    if not samples:
        raise ValueError("no training samples")
    x = np.stack([s.input for s in samples])
    y = np.stack([s.label for s in samples])
    if x.shape[1] != spec.input_size or y.shape[1] != spec.output_size:
        raise ValueError("sample dimensions do not match the network spec")
    rng = np.random.default_rng([cfg.seed, 2])
    params = init_network(spec, rng)
    state = RmspropState.for_params(params, learning_rate=cfg.learning_rate)
    history = []
    count = x.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(count)
        epoch_loss = 0.0
        for start in range(0, count, cfg.batch_size):
            idx = order[start: start + cfg.batch_size]
            out, cache = forward(params, x[idx])
            batch_loss = loss(y[idx], out) / idx.size
            if not np.isfinite(batch_loss):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}"
                )
            grads = backward(params, cache, y[idx])
            rmsprop_step(params, grads, state)
            epoch_loss += batch_loss * idx.size
        mean_loss = epoch_loss / count
        history.append(mean_loss)
        if progress is not None:
            progress(epoch, mean_loss)
    return params, history


def save_dataset(samples, path):
    """Binary dataset cache mirroring the model-file conventions."""
    if not samples:
        raise ValueError("refusing to write an empty dataset")
    n = samples[0].input.shape[0]
    num_regions = samples[0].label.shape[0] // n
    header = _DATASET_MAGIC + struct.pack("<III", len(samples), n, num_regions)
    body = bytearray()
    for s in samples:
        record = np.concatenate(([s.true_angle, float(s.subregion_index)], s.input, s.label))
        body += np.ascontiguousarray(record, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(bytes(body))
        fh.write(struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF))


def load_dataset(path):
    """Read a dataset cache; raises the same error family as model loading."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_DATASET_MAGIC))
        if len(magic) != len(_DATASET_MAGIC):
            raise ModelTruncatedError("file ends inside magic bytes")
        if magic[:5] != _DATASET_MAGIC[:5]:
            raise ModelFormatError(f"not a dataset file (magic {magic!r})")
        if magic != _DATASET_MAGIC:
            raise ModelVersionError(f"unsupported dataset version {magic[5:]!r}")
        head = fh.read(12)
        if len(head) != 12:
            raise ModelTruncatedError("file ends inside header")
        count, n, num_regions = struct.unpack("<III", head)
        record_len = 2 + n + num_regions * n
        body = fh.read(8 * record_len * count)
        if len(body) != 8 * record_len * count:
            raise ModelTruncatedError(
                f"file ends inside records ({len(body)}/{8 * record_len * count} bytes)"
            )
        tail = fh.read(4)
        if len(tail) != 4:
            raise ModelTruncatedError("file ends inside checksum")
        (stored_crc,) = struct.unpack("<I", tail)
        if stored_crc != zlib.crc32(body) & 0xFFFFFFFF:
            raise ModelChecksumError("dataset payload checksum mismatch")
        if fh.read(1):
            raise ModelFormatError("trailing bytes after checksum")
    records = np.frombuffer(body, dtype="<f8").reshape(count, record_len)
    samples = []
    for row in records:
        samples.append(
            TrainingSample(
                input=row[2: 2 + n].copy(),
                label=row[2 + n:].copy(),
                true_angle=float(row[0]),
                subregion_index=int(row[1]),
            )
        )
    return samples
