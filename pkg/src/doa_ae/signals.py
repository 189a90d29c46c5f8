"""Source waveforms, array snapshots, and covariance matrices.

Sources have unit nominal power; the per-element noise power is
sigma^2 = 10^(-snr_db / 10), so SNR is defined per source against per-element
noise. A coherent scene makes every waveform a scaled, phase-shifted replica
of the first one, which collapses the noise-free covariance to rank one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SourceScene:
    """K far-field sources observed over N snapshots.

    ``coherence`` is either None (independent waveforms) or a tuple of
    (amplitude, phase-radians) pairs, one per source, with the first pair
    fixed at (1, 0) as the reference path.
    """

    angles: tuple
    snr_db: float = 10.0
    num_snapshots: int = 800
    coherence: tuple | None = None

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        object.__setattr__(self, "angles", angles)
        if len(angles) < 1:
            raise ValueError("a scene needs at least one source")
        for a in angles:
            if not -90.0 < a < 90.0:
                raise ValueError(f"source angle {a} outside (-90, 90) degrees")
        if self.num_snapshots < 1:
            raise ValueError("num_snapshots must be positive")
        if self.coherence is not None:
            coh = tuple((float(g), float(p)) for g, p in self.coherence)
            object.__setattr__(self, "coherence", coh)
            if len(coh) != len(angles):
                raise ValueError("coherence must list one (amplitude, phase) per source")
            if coh[0] != (1.0, 0.0):
                raise ValueError("the first source is the reference path: amplitude 1, phase 0")
            if any(g <= 0 for g, _ in coh):
                raise ValueError("coherent amplitude factors must be positive")

    @property
    def num_sources(self) -> int:
        return len(self.angles)

    @property
    def noise_power(self) -> float:
        """Per-element noise variance sigma^2; 0 for an infinite SNR."""
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return 10.0 ** (-self.snr_db / 10.0)


def random_coherence(num_sources, rng) -> tuple:
    """Draw per-path amplitudes U[0.5, 1] and phases U[0, 2pi); path 1 is (1, 0)."""
    pairs = [(1.0, 0.0)]
    for _ in range(num_sources - 1):
        pairs.append((float(rng.uniform(0.5, 1.0)), float(rng.uniform(0.0, 2.0 * np.pi))))
    return tuple(pairs)


def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def gen_waveforms(scene: SourceScene, rng) -> np.ndarray:
    """K x N transmit waveforms, unit power per source.

    Coherent scenes draw a single circular complex Gaussian waveform and
    replicate it per path as g_k * exp(j phi_k) * x_1; otherwise all K
    waveforms are drawn independently.
    """
    k, n = scene.num_sources, scene.num_snapshots
    if scene.coherence is None:
        return _complex_gaussian(rng, (k, n))
    x1 = _complex_gaussian(rng, n)
    factors = np.array([g * np.exp(1j * p) for g, p in scene.coherence])
    return np.outer(factors, x1)


def synthesize_snapshots(scene: SourceScene, steering, rng) -> np.ndarray:
    """M x N snapshot matrix: steered waveforms plus circular Gaussian noise."""
    a = np.column_stack([steering(theta) for theta in scene.angles])
    z = a @ gen_waveforms(scene, rng)
    sigma2 = scene.noise_power
    if sigma2 > 0:
        z = z + np.sqrt(sigma2) * _complex_gaussian(rng, z.shape)
    return z


def sample_covariance(snapshots: np.ndarray) -> np.ndarray:
    """(1/N) Z Z^H, re-symmetrized to kill rounding asymmetry."""
    z = np.asarray(snapshots)
    if z.ndim != 2 or z.shape[1] < 1:
        raise ValueError("snapshot matrix must be M x N with N >= 1")
    r = z @ z.conj().T / z.shape[1]
    return (r + r.conj().T) / 2.0


def ideal_covariance(angles, powers, sigma2, steering, coherence=None) -> np.ndarray:
    """Asymptotic (infinite-snapshot) covariance.

    Independent sources: sum_k p_k a_k a_k^H + sigma^2 I. A coherent group
    instead contributes the rank-one outer product of
    sum_k sqrt(p_k) g_k exp(j phi_k) a_k.
    """
    angles = [float(a) for a in angles]
    powers = np.asarray(powers, dtype=float)
    if powers.shape != (len(angles),):
        raise ValueError("powers must list one value per angle")
    if np.any(powers < 0):
        raise ValueError("source powers must be non-negative")
    if sigma2 < 0:
        raise ValueError("noise power must be non-negative")
    vectors = [np.asarray(steering(a)) for a in angles]
    m = vectors[0].shape[0] if vectors else np.asarray(steering(0.0)).shape[0]
    r = sigma2 * np.eye(m, dtype=complex)
    if coherence is not None:
        if len(coherence) != len(angles):
            raise ValueError("coherence must list one (amplitude, phase) per source")
        composite = np.zeros(m, dtype=complex)
        for (g, phi), p, a in zip(coherence, powers, vectors):
            composite += np.sqrt(p) * g * np.exp(1j * phi) * a
        r = r + np.outer(composite, composite.conj())
    else:
        for p, a in zip(powers, vectors):
            r = r + p * np.outer(a, a.conj())
    return (r + r.conj().T) / 2.0
