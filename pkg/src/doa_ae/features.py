"""Covariance features: the strict upper triangle, real-stacked and normalized.

An M x M Hermitian covariance carries its cross-correlation information in
the off-diagonal entries. The feature pipeline scans the strict upper
triangle row by row (M(M-1)/2 complex values), stacks real parts over
imaginary parts (M(M-1) reals), and scales to unit Euclidean norm.
"""

from __future__ import annotations

import numpy as np


def extract_upper(r: np.ndarray) -> np.ndarray:
    """Row-major scan of the strict upper triangle: r_12, r_13, ..., r_{M-1,M}."""
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] < 2:
        raise ValueError("expected a square matrix of size >= 2")
    return r[np.triu_indices(r.shape[0], k=1)]


def to_real(rhat: np.ndarray) -> np.ndarray:
    """[Re ; Im] stacking of a complex vector (length doubles)."""
    rhat = np.asarray(rhat)
    return np.concatenate([rhat.real, rhat.imag]).astype(float)


def to_complex(v: np.ndarray) -> np.ndarray:
    """Inverse of ``to_real``: first half + j * second half."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] % 2:
        raise ValueError(f"expected an even-length vector, got shape {v.shape}")
    half = v.shape[0] // 2
    return v[:half] + 1j * v[half:]


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale to unit Euclidean norm; the zero vector has no direction."""
    v = np.asarray(v)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize a zero vector")
    return v / norm


def covariance_features(r: np.ndarray, unit_norm: bool = True) -> np.ndarray:
    """Real feature vector of length M(M-1) from a covariance matrix."""
    v = to_real(extract_upper(r))
    return normalize(v) if unit_norm else v


def template(theta_deg: float, steering) -> np.ndarray:
    """Noise-free single-source covariance signature at the given angle.

    This is the unit-norm feature vector of a(theta) a(theta)^H; it doubles
    as the training label content and as the scan-template bank entry.
    """
    a = np.asarray(steering(theta_deg))
    r = np.outer(a, a.conj())
    # same symmetrization as the covariance builders, for bit-exact agreement
    return covariance_features((r + r.conj().T) / 2.0)
