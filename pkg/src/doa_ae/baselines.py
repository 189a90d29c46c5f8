"""Subspace baselines: Hermitian eigensolver, MUSIC, and spatial smoothing.

The eigensolver is a cyclic complex Jacobi iteration: each sweep annihilates
every off-diagonal pair through a phased plane rotation, which converges
quadratically for Hermitian input. MUSIC projects steering vectors onto the
noise subspace; forward/backward spatial smoothing averages sliding subarray
covariances (plus the exchange-conjugated mirror) to restore the rank that
coherent multipath removes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


class EigNonConvergence(Exception):
    """The Jacobi sweep limit was hit before reaching the target accuracy."""


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in descending order with matching orthonormal columns."""

    values: np.ndarray    # (M,) real
    vectors: np.ndarray   # (M, M) complex, column i pairs with values[i]


def _offdiag_norm(a):
    off = a - np.diag(np.diag(a))
    return np.linalg.norm(off)


def hermitian_eig(r: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius mass drops below tol * ||R||_F;
    hitting the sweep limit first raises EigNonConvergence rather than
    returning a half-converged result.
    """
    a = np.array(r, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > 1e-10 * max(scale, 1.0):
        raise ValueError("matrix is not Hermitian")
    a = (a + a.conj().T) / 2.0
    v = np.eye(n, dtype=complex)
    if scale == 0.0:
        return EigenDecomposition(np.zeros(n), v)
    converged = False
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= tol * scale:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                # Phase out apq, then apply the classic symmetric rotation.
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = 1.0 / (tau + np.sqrt(1.0 + tau * tau)) if tau >= 0 \
                    else 1.0 / (tau - np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # Unitary U: U[p,p]=c, U[p,q]=s, U[q,p]=-s*conj(phase),
                # U[q,q]=c*conj(phase); A <- U^H A U, V <- V U.
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * col_p + c * np.conj(phase) * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - s * np.conj(phase) * vcol_q
                v[:, q] = s * vcol_p + c * np.conj(phase) * vcol_q
    else:
        converged = _offdiag_norm(a) <= tol * scale
    if not converged:
        raise EigNonConvergence(
            f"off-diagonal mass {_offdiag_norm(a):.3e} above {tol * scale:.3e} "
            f"after {max_sweeps} sweeps"
        )
    values = np.diag(a).real
    order = np.argsort(values)[::-1]
    vals = values[order]
    vecs = v[:, order]
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return EigenDecomposition(vals, vecs)


@dataclass(frozen=True, eq=False)
class MusicSpectrum:
    grid: np.ndarray     # degrees
    values: np.ndarray   # pseudospectrum, finite and positive


def music_spectrum(r: np.ndarray, num_sources: int, grid_deg, steering) -> MusicSpectrum:
    """1 / ||E_n^H a(theta)||^2 over the grid, E_n the noise subspace."""
    m = np.asarray(r).shape[0]
    if not 1 <= num_sources < m:
        raise ValueError(f"need 1 <= K < M, got K={num_sources}, M={m}")
    eig = hermitian_eig(r)
    noise = eig.vectors[:, num_sources:]
    grid = np.asarray(grid_deg, dtype=float)
    a = np.column_stack([steering(theta) for theta in grid])
    denom = np.sum(np.abs(noise.conj().T @ a) ** 2, axis=0)
    values = 1.0 / np.maximum(denom, np.finfo(float).tiny)
    return MusicSpectrum(grid, values)


@dataclass(frozen=True)
class MusicEstimate:
    angles: np.ndarray    # ascending, length K
    degenerate: bool      # True when fewer than K local maxima existed


def pick_music_peaks(spectrum: MusicSpectrum, num_sources: int) -> MusicEstimate:
    """K largest strict local maxima; pad from the largest leftover grid
    values (flagging the result as degenerate) when the spectrum has fewer."""
    p = spectrum.values
    peak_idx = [i for i in range(1, len(p) - 1) if p[i] > p[i - 1] and p[i] > p[i + 1]]
    peak_idx.sort(key=lambda i: p[i], reverse=True)
    chosen = peak_idx[:num_sources]
    degenerate = len(chosen) < num_sources
    if degenerate:
        taken = set(chosen)
        for i in np.argsort(p)[::-1]:
            if len(chosen) == num_sources:
                break
            if int(i) not in taken:
                chosen.append(int(i))
                taken.add(int(i))
    angles = np.sort(spectrum.grid[chosen])
    return MusicEstimate(angles, degenerate)


def fb_spatial_smooth(r: np.ndarray, subarray_len: int) -> np.ndarray:
    """Forward/backward smoothed covariance over sliding subarrays of length L."""
    r = np.asarray(r)
    m = r.shape[0]
    if not 1 < subarray_len <= m:
        raise ValueError(f"subarray length must lie in (1, {m}], got {subarray_len}")
    count = m - subarray_len + 1
    rf = np.zeros((subarray_len, subarray_len), dtype=complex)
    for i in range(count):
        rf += r[i: i + subarray_len, i: i + subarray_len]
    rf /= count
    rfb = 0.5 * (rf + np.flip(rf).conj())
    return (rfb + rfb.conj().T) / 2.0


def ss_music(r: np.ndarray, num_sources: int, subarray_len: int, grid_deg,
             subarray_steering) -> MusicEstimate:
    """Spatial smoothing followed by MUSIC on the L-element subarray."""
    if num_sources >= subarray_len:
        raise ValueError("the subarray must be longer than the source count")
    smoothed = fb_spatial_smooth(r, subarray_len)
    spectrum = music_spectrum(smoothed, num_sources, grid_deg, subarray_steering)
    return pick_music_peaks(spectrum, num_sources)


def write_spectrum_csv(path, spectrum: MusicSpectrum, log10: bool = False):
    """Two columns: angle_deg and the (optionally log10) pseudospectrum."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["angle_deg", "log10_pseudospectrum" if log10 else "pseudospectrum"])
        values = np.log10(spectrum.values) if log10 else spectrum.values
        for angle, value in zip(spectrum.grid, values):
            writer.writerow([f"{angle:.6g}", f"{value:.12g}"])
