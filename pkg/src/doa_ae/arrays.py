"""Uniform linear array geometry: ideal and imperfection-perturbed steering vectors.

Distances are measured in wavelengths throughout, so an element spacing of
0.5 means half-wavelength spacing. Angles on the public interfaces are in
degrees measured from broadside; conversion to radians happens internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Coupling coefficient between adjacent elements used by the stock error model.
DEFAULT_COUPLING_GAMMA = 0.3 * np.exp(1j * np.pi / 3)


@dataclass(frozen=True)
class ArrayConfig:
    """A uniform linear array with elements at m * spacing, m = 0..M-1."""

    num_elements: int
    spacing: float = 0.5  # element spacing over wavelength (d / lambda)

    def __post_init__(self):
        if self.num_elements < 2:
            raise ValueError(f"need at least 2 elements, got {self.num_elements}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def positions(self) -> np.ndarray:
        """Nominal element positions in wavelengths."""
        return np.arange(self.num_elements) * self.spacing


@dataclass(frozen=True)
class ImperfectionWeights:
    """Per-error-type weights in [0, 1]; 0 switches an error off entirely."""

    gain: float = 1.0
    phase: float = 1.0
    position: float = 1.0
    coupling: float = 1.0

    def __post_init__(self):
        for name in ("gain", "phase", "position", "coupling"):
            w = getattr(self, name)
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"{name} weight must lie in [0, 1], got {w}")

    @classmethod
    def none(cls) -> "ImperfectionWeights":
        return cls(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True, eq=False)
class ImperfectionModel:
    """Fixed error vectors of one physical array realization.

    The first element is the reference: its gain/phase/position errors are
    zero by convention. ``coupling`` is the full M x M mutual-coupling matrix,
    Toeplitz in the element separation |i - k| with parameter vector ``e_mc``.
    """

    e_gain: np.ndarray   # relative gain error per element
    e_phase: np.ndarray  # phase error per element, radians
    e_pos: np.ndarray    # position error per element, wavelengths
    e_mc: np.ndarray     # coupling coefficients by element separation
    gamma: complex       # adjacent-element coupling coefficient
    coupling: np.ndarray  # M x M Toeplitz matrix built from e_mc

    @property
    def num_elements(self) -> int:
        return self.e_gain.shape[0]

    @classmethod
    def from_vectors(cls, e_gain, e_phase, e_pos, e_mc, gamma=DEFAULT_COUPLING_GAMMA):
        """Build a model from caller-supplied error vectors (any M >= 2)."""
        e_gain = np.asarray(e_gain, dtype=float)
        e_phase = np.asarray(e_phase, dtype=float)
        e_pos = np.asarray(e_pos, dtype=float)
        e_mc = np.asarray(e_mc, dtype=complex)
        m = e_gain.shape[0]
        if not (e_phase.shape == e_pos.shape == e_mc.shape == (m,)):
            raise ValueError("all error vectors must share the same length")
        if m < 2:
            raise ValueError("error vectors must cover at least 2 elements")
        for name, vec in (("e_gain", e_gain), ("e_phase", e_phase),
                          ("e_pos", e_pos), ("e_mc", e_mc)):
            if vec[0] != 0:
                raise ValueError(f"{name}[0] must be 0 (reference element)")
        sep = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
        coupling = e_mc[sep]
        for arr in (e_gain, e_phase, e_pos, e_mc, coupling):
            arr.flags.writeable = False
        return cls(e_gain, e_phase, e_pos, e_mc, complex(gamma), coupling)


def build_imperfection_model(cfg: ArrayConfig, gamma=DEFAULT_COUPLING_GAMMA) -> ImperfectionModel:
    """Stock error model: blocks of +/-0.2 gain, -/+30 deg phase, -/+0.2 d
    position offsets over the two array halves, and geometrically decaying
    mutual coupling gamma^|i-k|.

    The block patterns are defined for even M only; for other layouts supply
    explicit vectors via ``ImperfectionModel.from_vectors``.
    """
    m = cfg.num_elements
    if m % 2:
        raise ValueError(
            f"stock error patterns require an even element count, got {m}; "
            "use ImperfectionModel.from_vectors for custom arrays"
        )
    half = m // 2
    e_gain = np.concatenate(([0.0], np.full(half, 0.2), np.full(half - 1, -0.2)))
    e_phase = np.concatenate(([0.0], np.full(half, -np.pi / 6), np.full(half - 1, np.pi / 6)))
    e_pos = np.concatenate(([0.0], np.full(half, -0.2), np.full(half - 1, 0.2))) * cfg.spacing
    e_mc = np.concatenate(([0.0 + 0.0j], np.asarray(gamma, dtype=complex) ** np.arange(1, m)))
    return ImperfectionModel.from_vectors(e_gain, e_phase, e_pos, e_mc, gamma)


def _check_angle(theta_deg):
    if not -90.0 < theta_deg < 90.0:
        raise ValueError(f"angle must lie strictly inside (-90, 90) degrees, got {theta_deg}")


def _steering_from_positions(theta_deg, positions):
    m = positions.shape[0]
    phase = -2j * np.pi * positions * np.sin(np.deg2rad(theta_deg))
    return np.exp(phase) / np.sqrt(m)


def ideal_steering(theta_deg: float, cfg: ArrayConfig) -> np.ndarray:
    """Imperfection-free steering vector, unit norm (elements 1/sqrt(M))."""
    _check_angle(theta_deg)
    return _steering_from_positions(theta_deg, cfg.positions)


def imperfect_steering(theta_deg: float, cfg: ArrayConfig,
                       weights: ImperfectionWeights,
                       model: ImperfectionModel) -> np.ndarray:
    """Array response including weighted gain/phase/position/coupling errors.

    Position errors displace the element inside the phase term; gain and
    phase errors scale each element; mutual coupling mixes neighboring
    elements. With all weights zero this reduces to ``ideal_steering``.
    """
    _check_angle(theta_deg)
    if model.num_elements != cfg.num_elements:
        raise ValueError(
            f"model built for {model.num_elements} elements, array has {cfg.num_elements}"
        )
    v = _steering_from_positions(theta_deg, cfg.positions + weights.position * model.e_pos)
    v = np.exp(1j * weights.phase * model.e_phase) * v
    v = (1.0 + weights.gain * model.e_gain) * v
    return v + weights.coupling * (model.coupling @ v)


def steering_function(cfg: ArrayConfig, weights=None, model=None):
    """Closure mapping angle (degrees) to a steering vector.

    With ``weights`` and ``model`` both given the closure produces the
    perturbed response; with neither, the ideal one.
    """
    if (weights is None) != (model is None):
        raise ValueError("supply both weights and model, or neither")
    if weights is None:
        return lambda theta_deg: ideal_steering(theta_deg, cfg)
    return lambda theta_deg: imperfect_steering(theta_deg, cfg, weights, model)
