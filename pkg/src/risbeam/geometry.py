"""Uniform planar array model of the surface.

Element ``(m, n)`` sits at ``(0, n * spacing_y, m * spacing_z)`` in the
surface-local frame: ``x`` is the surface normal, ``z`` the vertical (row)
axis, ``y`` the horizontal (column) axis. Angles are zenith ``theta`` from
``+z`` and azimuth ``phi`` from ``+x`` in the x-y plane, so broadside is
``(pi/2, 0)``.

Flattened vectors use the Kronecker order ``k = n * rows_z + m`` so that
``a = a_y kron a_z`` holds exactly and column ``n`` of a profile is the slice
``[n*M, (n+1)*M)`` of the vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RisGeometry:
    rows_z: int
    cols_y: int
    spacing_z: float
    spacing_y: float
    wavelength: float

    def __post_init__(self):
        if int(self.rows_z) != self.rows_z or self.rows_z < 1:
            raise ValueError(f"rows_z must be a positive integer, got {self.rows_z!r}")
        if int(self.cols_y) != self.cols_y or self.cols_y < 1:
            raise ValueError(f"cols_y must be a positive integer, got {self.cols_y!r}")
        for name in ("spacing_z", "spacing_y", "wavelength"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")

    @classmethod
    def half_wavelength(cls, rows_z: int, cols_y: int, wavelength: float) -> "RisGeometry":
        return cls(rows_z, cols_y, wavelength / 2, wavelength / 2, wavelength)

    @property
    def n_elements(self) -> int:
        return self.rows_z * self.cols_y

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    def element_positions(self) -> np.ndarray:
        """Local ``(x, y, z)`` of every element as an ``(M, N, 3)`` array."""
        m = np.arange(self.rows_z)[:, None]
        n = np.arange(self.cols_y)[None, :]
        pos = np.zeros((self.rows_z, self.cols_y, 3))
        pos[..., 1] = n * self.spacing_y
        pos[..., 2] = m * self.spacing_z
        return pos

    def center(self) -> np.ndarray:
        return np.array([0.0, (self.cols_y - 1) * self.spacing_y / 2, (self.rows_z - 1) * self.spacing_z / 2])


@dataclass(frozen=True)
class PhaseStateSet:
    """Allowed reflection coefficients: continuous unit phase, or a discrete list.

    ``states`` holds ``(amplitude, phase_rad)`` pairs for the discrete mode.
    """

    mode: str = "continuous"
    states: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.mode not in ("continuous", "discrete"):
            raise ValueError(f"unknown phase-state mode {self.mode!r}")
        if self.mode == "discrete":
            if len(self.states) < 2:
                raise ValueError("a discrete state set needs at least 2 states")
            for amp, ph in self.states:
                if not 0.0 <= amp <= 1.0:
                    raise ValueError(f"state amplitude {amp} outside [0, 1]")
                if not 0.0 <= ph < TWO_PI:
                    raise ValueError(f"state phase {ph} outside [0, 2*pi)")
        object.__setattr__(self, "states", tuple((float(a), float(p)) for a, p in self.states))

    @classmethod
    def continuous(cls) -> "PhaseStateSet":
        return cls("continuous")

    @classmethod
    def one_bit(cls) -> "PhaseStateSet":
        return cls("discrete", ((1.0, 0.0), (1.0, math.pi)))

    @classmethod
    def uniform(cls, bits: int) -> "PhaseStateSet":
        """``2**bits`` unit-amplitude states evenly spaced in phase."""
        k = 2**bits
        return cls("discrete", tuple((1.0, TWO_PI * i / k) for i in range(k)))

    @property
    def is_discrete(self) -> bool:
        return self.mode == "discrete"

    @property
    def bits(self) -> int:
        """Bits needed to index one state (0 for continuous)."""
        if not self.is_discrete:
            return 0
        return max(1, math.ceil(math.log2(len(self.states))))

    def coefficients(self) -> np.ndarray:
        if not self.is_discrete:
            raise ValueError("continuous state set has no coefficient list")
        return np.array([a * np.exp(1j * p) for a, p in self.states])

    def state_zero(self) -> complex:
        if self.is_discrete:
            return complex(self.coefficients()[0])
        return 1.0 + 0.0j


@dataclass(frozen=True, eq=False)
class SteeringVector:
    entries: np.ndarray
    geometry: RisGeometry
    angle: tuple[float, float] | None = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (self.geometry.n_elements,):
            raise ValueError(
                f"steering vector needs {self.geometry.n_elements} entries, got shape {entries.shape}"
            )
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """``rows_z x cols_y`` matrix of reflection coefficients (passive: ``|r| <= 1``)."""

    coefficients: np.ndarray
    geometry: RisGeometry
    states: PhaseStateSet | None = field(default=None)

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=complex)
        shape = (self.geometry.rows_z, self.geometry.cols_y)
        if coeffs.shape != shape:
            raise ValueError(f"profile shape {coeffs.shape} does not match geometry {shape}")
        if np.any(np.abs(coeffs) > 1.0 + 1e-12):
            raise ValueError("reflection coefficient magnitude exceeds 1")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def uniform(cls, geom: RisGeometry, value: complex = 1.0, states: PhaseStateSet | None = None):
        return cls(np.full((geom.rows_z, geom.cols_y), value, dtype=complex), geom, states)

    def phases(self) -> np.ndarray:
        return np.angle(self.coefficients)


def _check_angles(*angles: float) -> None:
    for a in angles:
        if not math.isfinite(a):
            raise ValueError(f"angle must be finite, got {a!r}")


def steering_vector_z(geom: RisGeometry, theta: float) -> np.ndarray:
    """Vertical (column) response, length ``rows_z``."""
    _check_angles(theta)
    m = np.arange(geom.rows_z)
    return np.exp(-1j * geom.wavenumber * geom.spacing_z * m * math.cos(theta))


def steering_vector_y(geom: RisGeometry, theta: float, phi: float) -> np.ndarray:
    """Horizontal (row) response, length ``cols_y``."""
    _check_angles(theta, phi)
    n = np.arange(geom.cols_y)
    return np.exp(-1j * geom.wavenumber * geom.spacing_y * n * math.sin(theta) * math.sin(phi))


def steering_vector(geom: RisGeometry, theta: float, phi: float) -> SteeringVector:
    """Full-surface array response at ``(theta, phi)``.

    Evaluated element by element from the phase formula, independently of the
    Kronecker composition, so the two can be checked against each other.
    """
    _check_angles(theta, phi)
    m = np.arange(geom.rows_z)[None, :]
    n = np.arange(geom.cols_y)[:, None]
    phase = -geom.wavenumber * (
        m * geom.spacing_z * math.cos(theta) + n * geom.spacing_y * math.sin(theta) * math.sin(phi)
    )
    # rows of `phase` are indexed by n, so ravel() yields k = n*M + m
    return SteeringVector(np.exp(1j * phase).ravel(), geom, (theta, phi))


def kronecker_compose(a_y: Sequence[complex], a_z: Sequence[complex], geom: RisGeometry | None = None,
                      angle: tuple[float, float] | None = None) -> SteeringVector:
    a_y = np.asarray(a_y, dtype=complex)
    a_z = np.asarray(a_z, dtype=complex)
    if a_y.ndim != 1 or a_z.ndim != 1:
        raise ValueError("kronecker_compose expects 1-D inputs")
    if geom is None:
        geom = RisGeometry(len(a_z), len(a_y), 0.5, 0.5, 1.0)
    elif (len(a_z), len(a_y)) != (geom.rows_z, geom.cols_y):
        raise ValueError(
            f"lengths (a_y={len(a_y)}, a_z={len(a_z)}) do not match geometry "
            f"(N={geom.cols_y}, M={geom.rows_z})"
        )
    return SteeringVector(np.kron(a_y, a_z), geom, angle)


def profile_from_vector(v: SteeringVector, states: PhaseStateSet | None = None) -> PhaseProfile:
    geom = v.geometry
    # column n <- entries [n*M, (n+1)*M)
    mat = np.asarray(v.entries).reshape(geom.cols_y, geom.rows_z).T
    return PhaseProfile(mat, geom, states)


def vector_from_profile(p: PhaseProfile) -> SteeringVector:
    return SteeringVector(np.asarray(p.coefficients).T.ravel(), p.geometry)


def nearest_state_indices(values: np.ndarray, states: PhaseStateSet) -> np.ndarray:
    """Index of the state closest in phase to each value; ties go to the lower index."""
    if not states.is_discrete or not states.states:
        raise ValueError("quantization needs a non-empty discrete state set")
    phases = np.angle(np.asarray(values, dtype=complex))
    state_ph = np.array([p for _, p in states.states])
    diff = np.abs(np.angle(np.exp(1j * (phases[..., None] - state_ph))))
    # argmin returns the first minimum; snap float jitter so exact ties stay ties
    diff = np.round(diff, 12)
    return np.argmin(diff, axis=-1)


def quantize_profile(profile: PhaseProfile, states: PhaseStateSet) -> PhaseProfile:
    idx = nearest_state_indices(profile.coefficients, states)
    return PhaseProfile(states.coefficients()[idx], profile.geometry, states)


def profile_state_indices(profile: PhaseProfile, states: PhaseStateSet, atol: float = 1e-9) -> np.ndarray:
    """Exact state index of every coefficient; raises if one is not a member of ``states``."""
    coeffs = states.coefficients()
    dist = np.abs(np.asarray(profile.coefficients)[..., None] - coeffs)
    idx = np.argmin(dist, axis=-1)
    if np.any(np.take_along_axis(dist, idx[..., None], axis=-1) > atol):
        raise ValueError("profile contains coefficients outside the state set")
    return idx


def direction(theta: float, phi: float) -> np.ndarray:
    """Unit vector for ``(theta, phi)`` in the surface-local frame."""
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def angles_of(vec: Sequence[float]) -> tuple[float, float]:
    """Inverse of :func:`direction` for a local-frame vector."""
    x, y, z = (float(c) for c in vec)
    r = math.sqrt(x * x + y * y + z * z)
    return math.acos(z / r), math.atan2(y, x)
