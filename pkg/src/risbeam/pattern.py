"""Far-field radiation patterns of a configured surface and their metrics."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .geometry import PhaseProfile, RisGeometry

NORMAL_INCIDENCE = (math.pi / 2, 0.0)
FLOOR_DB = -300.0


class PatternError(ValueError):
    pass


def _array_factor(geom: RisGeometry, coeffs: np.ndarray, theta: np.ndarray, phi: np.ndarray,
                  incidence: tuple[float, float], element_factor: bool, exponent: float) -> np.ndarray:
    th_in, ph_in = incidence
    k = geom.wavenumber
    u_z = np.cos(theta) - math.cos(th_in)
    u_y = np.sin(theta) * np.sin(phi) - math.sin(th_in) * math.sin(ph_in)
    m = np.arange(geom.rows_z)
    n = np.arange(geom.cols_y)
    # separate z and y phase tables keep this O(angles * (M + N)) before the contraction
    ez = np.exp(1j * k * geom.spacing_z * u_z[:, None] * m[None, :])
    ey = np.exp(1j * k * geom.spacing_y * u_y[:, None] * n[None, :])
    af = np.einsum("am,mn,an->a", ez, coeffs, ey)
    if element_factor:
        cos_ref = np.sin(theta) * np.cos(phi)
        cos_inc = abs(math.sin(th_in) * math.cos(ph_in))
        ef = np.where(cos_ref > 0, np.abs(cos_inc * cos_ref), 0.0) ** exponent
        af = af * ef
    return af


def array_factor(geom: RisGeometry, profile: PhaseProfile, theta, phi, incidence=NORMAL_INCIDENCE,
                 element_factor: bool = True, exponent: float = 0.5):
    """Complex far-field sum over elements at ``(theta, phi)`` (scalars or arrays).

    ``incidence`` is the direction a uniform profile reflects into (the
    specular direction of the incident wave); ``(pi/2, 0)`` is normal
    incidence. The optional element factor is
    ``(cos_inc * cos_ref) ** exponent`` with both cosines taken from the
    surface normal.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    ph = np.atleast_1d(np.asarray(phi, dtype=float))
    th, ph = np.broadcast_arrays(th, ph)
    out = _array_factor(geom, np.asarray(profile.coefficients), th.ravel(), ph.ravel(), incidence,
                        element_factor, exponent).reshape(th.shape)
    if np.ndim(theta) == 0 and np.ndim(phi) == 0:
        return complex(out.ravel()[0])
    return out


@dataclass(frozen=True)
class CutSpec:
    """``azimuth`` sweeps phi at fixed theta; ``zenith`` sweeps theta at fixed phi (degrees)."""

    kind: str = "azimuth"
    fixed_deg: float = 90.0
    start_deg: float = -90.0
    stop_deg: float = 90.0

    def __post_init__(self):
        if self.kind not in ("azimuth", "zenith"):
            raise ValueError(f"unknown cut kind {self.kind!r}")
        if not self.stop_deg > self.start_deg:
            raise PatternError("empty angular span")


@dataclass(frozen=True, eq=False)
class RadiationPattern:
    cut: CutSpec
    angles_deg: np.ndarray
    gain_db: np.ndarray          # normalized, peak = 0 dB
    peak_db: float               # 20 log10 of the un-normalized peak |AF|
    geometry: RisGeometry
    profile: PhaseProfile
    incidence: tuple[float, float]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("angle_deg,gain_db\n")
        for a, g in zip(self.angles_deg, self.gain_db):
            buf.write(f"{a:.4f},{g:.4f}\n")
        return buf.getvalue()


def compute_cut(geom: RisGeometry, profile: PhaseProfile, cut: CutSpec = CutSpec(), incidence=NORMAL_INCIDENCE,
                step_deg: float = 0.1, element_factor: bool = True, exponent: float = 0.5) -> RadiationPattern:
    if not 0 < step_deg <= 0.1 + 1e-12:
        raise PatternError(f"step must be in (0, 0.1] degrees, got {step_deg}")
    count = int(round((cut.stop_deg - cut.start_deg) / step_deg)) + 1
    angles = cut.start_deg + step_deg * np.arange(count)
    # integer-step construction avoids drift; snap the last sample onto the stop angle
    angles[-1] = min(angles[-1], cut.stop_deg)
    rad = np.radians(angles)
    fixed = math.radians(cut.fixed_deg)
    if cut.kind == "azimuth":
        theta, phi = np.full_like(rad, fixed), rad
    else:
        theta, phi = rad, np.full_like(rad, fixed)
    mag = np.abs(_array_factor(geom, np.asarray(profile.coefficients), theta, phi, incidence, element_factor, exponent))
    peak = float(mag.max())
    if peak == 0.0:
        raise PatternError("pattern is identically zero")
    with np.errstate(divide="ignore"):
        gain = np.maximum(20 * np.log10(mag / peak), FLOOR_DB)
    return RadiationPattern(cut, angles, gain, 20 * math.log10(peak), geom, profile, incidence)


def compute_grid(geom: RisGeometry, profile: PhaseProfile, thetas_deg, phis_deg, incidence=NORMAL_INCIDENCE,
                 element_factor: bool = True, exponent: float = 0.5) -> np.ndarray:
    """Normalized dB pattern on a full ``theta x phi`` grid."""
    th, ph = np.meshgrid(np.radians(thetas_deg), np.radians(phis_deg), indexing="ij")
    mag = np.abs(_array_factor(geom, np.asarray(profile.coefficients), th.ravel(), ph.ravel(), incidence,
                               element_factor, exponent)).reshape(th.shape)
    with np.errstate(divide="ignore"):
        return np.maximum(20 * np.log10(mag / mag.max()), FLOOR_DB)


@dataclass(frozen=True)
class PatternMetrics:
    peak_angle_deg: float
    beamwidth_3db_deg: float
    sidelobe_level_db: float     # -inf when no sample lies outside the main lobe
    peak_db: float
    scan_range_deg: float | None = None


def _crossing(angles: np.ndarray, gain: np.ndarray, start: int, step: int, level: float) -> float | None:
    i = start
    while 0 <= i + step < len(gain):
        j = i + step
        if gain[j] < level:
            # linear interpolation between the bracketing samples
            t = (gain[i] - level) / (gain[i] - gain[j])
            return float(angles[i] + t * (angles[j] - angles[i]))
        i = j
    return None


def _main_lobe_edge(gain: np.ndarray, start: int, step: int) -> int:
    """First local minimum below -10 dB walking away from the peak (or the span edge)."""
    i = start
    while 0 <= i + step < len(gain):
        j = i + step
        nxt = j + step
        if gain[j] <= -10.0 and (not 0 <= nxt < len(gain) or gain[nxt] >= gain[j]):
            return j
        i = j
    return i


def extract_metrics(pattern: RadiationPattern) -> PatternMetrics:
    ang, g = pattern.angles_deg, pattern.gain_db
    if len(ang) > 1 and (ang[1] - ang[0]) > 0.1 + 1e-9:
        raise PatternError("pattern sampled too coarsely for metric extraction")
    ipk = int(np.argmax(g))
    left = _crossing(ang, g, ipk, -1, -3.0)
    right = _crossing(ang, g, ipk, +1, -3.0)
    if left is None or right is None:
        raise PatternError("no -3 dB crossing on both sides of the peak (pattern too flat)")
    lo = _main_lobe_edge(g, ipk, -1)
    hi = _main_lobe_edge(g, ipk, +1)
    outside = np.concatenate([g[:lo], g[hi + 1:]])
    sll = float(outside.max()) if outside.size else -math.inf
    return PatternMetrics(float(ang[ipk]), right - left, sll, pattern.peak_db)


def is_resolvable(pattern: RadiationPattern, command_deg: float) -> bool:
    """Main lobe has both -3 dB crossings and peaks within one beamwidth of the command."""
    try:
        m = extract_metrics(pattern)
    except PatternError:
        return False
    return abs(m.peak_angle_deg - command_deg) <= m.beamwidth_3db_deg


def scan_range(patterns: dict[float, RadiationPattern]) -> float:
    """Span between the extreme commanded angles whose main lobes are resolvable."""
    ok = [c for c, p in patterns.items() if is_resolvable(p, c)]
    return max(ok) - min(ok) if ok else 0.0


def uniform_aperture_beamwidth_deg(n_elements: int, spacing: float, wavelength: float) -> float:
    """Classical broadside half-power width ``0.886 lambda / (N d)``."""
    return math.degrees(0.886 * wavelength / (n_elements * spacing))
