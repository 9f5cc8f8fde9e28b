"""Codebook builders (angle grid, two-stage z/y, oversampled DFT) and the RISCB file format.

Codewords are stored as continuous-phase complex vectors; quantization to a
discrete state set happens when a codeword is dispatched to an oracle.

File format (``RISCB v1``), LF line endings::

    RISCB v1 kind=<kind> M=<int> N=<int> states=<continuous|k-bit>
    <index>,<theta_deg:%.6f>,<phi_deg:%.6f>,<payload>

The payload is either comma-separated phases in radians (``%.9f``) or, for
discrete states, uppercase hex of the packed state indices. Both are ordered
row-major by ``(m, n)``; bits are packed little-endian (element ``i`` occupies
bits ``[i*k, (i+1)*k)`` counting from the LSB of byte 0). DFT codewords carry
their bin indices ``(k_z, k_y)`` in the two angle columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import (
    PhaseProfile,
    PhaseStateSet,
    RisGeometry,
    SteeringVector,
    nearest_state_indices,
    profile_from_vector,
    steering_vector,
    steering_vector_y,
    steering_vector_z,
)

KINDS = ("angle2d", "z-stage", "y-stage", "composed", "dft")
FULL_KINDS = ("angle2d", "composed", "dft")


class CodebookFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class AngleGrid:
    """``q`` zenith and ``p`` azimuth angles in radians, both strictly increasing."""

    zeniths: tuple[float, ...]
    azimuths: tuple[float, ...]

    def __post_init__(self):
        z = tuple(float(a) for a in self.zeniths)
        a = tuple(float(x) for x in self.azimuths)
        if not z or not a:
            raise ValueError("angle grid needs at least one zenith and one azimuth")
        if any(not math.isfinite(v) for v in z + a):
            raise ValueError("angle grid contains non-finite angles")
        if any(b <= c for c, b in zip(z, z[1:])) or any(b <= c for c, b in zip(a, a[1:])):
            raise ValueError("angle grid must be strictly increasing")
        if any(not 0.0 <= t <= math.pi for t in z):
            raise ValueError("zeniths must lie in [0, pi]")
        if any(not -math.pi / 2 <= p <= math.pi / 2 for p in a):
            raise ValueError("azimuths must lie in [-pi/2, pi/2]")
        object.__setattr__(self, "zeniths", z)
        object.__setattr__(self, "azimuths", a)

    @property
    def q(self) -> int:
        return len(self.zeniths)

    @property
    def p(self) -> int:
        return len(self.azimuths)

    @classmethod
    def from_degrees(cls, zeniths: Sequence[float], azimuths: Sequence[float]) -> "AngleGrid":
        return cls(tuple(math.radians(z) for z in zeniths), tuple(math.radians(a) for a in azimuths))

    @classmethod
    def span(cls, zenith_deg=(50.0, 130.0), azimuth_deg=(-80.0, 80.0), step_deg=2.0) -> "AngleGrid":
        """Inclusive evenly stepped grid; the default covers a 160 degree scan range."""
        def steps(lo, hi):
            n = int(round((hi - lo) / step_deg)) + 1
            return [lo + i * step_deg for i in range(n)]
        return cls.from_degrees(steps(*zenith_deg), steps(*azimuth_deg))

    @classmethod
    def default(cls) -> "AngleGrid":
        return cls.span()


@dataclass(frozen=True, eq=False)
class Codebook:
    """Ordered codewords as rows of ``codewords``.

    Full-surface kinds hold length-``L`` vectors in Kronecker order; ``z-stage``
    rows have length ``M`` and ``y-stage`` rows length ``N``. ``labels`` are
    ``(theta, phi)`` in radians, or ``(k_z, k_y)`` bins for ``dft``.
    """

    kind: str
    geometry: RisGeometry
    codewords: np.ndarray
    labels: tuple[tuple[float, float], ...]
    states: PhaseStateSet | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown codebook kind {self.kind!r}")
        cw = np.array(self.codewords, dtype=complex)
        if cw.ndim != 2 or cw.shape[0] == 0:
            raise ValueError("codebook must hold at least one codeword")
        if cw.shape[1] != self.codeword_length:
            raise ValueError(f"{self.kind} codewords need length {self.codeword_length}, got {cw.shape[1]}")
        if len(self.labels) != cw.shape[0]:
            raise ValueError("one label per codeword required")
        cw.flags.writeable = False
        object.__setattr__(self, "codewords", cw)
        object.__setattr__(self, "labels", tuple((float(a), float(b)) for a, b in self.labels))

    @property
    def codeword_length(self) -> int:
        g = self.geometry
        return {"z-stage": g.rows_z, "y-stage": g.cols_y}.get(self.kind, g.n_elements)

    def __len__(self):
        return self.codewords.shape[0]

    def label_text(self, i: int) -> str:
        a, b = self.labels[i]
        if self.kind == "dft":
            return f"kz={int(a)};ky={int(b)}"
        return f"theta={math.degrees(a):.3f};phi={math.degrees(b):.3f}"

    def vector(self, i: int) -> SteeringVector:
        if self.kind not in FULL_KINDS:
            raise ValueError(f"{self.kind} codewords are not full-surface vectors")
        return SteeringVector(self.codewords[i], self.geometry, self.labels[i])

    def profile(self, i: int) -> PhaseProfile:
        """Codeword ``i`` as an ``M x N`` profile (stage codewords are tiled across the surface)."""
        g = self.geometry
        cw = self.codewords[i]
        if self.kind == "z-stage":
            return PhaseProfile(np.tile(cw[:, None], (1, g.cols_y)), g)
        if self.kind == "y-stage":
            return PhaseProfile(np.tile(cw[None, :], (g.rows_z, 1)), g)
        return profile_from_vector(self.vector(i))


def build_angle_codebook(geom: RisGeometry, grid: AngleGrid, incidence: tuple[float, float] | None = None) -> Codebook:
    """Zenith-major grid codebook: all azimuths for the first zenith, then the next.

    ``incidence`` optionally pre-compensates the phase gradient of a plane wave
    arriving from that ``(theta, phi)`` direction; off by default.
    """
    rows, labels = [], []
    comp = None
    if incidence is not None:
        comp = np.conj(steering_vector(geom, *incidence).entries)
    for theta in grid.zeniths:
        for phi in grid.azimuths:
            v = steering_vector(geom, theta, phi).entries
            rows.append(v * comp if comp is not None else v)
            labels.append((theta, phi))
    return Codebook("angle2d", geom, np.array(rows), tuple(labels))


def build_z_codebook(geom: RisGeometry, zeniths: Sequence[float]) -> Codebook:
    if len(zeniths) == 0:
        raise ValueError("z-stage codebook needs at least one zenith")
    # a_z(theta) tiled over columns equals a(theta, 0), hence the phi = 0 label
    rows = [steering_vector_z(geom, t) for t in zeniths]
    return Codebook("z-stage", geom, np.array(rows), tuple((float(t), 0.0) for t in zeniths))


def build_y_codebook(geom: RisGeometry, theta_selected: float, azimuths: Sequence[float]) -> Codebook:
    if len(azimuths) == 0:
        raise ValueError("y-stage codebook needs at least one azimuth")
    rows = [steering_vector_y(geom, theta_selected, p) for p in azimuths]
    return Codebook("y-stage", geom, np.array(rows), tuple((float(theta_selected), float(p)) for p in azimuths))


def compose_second_stage(y_stage: Codebook, a_z_selected: Sequence[complex]) -> Codebook:
    """Kronecker each y-stage codeword with the winning z-stage codeword."""
    if y_stage.kind != "y-stage":
        raise ValueError(f"expected a y-stage codebook, got {y_stage.kind}")
    a_z = np.asarray(a_z_selected, dtype=complex)
    geom = y_stage.geometry
    if a_z.shape != (geom.rows_z,):
        raise ValueError(f"a_z has length {a_z.shape}, geometry needs {geom.rows_z}")
    rows = [np.kron(a_y, a_z) for a_y in y_stage.codewords]
    return Codebook("composed", geom, np.array(rows), y_stage.labels)


def build_dft_codebook(geom: RisGeometry, oversampling_z: int = 1, oversampling_y: int = 1) -> Codebook:
    """Separable oversampled 2-D DFT beams, ordered ``k_z``-major."""
    if oversampling_z < 1 or oversampling_y < 1 or int(oversampling_z) != oversampling_z \
            or int(oversampling_y) != oversampling_y:
        raise ValueError("oversampling factors must be positive integers")
    M, N = geom.rows_z, geom.cols_y
    kz_count, ky_count = oversampling_z * M, oversampling_y * N
    m = np.arange(M)
    n = np.arange(N)
    rows, labels = [], []
    for kz in range(kz_count):
        col = np.exp(2j * np.pi * m * kz / kz_count)
        for ky in range(ky_count):
            row = np.exp(2j * np.pi * n * ky / ky_count)
            rows.append(np.kron(row, col))
            labels.append((kz, ky))
    return Codebook("dft", geom, np.array(rows), tuple(labels))


# --- serialization ---------------------------------------------------------

def pack_indices(indices: Sequence[int], bits: int) -> str:
    total = len(indices) * bits
    buf = bytearray((total + 7) // 8)
    for i, v in enumerate(indices):
        v = int(v)
        if not 0 <= v < 2**bits:
            raise ValueError(f"state index {v} does not fit in {bits} bits")
        for b in range(bits):
            if v >> b & 1:
                pos = i * bits + b
                buf[pos // 8] |= 1 << (pos % 8)
    return buf.hex().upper()


def unpack_indices(payload: str, count: int, bits: int) -> list[int]:
    try:
        raw = bytes.fromhex(payload)
    except ValueError as exc:
        raise ValueError(f"payload is not valid hex: {exc}") from None
    if len(raw) != (count * bits + 7) // 8:
        raise ValueError(f"payload holds {len(raw)} bytes, expected {(count * bits + 7) // 8}")
    out = []
    for i in range(count):
        v = 0
        for b in range(bits):
            pos = i * bits + b
            v |= (raw[pos // 8] >> (pos % 8) & 1) << b
        out.append(v)
    return out


def _row_major(cb: Codebook, i: int) -> np.ndarray:
    if cb.kind in FULL_KINDS:
        return np.asarray(cb.profile(i).coefficients).ravel()
    return cb.codewords[i]


def _from_row_major(kind: str, geom: RisGeometry, values: np.ndarray) -> np.ndarray:
    if kind in FULL_KINDS:
        return values.reshape(geom.rows_z, geom.cols_y).T.ravel()
    return values


def export_codebook(cb: Codebook, states: PhaseStateSet | None = None) -> bytes:
    """Serialize ``cb``; a discrete ``states`` (or ``cb.states``) selects the hex payload."""
    states = states if states is not None else cb.states
    discrete = states is not None and states.is_discrete
    tag = f"{states.bits}-bit" if discrete else "continuous"
    g = cb.geometry
    lines = [f"RISCB v1 kind={cb.kind} M={g.rows_z} N={g.cols_y} states={tag}"]
    for i in range(len(cb)):
        a, b = cb.labels[i]
        if cb.kind != "dft":
            a, b = math.degrees(a), math.degrees(b)
        values = _row_major(cb, i)
        if discrete:
            payload = pack_indices(nearest_state_indices(values, states), states.bits)
        else:
            payload = ",".join(f"{ph:.9f}" for ph in np.angle(values))
        lines.append(f"{i},{a:.6f},{b:.6f},{payload}")
    return ("\n".join(lines) + "\n").encode("ascii")


def _parse_header(line: str) -> dict[str, str]:
    parts = line.split(" ")
    if len(parts) != 6 or parts[0] != "RISCB" or parts[1] != "v1":
        raise CodebookFormatError("bad header, expected 'RISCB v1 kind=.. M=.. N=.. states=..'", 1)
    fields = {}
    for part, key in zip(parts[2:], ("kind", "M", "N", "states")):
        k, sep, v = part.partition("=")
        if not sep or k != key:
            raise CodebookFormatError(f"header field {key!r} missing or out of order", 1)
        fields[k] = v
    return fields


def import_codebook(data: bytes | str, wavelength: float = 1.0, spacing_z: float | None = None,
                    spacing_y: float | None = None) -> Codebook:
    """Parse a RISCB v1 stream.

    The file records element counts only, so the physical spacing and
    wavelength default to a half-wavelength array at ``wavelength``. A
    ``k-bit`` payload decodes against the canonical evenly spaced ``2**k`` set
    (``{0, pi}`` for 1 bit).
    """
    text = data.decode("ascii") if isinstance(data, (bytes, bytearray)) else data
    if "\r" in text:
        raise CodebookFormatError("CR characters are not allowed; lines end in LF")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CodebookFormatError("empty input", 1)
    hdr = _parse_header(lines[0])
    kind = hdr["kind"]
    if kind not in KINDS:
        raise CodebookFormatError(f"unknown kind {kind!r}", 1)
    try:
        M, N = int(hdr["M"]), int(hdr["N"])
        geom = RisGeometry(M, N, spacing_z or wavelength / 2, spacing_y or wavelength / 2, wavelength)
    except ValueError as exc:
        raise CodebookFormatError(f"bad dimensions: {exc}", 1) from None
    tag = hdr["states"]
    states = None
    if tag != "continuous":
        if not tag.endswith("-bit") or not tag[:-4].isdigit() or int(tag[:-4]) < 1:
            raise CodebookFormatError(f"bad states tag {tag!r}", 1)
        states = PhaseStateSet.uniform(int(tag[:-4]))
    length = {"z-stage": M, "y-stage": N}.get(kind, M * N)
    if len(lines) < 2:
        raise CodebookFormatError("codebook has no codewords", 1)

    rows, labels = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) < 4:
            raise CodebookFormatError("record needs index, theta, phi and payload", lineno)
        try:
            index = int(fields[0])
            a, b = float(fields[1]), float(fields[2])
        except ValueError:
            raise CodebookFormatError("non-numeric index or angle", lineno) from None
        if index != lineno - 2:
            raise CodebookFormatError(f"record index {index} out of sequence", lineno)
        try:
            if states is not None:
                if len(fields) != 4:
                    raise ValueError("discrete payload must be a single hex field")
                idx = unpack_indices(fields[3], length, states.bits)
                if max(idx) >= len(states.states):
                    raise ValueError("state index outside the state set")
                values = states.coefficients()[idx]
            else:
                phases = np.array([float(x) for x in fields[3:]])
                if phases.size != length:
                    raise ValueError(f"expected {length} phases, got {phases.size}")
                values = np.exp(1j * phases)
        except ValueError as exc:
            raise CodebookFormatError(str(exc), lineno) from None
        rows.append(_from_row_major(kind, geom, values))
        labels.append((a, b) if kind == "dft" else (math.radians(a), math.radians(b)))
    return Codebook(kind, geom, np.array(rows), tuple(labels), states)
