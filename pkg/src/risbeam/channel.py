"""Cascaded TX -> surface -> RX propagation and the power-feedback oracle.

Each element contributes

    g = (lambda / (4 pi d_t d_r)) * sqrt(G_t G_r) * (cos_inc * cos_ref)**e * exp(-j 2 pi (d_t + d_r) / lambda)

with exact per-element distances (spherical wavefront, valid in the near
field), off-boresight antenna gains and an element factor whose exponent
``e`` defaults to 1/2. An optional ``element_gain_db`` scales every element;
0 dB reproduces the bare formula above.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Protocol, Sequence

import numpy as np

from .geometry import PhaseProfile, PhaseStateSet, RisGeometry

SPEED_OF_LIGHT = 299_792_458.0
NO_SIGNAL_DBM = -200.0
AIM_TARGETS = ("ris", "tx", "rx")


class OracleError(RuntimeError):
    """A power query failed. Searches attach their partial trace as ``partial_trace``."""

    def __init__(self, message: str):
        super().__init__(message)
        self.partial_trace: list = []


class ScenarioError(ValueError):
    """Invalid scenario content; ``key`` names the offending field path."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0:
        raise ValueError(f"cannot normalize vector {v}")
    return v / n


@dataclass(frozen=True)
class AntennaModel:
    """Isotropic (0 dBi) or Gaussian-beam directional antenna.

    The directional pattern is ``G0 - 12 (psi / HPBW)**2`` dB, floored at
    ``G0 - 20`` dB. ``boresight`` is a direction vector or the name of the node
    to aim at (``"ris"``, ``"tx"``, ``"rx"``), re-resolved whenever nodes move.
    """

    kind: str = "isotropic"
    boresight_gain_dbi: float = 0.0
    beamwidth_3db_deg: float | None = None
    boresight: tuple[float, float, float] | str = "ris"

    def __post_init__(self):
        if self.kind == "isotropic":
            if self.boresight_gain_dbi != 0.0:
                raise ValueError("isotropic antennas have 0 dBi gain")
        elif self.kind == "directional":
            if self.boresight_gain_dbi < 0:
                raise ValueError("directional boresight gain must be >= 0 dBi")
            bw = self.beamwidth_3db_deg
            if bw is None or not 0.0 < bw < 180.0:
                raise ValueError("directional beamwidth must lie in (0, 180) degrees")
        else:
            raise ValueError(f"unknown antenna kind {self.kind!r}")
        if isinstance(self.boresight, str):
            if self.boresight not in AIM_TARGETS:
                raise ValueError(f"boresight target must be one of {AIM_TARGETS}")
        else:
            object.__setattr__(self, "boresight", tuple(float(c) for c in _unit(self.boresight)))

    @classmethod
    def isotropic(cls) -> "AntennaModel":
        return cls()

    @classmethod
    def horn(cls, gain_dbi: float, beamwidth_deg: float | None = None, boresight="ris") -> "AntennaModel":
        if beamwidth_deg is None:
            # Kraus approximation G ~ 41253 / HPBW^2 for a symmetric pencil beam
            beamwidth_deg = math.sqrt(41253.0 / 10 ** (gain_dbi / 10))
        return cls("directional", gain_dbi, beamwidth_deg, boresight)

    def gain_db(self, off_axis_deg: np.ndarray | float) -> np.ndarray | float:
        if self.kind == "isotropic":
            return np.zeros_like(off_axis_deg, dtype=float) if np.ndim(off_axis_deg) else 0.0
        g0 = self.boresight_gain_dbi
        return np.maximum(g0 - 12.0 * (np.asarray(off_axis_deg) / self.beamwidth_3db_deg) ** 2, g0 - 20.0)


@dataclass(frozen=True)
class Node:
    position: tuple[float, float, float]
    antenna: AntennaModel = field(default_factory=AntennaModel)

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))


@dataclass(frozen=True)
class RisPlacement:
    """Surface pose and hardware. ``position`` is the surface centre in world coordinates."""

    position: tuple[float, float, float]
    normal: tuple[float, float, float]
    up: tuple[float, float, float]
    geometry: RisGeometry
    phase_states: PhaseStateSet = field(default_factory=PhaseStateSet.one_bit)
    element_gain_db: float = 0.0
    element_exponent: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        n, u = _unit(self.normal), _unit(self.up)
        if abs(float(n @ u)) > 1e-9:
            raise ValueError("ris normal and up vectors must be orthogonal")
        object.__setattr__(self, "normal", tuple(float(c) for c in n))
        object.__setattr__(self, "up", tuple(float(c) for c in u))
        if self.element_exponent < 0:
            raise ValueError("element_exponent must be >= 0")

    def frame(self) -> np.ndarray:
        """Rows are the world-frame local axes ``x`` (normal), ``y``, ``z`` (up)."""
        x = np.array(self.normal)
        z = np.array(self.up)
        return np.vstack([x, np.cross(z, x), z])

    def element_positions(self) -> np.ndarray:
        """World coordinates of every element, shape ``(M, N, 3)``."""
        local = self.geometry.element_positions() - self.geometry.center()
        return np.asarray(self.position) + local @ self.frame()

    def to_local(self, point) -> np.ndarray:
        """Point expressed in the surface frame with element (0, 0) at the origin."""
        rel = np.asarray(point, dtype=float) - np.asarray(self.position)
        return self.frame() @ rel + self.geometry.center()


@dataclass(frozen=True)
class DirectPath:
    present: bool = True
    extra_attenuation_db: float = 0.0

    def __post_init__(self):
        if self.extra_attenuation_db < 0:
            raise ValueError("extra_attenuation_db must be >= 0")


@dataclass(frozen=True)
class Scatterer:
    position: tuple[float, float, float]
    amplitude_gain: float

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        if self.amplitude_gain < 0:
            raise ValueError("amplitude_gain must be >= 0")


@dataclass(frozen=True)
class Scenario:
    carrier_hz: float
    tx: Node
    rx: Node
    ris: RisPlacement
    direct_path: DirectPath = field(default_factory=DirectPath)
    scatterers: tuple[Scatterer, ...] = ()
    noise_sigma_db: float = 0.0
    tx_power_dbm: float = 0.0
    rng_seed: int = 0
    name: str = ""

    def __post_init__(self):
        if not self.carrier_hz > 0:
            raise ValueError("carrier_hz must be > 0")
        if self.noise_sigma_db < 0:
            raise ValueError("noise_sigma_db must be >= 0")
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        if abs(self.ris.geometry.wavelength - self.wavelength) > 1e-12 * self.wavelength:
            raise ValueError("ris geometry wavelength does not match carrier_hz")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def geometry(self) -> RisGeometry:
        return self.ris.geometry

    def with_rx(self, position) -> "Scenario":
        return replace(self, rx=replace(self.rx, position=tuple(position)))

    def with_antennas(self, tx: AntennaModel | None = None, rx: AntennaModel | None = None) -> "Scenario":
        return replace(
            self,
            tx=replace(self.tx, antenna=tx or self.tx.antenna),
            rx=replace(self.rx, antenna=rx or self.rx.antenna),
        )

    def with_states(self, states: PhaseStateSet) -> "Scenario":
        return replace(self, ris=replace(self.ris, phase_states=states))

    def swapped(self) -> "Scenario":
        """TX and RX positions exchanged; each role keeps its antenna."""
        return replace(self, tx=replace(self.tx, position=self.rx.position),
                       rx=replace(self.rx, position=self.tx.position))


# --- physics ----------------------------------------------------------------

def _aim(antenna: AntennaModel, own, scenario: Scenario) -> np.ndarray:
    b = antenna.boresight
    if isinstance(b, str):
        target = {"ris": scenario.ris.position, "tx": scenario.tx.position, "rx": scenario.rx.position}[b]
        if np.array_equal(np.asarray(target, dtype=float), np.asarray(own, dtype=float)):
            raise ValueError(f"degenerate geometry: antenna aimed at its own position ({b})")
        return _unit(np.asarray(target) - np.asarray(own))
    return np.asarray(b)


def _off_axis_deg(boresight: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=-1)
    cosang = np.clip((vectors @ boresight) / norms, -1.0, 1.0)
    return np.degrees(np.arccos(cosang))


def _antenna_amp(antenna: AntennaModel, boresight: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    if antenna.kind == "isotropic":
        return np.ones(vectors.shape[:-1])
    return 10 ** (antenna.gain_db(_off_axis_deg(boresight, vectors)) / 20)


def _path_term(scenario: Scenario, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distances and antenna amplitudes for TX -> point -> RX legs."""
    tx = np.asarray(scenario.tx.position)
    rx = np.asarray(scenario.rx.position)
    to_pt = points - tx
    from_pt = rx - points
    d_t = np.linalg.norm(to_pt, axis=-1)
    d_r = np.linalg.norm(from_pt, axis=-1)
    amp = _antenna_amp(scenario.tx.antenna, _aim(scenario.tx.antenna, tx, scenario), to_pt)
    amp = amp * _antenna_amp(scenario.rx.antenna, _aim(scenario.rx.antenna, rx, scenario), -from_pt)
    return d_t, d_r, amp


def element_gains(scenario: Scenario) -> np.ndarray:
    """Complex cascade gain of every element, shape ``(M, N)``."""
    ris = scenario.ris
    lam = scenario.wavelength
    pos = ris.element_positions()
    with np.errstate(divide="ignore", invalid="ignore"):
        d_t, d_r, amp = _path_term(scenario, pos)
        if np.any(d_t == 0) or np.any(d_r == 0):
            raise ValueError("degenerate geometry: a node coincides with a surface element")
        normal = np.asarray(ris.normal)
        cos_inc = ((np.asarray(scenario.tx.position) - pos) @ normal) / d_t
        cos_ref = ((np.asarray(scenario.rx.position) - pos) @ normal) / d_r
        front = (cos_inc > 0) & (cos_ref > 0)
        factor = np.where(front, np.abs(cos_inc * cos_ref), 0.0) ** ris.element_exponent
        g = (lam / (4 * np.pi * d_t * d_r)) * amp * factor * np.exp(-2j * np.pi * (d_t + d_r) / lam)
    g = np.where(front, g, 0.0) * 10 ** (ris.element_gain_db / 20)
    if not np.all(np.isfinite(g)):
        raise ValueError("degenerate geometry: a node coincides with a surface element")
    return g


def element_cascade_gain(scenario: Scenario, m: int, n: int) -> complex:
    M, N = scenario.geometry.rows_z, scenario.geometry.cols_y
    if not (0 <= m < M and 0 <= n < N):
        raise IndexError(f"element ({m}, {n}) outside a {M}x{N} surface")
    return complex(element_gains(scenario)[m, n])


def direct_term(scenario: Scenario) -> complex:
    dp = scenario.direct_path
    if not dp.present:
        return 0j
    lam = scenario.wavelength
    tx = np.asarray(scenario.tx.position)
    rx = np.asarray(scenario.rx.position)
    vec = rx - tx
    d = float(np.linalg.norm(vec))
    if d == 0:
        raise ValueError("degenerate geometry: TX and RX coincide")
    amp = float(_antenna_amp(scenario.tx.antenna, _aim(scenario.tx.antenna, tx, scenario), vec[None])[0])
    amp *= float(_antenna_amp(scenario.rx.antenna, _aim(scenario.rx.antenna, rx, scenario), -vec[None])[0])
    atten = 10 ** (-dp.extra_attenuation_db / 20)
    return complex(lam / (4 * np.pi * d) * amp * atten * np.exp(-2j * np.pi * d / lam))


def scatter_term(scenario: Scenario) -> complex:
    if not scenario.scatterers:
        return 0j
    lam = scenario.wavelength
    pts = np.array([s.position for s in scenario.scatterers])
    gains = np.array([s.amplitude_gain for s in scenario.scatterers])
    with np.errstate(divide="ignore", invalid="ignore"):
        d_t, d_r, amp = _path_term(scenario, pts)
        if np.any(d_t == 0) or np.any(d_r == 0):
            raise ValueError("degenerate geometry: a node coincides with a scatterer")
        h = gains * lam / (4 * np.pi * d_t * d_r) * amp * np.exp(-2j * np.pi * (d_t + d_r) / lam)
    total = complex(np.sum(h))
    if not np.isfinite(total):
        raise ValueError("degenerate geometry: a node coincides with a scatterer")
    return total


@dataclass(frozen=True, eq=False)
class Link:
    """Precomputed channel of one scenario: per-element gains plus the non-RIS background."""

    scenario: Scenario
    gains: np.ndarray
    direct: complex
    scattered: complex

    @property
    def background(self) -> complex:
        return self.direct + self.scattered

    def field(self, coefficients: np.ndarray) -> complex:
        return self.background + complex(np.sum(self.gains * coefficients))

    def power_dbm(self, coefficients: np.ndarray) -> float:
        return amplitude_to_dbm(abs(self.field(coefficients)), self.scenario.tx_power_dbm)


@functools.lru_cache(maxsize=256)
def link(scenario: Scenario) -> Link:
    return Link(scenario, element_gains(scenario), direct_term(scenario), scatter_term(scenario))


def amplitude_to_dbm(amplitude: float, tx_power_dbm: float) -> float:
    if not math.isfinite(amplitude):
        raise ValueError("non-finite field amplitude (degenerate geometry)")
    if amplitude == 0.0:
        return NO_SIGNAL_DBM
    return max(tx_power_dbm + 20 * math.log10(amplitude), NO_SIGNAL_DBM)


def _check_profile(scenario: Scenario, profile: PhaseProfile) -> None:
    g = scenario.geometry
    if profile.coefficients.shape != (g.rows_z, g.cols_y):
        raise ValueError(f"profile shape {profile.coefficients.shape} does not match {g.rows_z}x{g.cols_y} surface")


def received_power(scenario: Scenario, profile: PhaseProfile, rng: np.random.Generator | None = None) -> float:
    """Received power in dBm; Gaussian dB noise is added only when ``rng`` is given."""
    _check_profile(scenario, profile)
    p = link(scenario).power_dbm(profile.coefficients)
    if rng is not None and scenario.noise_sigma_db > 0 and p > NO_SIGNAL_DBM:
        p += float(rng.normal(0.0, scenario.noise_sigma_db))
    return p


def no_ris_power(scenario: Scenario) -> float:
    """Power with the surface removed (direct path and scatterers only)."""
    return amplitude_to_dbm(abs(link(scenario).background), scenario.tx_power_dbm)


def optimal_phase_profile(scenario: Scenario, include_background: bool = False) -> PhaseProfile:
    """Per-element conjugate phasing, the continuous maximizer of the surface sum.

    With ``include_background`` every element is also aligned to the phase of
    the direct + scattered field, which makes it the maximizer when those are
    present too.
    """
    lk = link(scenario)
    ref = np.angle(lk.background) if include_background and lk.background != 0 else 0.0
    coeffs = np.exp(1j * (ref - np.angle(lk.gains)))
    return PhaseProfile(coeffs, scenario.geometry)


# --- oracle -------------------------------------------------------------------

class PowerOracle(Protocol):
    count: int

    def query(self, profile: PhaseProfile) -> float: ...


class SimulatedOracle:
    """Seeded power oracle over a scenario; counts every query."""

    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.scenario = scenario
        self._link = link(scenario)
        self.count = 0
        self.reset(scenario.rng_seed if seed is None else seed, clear_count=False)

    def reset(self, seed: int, clear_count: bool = True) -> None:
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        if clear_count:
            self.count = 0

    def query(self, profile: PhaseProfile) -> float:
        _check_profile(self.scenario, profile)
        self.count += 1
        p = self._link.power_dbm(profile.coefficients)
        sigma = self.scenario.noise_sigma_db
        if sigma > 0 and p > NO_SIGNAL_DBM:
            p += float(self._rng.normal(0.0, sigma))
        return p


def make_oracle(scenario: Scenario, seed: int | None = None) -> SimulatedOracle:
    return SimulatedOracle(scenario, seed)


# --- scenario files -----------------------------------------------------------

def _take(d: dict, key: str, path: str, allowed: Sequence[str], required: Sequence[str] = ()) -> dict:
    if not isinstance(d, dict):
        raise ScenarioError(path, "expected an object")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ScenarioError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
    for r in required:
        if r not in d:
            raise ScenarioError(f"{path}.{r}" if path else r, "missing required key")
    return d


def _vec(value, path: str) -> tuple[float, float, float]:
    if not (isinstance(value, (list, tuple)) and len(value) == 3
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)):
        raise ScenarioError(path, "expected a list of 3 numbers")
    return tuple(float(c) for c in value)


def _num(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(path, "expected a finite number")
    return float(value)


def _antenna(d: dict, path: str) -> AntennaModel:
    _take(d, "", path, ("kind", "boresight_gain_dbi", "beamwidth_3db_deg", "boresight"), ("kind",))
    bore = d.get("boresight", "ris")
    if not isinstance(bore, str):
        bore = _vec(bore, f"{path}.boresight")
    try:
        return AntennaModel(
            d["kind"],
            _num(d.get("boresight_gain_dbi", 0.0), f"{path}.boresight_gain_dbi"),
            None if d.get("beamwidth_3db_deg") is None else _num(d["beamwidth_3db_deg"], f"{path}.beamwidth_3db_deg"),
            bore,
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(path, str(exc)) from None


def _node(d: dict, path: str) -> Node:
    _take(d, "", path, ("position", "antenna"), ("position",))
    ant = _antenna(d["antenna"], f"{path}.antenna") if "antenna" in d else AntennaModel()
    return Node(_vec(d["position"], f"{path}.position"), ant)


def _states(d: dict, path: str) -> PhaseStateSet:
    _take(d, "", path, ("mode", "states"), ("mode",))
    try:
        if d["mode"] == "continuous":
            return PhaseStateSet.continuous()
        states = d.get("states")
        if not isinstance(states, list):
            raise ScenarioError(f"{path}.states", "expected a list of [amplitude, phase_rad] pairs")
        return PhaseStateSet(d["mode"], tuple((float(a), float(p)) for a, p in states))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(path, str(exc)) from None


def scenario_from_dict(doc: dict[str, Any], name: str = "") -> Scenario:
    top = ("name", "carrier_hz", "tx", "rx", "ris", "direct_path", "scatterers", "noise_sigma_db",
           "tx_power_dbm", "rng_seed")
    _take(doc, "", "", top, ("carrier_hz", "tx", "rx", "ris"))
    carrier = _num(doc["carrier_hz"], "carrier_hz")
    if carrier <= 0:
        raise ScenarioError("carrier_hz", "must be > 0")
    lam = SPEED_OF_LIGHT / carrier

    r = _take(doc["ris"], "", "ris", ("position", "normal", "up", "geometry", "phase_states", "element_gain_db",
                                      "element_exponent"), ("position", "normal", "up", "geometry"))
    g = _take(r["geometry"], "", "ris.geometry", ("rows_z", "cols_y", "spacing_z", "spacing_y"),
              ("rows_z", "cols_y"))
    try:
        geom = RisGeometry(
            g["rows_z"], g["cols_y"],
            _num(g.get("spacing_z", lam / 2), "ris.geometry.spacing_z"),
            _num(g.get("spacing_y", lam / 2), "ris.geometry.spacing_y"),
            lam,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError("ris.geometry", str(exc)) from None
    try:
        ris = RisPlacement(
            _vec(r["position"], "ris.position"), _vec(r["normal"], "ris.normal"), _vec(r["up"], "ris.up"), geom,
            _states(r["phase_states"], "ris.phase_states") if "phase_states" in r else PhaseStateSet.one_bit(),
            _num(r.get("element_gain_db", 0.0), "ris.element_gain_db"),
            _num(r.get("element_exponent", 0.5), "ris.element_exponent"),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError("ris", str(exc)) from None

    dp = _take(doc.get("direct_path", {}), "", "direct_path", ("present", "extra_attenuation_db"))
    if not isinstance(dp.get("present", True), bool):
        raise ScenarioError("direct_path.present", "expected true or false")
    att = _num(dp.get("extra_attenuation_db", 0.0), "direct_path.extra_attenuation_db")
    if att < 0:
        raise ScenarioError("direct_path.extra_attenuation_db", "must be >= 0")

    scat = doc.get("scatterers", [])
    if not isinstance(scat, list):
        raise ScenarioError("scatterers", "expected a list")
    scatterers = []
    for i, s in enumerate(scat):
        path = f"scatterers[{i}]"
        _take(s, "", path, ("position", "amplitude_gain"), ("position", "amplitude_gain"))
        amp = _num(s["amplitude_gain"], f"{path}.amplitude_gain")
        if amp < 0:
            raise ScenarioError(f"{path}.amplitude_gain", "must be >= 0")
        scatterers.append(Scatterer(_vec(s["position"], f"{path}.position"), amp))

    sigma = _num(doc.get("noise_sigma_db", 0.0), "noise_sigma_db")
    if sigma < 0:
        raise ScenarioError("noise_sigma_db", "must be >= 0")
    seed = doc.get("rng_seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ScenarioError("rng_seed", "expected a non-negative integer")
    nm = doc.get("name", name)
    if not isinstance(nm, str):
        raise ScenarioError("name", "expected a string")
    return Scenario(
        carrier, _node(doc["tx"], "tx"), _node(doc["rx"], "rx"), ris,
        DirectPath(dp.get("present", True), att), tuple(scatterers), sigma,
        _num(doc.get("tx_power_dbm", 0.0), "tx_power_dbm"), seed, nm,
    )


def scenario_to_dict(sc: Scenario) -> dict[str, Any]:
    def ant(a: AntennaModel):
        d = {"kind": a.kind}
        if a.kind == "directional":
            d["boresight_gain_dbi"] = a.boresight_gain_dbi
            d["beamwidth_3db_deg"] = a.beamwidth_3db_deg
        d["boresight"] = a.boresight if isinstance(a.boresight, str) else list(a.boresight)
        return d

    g = sc.geometry
    st = sc.ris.phase_states
    return {
        "name": sc.name,
        "carrier_hz": sc.carrier_hz,
        "tx": {"position": list(sc.tx.position), "antenna": ant(sc.tx.antenna)},
        "rx": {"position": list(sc.rx.position), "antenna": ant(sc.rx.antenna)},
        "ris": {
            "position": list(sc.ris.position), "normal": list(sc.ris.normal), "up": list(sc.ris.up),
            "geometry": {"rows_z": g.rows_z, "cols_y": g.cols_y, "spacing_z": g.spacing_z, "spacing_y": g.spacing_y},
            "phase_states": {"mode": st.mode, "states": [list(s) for s in st.states]} if st.is_discrete
            else {"mode": "continuous"},
            "element_gain_db": sc.ris.element_gain_db,
            "element_exponent": sc.ris.element_exponent,
        },
        "direct_path": {"present": sc.direct_path.present,
                        "extra_attenuation_db": sc.direct_path.extra_attenuation_db},
        "scatterers": [{"position": list(s.position), "amplitude_gain": s.amplitude_gain} for s in sc.scatterers],
        "noise_sigma_db": sc.noise_sigma_db,
        "tx_power_dbm": sc.tx_power_dbm,
        "rng_seed": sc.rng_seed,
    }


SHIPPED = ("office", "corridor", "outdoor", "nearfield26", "commercial26")


def shipped_path(name: str) -> Path:
    return Path(__file__).parent / "scenarios" / f"{name}.json"


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Load a scenario JSON file, or a shipped scenario by bare name (e.g. ``"corridor"``)."""
    p = Path(path_or_name)
    if not p.suffix and str(path_or_name) in SHIPPED:
        p = shipped_path(str(path_or_name))
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(doc, name=p.stem)
