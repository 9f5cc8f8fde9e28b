"""Experiment replication: sweeps over receiver positions, pattern batches, algorithm comparison.

Reports are a records CSV plus a JSON sidecar, both with a fixed field order
and no timestamps, so a rerun with the same seed is byte-identical.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .channel import (
    Scenario,
    ScenarioError,
    SimulatedOracle,
    amplitude_to_dbm,
    link,
    no_ris_power,
    optimal_phase_profile,
)
from .codebook import AngleGrid, build_angle_codebook, build_dft_codebook
from .geometry import PhaseProfile, PhaseStateSet, RisGeometry, profile_from_vector, steering_vector
from .pattern import (
    CutSpec,
    PatternError,
    compute_cut,
    extract_metrics,
    is_resolvable,
    uniform_aperture_beamwidth_deg,
)
from .search import AveragingOracle, SearchResult, exhaustive_search, greedy_search, two_step_search

ALGORITHMS = ("two-step", "exhaustive", "dft", "greedy", "optimal", "fixed")
MEASURED_BEAMWIDTH_DEG = 5.2  # reference value for the 5.8 GHz panel


class ConfigError(ValueError):
    """Invalid experiment configuration; ``key`` names the offending setting."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def _check_keys(d: Any, allowed: Sequence[str], path: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(path or "<root>", "expected an object")
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}" if path else k, "unknown key")
    return d


def derive_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed, *path]).generate_state(1, dtype=np.uint32)[0])


# --- configuration --------------------------------------------------------------

def grid_from_dict(d: dict, path: str = "grid") -> AngleGrid:
    _check_keys(d, ("zenith_deg", "azimuth_deg", "step_deg", "zeniths_deg", "azimuths_deg"), path)
    try:
        if "zeniths_deg" in d or "azimuths_deg" in d:
            return AngleGrid.from_degrees(d["zeniths_deg"], d["azimuths_deg"])
        return AngleGrid.span(tuple(d.get("zenith_deg", (50.0, 130.0))), tuple(d.get("azimuth_deg", (-80.0, 80.0))),
                              float(d.get("step_deg", 2.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str = "two-step"
    states: str = "scenario"            # scenario | continuous | 1bit
    grid: AngleGrid = field(default_factory=AngleGrid.default)
    sweeps: int = 2
    group: str = "column"
    repeats: int = 1
    oversampling: tuple[int, int] = (1, 1)
    target: tuple[float, float, float] | None = None   # "fixed": configure once toward this point
    configure_with: str = "two-step"

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ConfigError("algorithm.name", f"must be one of {ALGORITHMS}")
        if self.states not in ("scenario", "continuous", "1bit"):
            raise ConfigError("algorithm.states", "must be scenario, continuous or 1bit")
        if self.name == "fixed" and self.target is None:
            raise ConfigError("algorithm.target", "fixed algorithm needs a target position")
        if self.repeats < 1:
            raise ConfigError("algorithm.repeats", "must be >= 1")
        if self.configure_with not in ("two-step", "exhaustive", "dft", "greedy", "optimal"):
            raise ConfigError("algorithm.configure_with", "unknown algorithm")

    def resolve_states(self, scenario: Scenario) -> PhaseStateSet:
        if self.states == "continuous":
            return PhaseStateSet.continuous()
        if self.states == "1bit":
            return PhaseStateSet.one_bit()
        return scenario.ris.phase_states

    def describe(self) -> dict:
        z, a = self.grid.zeniths, self.grid.azimuths
        d = {"name": self.name, "states": self.states, "q": len(z), "p": len(a),
             "zenith_deg": [round(math.degrees(z[0]), 6), round(math.degrees(z[-1]), 6)],
             "azimuth_deg": [round(math.degrees(a[0]), 6), round(math.degrees(a[-1]), 6)],
             "repeats": self.repeats}
        if self.name == "greedy":
            d.update(sweeps=self.sweeps, group=self.group)
        if self.name == "dft":
            d.update(oversampling=list(self.oversampling))
        if self.name == "fixed":
            d.update(target=list(self.target), configure_with=self.configure_with)
        return d


def algorithm_from_dict(d: dict) -> AlgorithmSpec:
    _check_keys(d, ("name", "states", "grid", "sweeps", "group", "repeats", "oversampling", "target",
                    "configure_with"), "algorithm")
    kw: dict[str, Any] = {k: d[k] for k in ("name", "states", "sweeps", "group", "repeats", "configure_with") if k in d}
    if "grid" in d:
        kw["grid"] = grid_from_dict(d["grid"], "algorithm.grid")
    if "oversampling" in d:
        kw["oversampling"] = tuple(int(x) for x in d["oversampling"])
    if "target" in d:
        kw["target"] = tuple(float(x) for x in d["target"])
    try:
        return AlgorithmSpec(**kw)
    except TypeError as exc:
        raise ConfigError("algorithm", str(exc)) from None


@dataclass(frozen=True)
class SweepPoint:
    label: str
    position: tuple[float, float, float]


def _steps(d: Any, path: str) -> list[float]:
    if isinstance(d, list):
        return [float(x) for x in d]
    _check_keys(d, ("start", "stop", "step"), path)
    try:
        start, stop, step = float(d["start"]), float(d["stop"]), float(d["step"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(path, "expected start, stop and step numbers") from None
    if step <= 0 or stop < start:
        raise ConfigError(path, "need step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 9) for i in range(n)]


def sweep_points(spec: dict, scenario: Scenario) -> list[SweepPoint]:
    """Expand a sweep spec into receiver positions.

    Kinds: ``points`` (explicit), ``line`` (start + offsets along a
    direction), ``grid`` (cell centres of an ``nu x nv`` grid, numbered
    column by column) and ``polar`` (angles from the surface normal in the
    horizontal plane x distances from the surface centre).
    """
    kind = spec.get("kind") if isinstance(spec, dict) else None
    common = ("kind", "algorithm", "reference", "name")
    if kind == "points":
        _check_keys(spec, common + ("points",), "sweep")
        pts = []
        for i, p in enumerate(spec.get("points", [])):
            _check_keys(p, ("label", "position"), f"sweep.points[{i}]")
            pts.append(SweepPoint(str(p.get("label", i + 1)), tuple(float(c) for c in p["position"])))
        return pts
    if kind == "line":
        _check_keys(spec, common + ("start", "direction", "offsets"), "sweep")
        start = np.asarray(spec["start"], dtype=float)
        direction = np.asarray(spec["direction"], dtype=float)
        direction = direction / np.linalg.norm(direction)
        return [SweepPoint(f"{s:g}", tuple(float(c) for c in start + s * direction))
                for s in _steps(spec["offsets"], "sweep.offsets")]
    if kind == "grid":
        _check_keys(spec, common + ("origin", "u", "v", "nu", "nv", "cell"), "sweep")
        origin = np.asarray(spec["origin"], dtype=float)
        u = np.asarray(spec["u"], dtype=float)
        v = np.asarray(spec["v"], dtype=float)
        u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
        cell = float(spec["cell"])
        pts = []
        for i in range(int(spec["nu"])):
            for j in range(int(spec["nv"])):
                pos = origin + (i + 0.5) * cell * u + (j + 0.5) * cell * v
                pts.append(SweepPoint(str(len(pts) + 1), tuple(float(c) for c in pos)))
        return pts
    if kind == "polar":
        _check_keys(spec, common + ("angles_deg", "distances"), "sweep")
        angles = _steps(spec["angles_deg"], "sweep.angles_deg")
        dists = _steps(spec["distances"], "sweep.distances")
        frame = scenario.ris.frame()
        center = np.asarray(scenario.ris.position)
        pts = []
        for a in angles:
            for d in dists:
                r = math.radians(a)
                pos = center + d * (math.cos(r) * frame[0] + math.sin(r) * frame[1])
                pts.append(SweepPoint(f"{a:g}deg@{d:g}m", tuple(float(c) for c in pos)))
        return pts
    raise ConfigError("sweep.kind", "must be one of points, line, grid, polar")


def load_json(path: str | Path, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(what, f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(what, f"invalid JSON at line {exc.lineno}: {exc.msg}") from None


def geometry_from_dict(d: dict) -> RisGeometry:
    _check_keys(d, ("rows_z", "cols_y", "spacing_z", "spacing_y", "wavelength", "carrier_hz", "name"), "geom")
    if "wavelength" in d:
        lam = float(d["wavelength"])
    elif "carrier_hz" in d:
        lam = 299_792_458.0 / float(d["carrier_hz"])
    else:
        raise ConfigError("geom.carrier_hz", "need carrier_hz or wavelength")
    for k in ("rows_z", "cols_y"):
        if k not in d:
            raise ConfigError(f"geom.{k}", "missing required key")
    try:
        return RisGeometry(int(d["rows_z"]), int(d["cols_y"]), float(d.get("spacing_z", lam / 2)),
                           float(d.get("spacing_y", lam / 2)), lam)
    except ValueError as exc:
        raise ConfigError("geom", str(exc)) from None


# --- running algorithms ------------------------------------------------------------

def run_algorithm(spec: AlgorithmSpec, scenario: Scenario, oracle, name: str | None = None) -> SearchResult:
    """Run one configuration algorithm against ``oracle``."""
    name = name or spec.name
    states = spec.resolve_states(scenario)
    geom = scenario.geometry
    if spec.repeats > 1:
        oracle = AveragingOracle(oracle, spec.repeats)
    if name == "two-step":
        return two_step_search(oracle, geom, spec.grid, states)
    if name == "exhaustive":
        return exhaustive_search(oracle, build_angle_codebook(geom, spec.grid), states)
    if name == "dft":
        return exhaustive_search(oracle, build_dft_codebook(geom, *spec.oversampling), states)
    if name == "greedy":
        if not states.is_discrete:
            states = PhaseStateSet.one_bit()
        return greedy_search(oracle, geom, states, spec.sweeps, spec.group)
    if name == "optimal":
        prof = optimal_phase_profile(scenario, include_background=True)
        if states.is_discrete:
            from .geometry import quantize_profile
            prof = quantize_profile(prof, states)
        p = oracle.query(prof)
        from .search import TraceEntry
        return SearchResult(prof, p, 1, [TraceEntry(0, p, "optimal")])
    raise ConfigError("algorithm.name", f"cannot run {name!r} directly")


def off_profile(scenario: Scenario, states: PhaseStateSet | None = None) -> PhaseProfile:
    """The powered-off surface: every element in state 0 (a static reflector).

    The copper-plate baseline is the continuous uniform profile of amplitude 1,
    which coincides with this one whenever state 0 is ``(1, 0)``.
    """
    states = states or scenario.ris.phase_states
    return PhaseProfile.uniform(scenario.geometry, states.state_zero(), states)


@dataclass(frozen=True)
class Record:
    index: int
    label: str
    position: tuple[float, float, float]
    on_dbm: float
    off_dbm: float
    none_dbm: float
    copper_dbm: float
    queries: int

    @property
    def gain_db(self) -> float:
        return self.on_dbm - self.off_dbm

    @property
    def gain_none_db(self) -> float:
        return self.on_dbm - self.none_dbm


@dataclass
class ExperimentReport:
    scenario_id: str
    algorithm: dict
    seed: int
    records: list[Record]
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,label,x,y,z,on_dbm,off_dbm,none_dbm,copper_dbm,gain_db,gain_none_db,queries\n")
        for r in self.records:
            x, y, z = r.position
            buf.write(f"{r.index},{r.label},{x:.4f},{y:.4f},{z:.4f},{r.on_dbm:.4f},{r.off_dbm:.4f},"
                      f"{r.none_dbm:.4f},{r.copper_dbm:.4f},{r.gain_db:.4f},{r.gain_none_db:.4f},{r.queries}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        gains = [r.gain_db for r in self.records]
        gains_none = [r.gain_none_db for r in self.records]
        return {
            "records": len(self.records),
            "gain_db": {"mean": round(float(np.mean(gains)), 4), "min": round(min(gains), 4),
                        "max": round(max(gains), 4)},
            "gain_none_db": {"mean": round(float(np.mean(gains_none)), 4), "min": round(min(gains_none), 4),
                             "max": round(max(gains_none), 4)},
            "queries": sum(r.queries for r in self.records),
        }

    def to_json(self) -> str:
        doc = {"scenario": self.scenario_id, "algorithm": self.algorithm, "seed": self.seed,
               "version": self.version, "summary": self.summary(), **self.extra}
        return json.dumps(doc, indent=2) + "\n"

    def write(self, outdir: str | Path, stem: str = "report") -> tuple[Path, Path]:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
        csv_path.write_text(self.to_csv(), newline="\n")
        json_path.write_text(self.to_json(), newline="\n")
        return csv_path, json_path


def _measure(scenario: Scenario, profile: PhaseProfile | None, rng: np.random.Generator) -> float:
    lk = link(scenario)
    if profile is None:
        p = no_ris_power(scenario)
    else:
        p = lk.power_dbm(profile.coefficients)
    if scenario.noise_sigma_db > 0 and p > -200.0:
        p += float(rng.normal(0.0, scenario.noise_sigma_db))
    return p


def run_scenario(scenario: Scenario, algorithm: AlgorithmSpec, sweep: dict, seed: int | None = None) -> ExperimentReport:
    """Configure the surface at every sweep point and record on / off / no-surface powers.

    With the ``fixed`` algorithm the surface is configured once toward
    ``algorithm.target`` and held for every point.
    """
    seed = scenario.rng_seed if seed is None else seed
    points = sweep_points(sweep, scenario)
    if not points:
        raise ConfigError("sweep", "sweep produced no points")
    states = algorithm.resolve_states(scenario)
    held = None
    held_queries = 0
    if algorithm.name == "fixed":
        target_sc = scenario.with_rx(algorithm.target)
        res = run_algorithm(algorithm, target_sc, SimulatedOracle(target_sc, derive_seed(seed, 0)),
                            algorithm.configure_with)
        held, held_queries = res.best_profile, res.query_count
    records = []
    for i, pt in enumerate(points):
        sc = scenario.with_rx(pt.position)
        if held is None:
            res = run_algorithm(algorithm, sc, SimulatedOracle(sc, derive_seed(seed, i + 1)))
            profile, queries = res.best_profile, res.query_count
        else:
            profile, queries = held, held_queries if i == 0 else 0
        rng = np.random.default_rng(derive_seed(seed, i + 1, 1))
        records.append(Record(
            i, pt.label, pt.position,
            _measure(sc, profile, rng), _measure(sc, off_profile(sc, states), rng), _measure(sc, None, rng),
            _measure(sc, PhaseProfile.uniform(sc.geometry), rng), queries,
        ))
    return ExperimentReport(scenario.name, algorithm.describe(), seed, records)


# --- patterns -----------------------------------------------------------------------

@dataclass
class PatternRun:
    commands_deg: list[float]
    patterns: dict
    metrics: dict
    geometry: RisGeometry

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        buf.write("command_deg,peak_deg,beamwidth_3db_deg,sidelobe_db,peak_db\n")
        for c in self.commands_deg:
            m = self.metrics[c]
            if m is None:
                buf.write(f"{c:.4f},nan,nan,nan,nan\n")
            else:
                buf.write(f"{c:.4f},{m.peak_angle_deg:.4f},{m.beamwidth_3db_deg:.4f},"
                          f"{m.sidelobe_level_db:.4f},{m.peak_db:.4f}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        ok = [m for m in self.metrics.values() if m is not None]
        sll = [m.sidelobe_level_db for m in ok if math.isfinite(m.sidelobe_level_db)]
        peaks = [m.peak_db for m in ok]
        resolvable = [c for c in self.commands_deg if is_resolvable(self.patterns[c], c)]
        g = self.geometry
        return {
            "commands": len(self.commands_deg),
            "mean_sidelobe_db": round(float(np.mean(sll)), 4) if sll else None,
            "peak_fluctuation_db": round(max(peaks) - min(peaks), 4) if peaks else None,
            "scan_range_deg": round(max(resolvable) - min(resolvable), 4) if resolvable else 0.0,
            "broadside_beamwidth_ideal_deg": round(
                uniform_aperture_beamwidth_deg(g.cols_y, g.spacing_y, g.wavelength), 4),
            "beamwidth_measured_reference_deg": MEASURED_BEAMWIDTH_DEG,
        }


def run_pattern(geom: RisGeometry, commands_deg: Sequence[float], outdir: str | Path | None = None,
                element_factor: bool = True, quantize: PhaseStateSet | None = None) -> PatternRun:
    """Azimuth cuts at theta = 90 deg for steering codewords commanded to each angle."""
    patterns, metrics = {}, {}
    for c in commands_deg:
        prof = profile_from_vector(steering_vector(geom, math.pi / 2, math.radians(c)))
        if quantize is not None and quantize.is_discrete:
            from .geometry import quantize_profile
            prof = quantize_profile(prof, quantize)
        pat = compute_cut(geom, prof, CutSpec("azimuth", 90.0, -90.0, 90.0), element_factor=element_factor)
        patterns[c] = pat
        try:
            metrics[c] = extract_metrics(pat)
        except PatternError:
            metrics[c] = None
    run = PatternRun(list(commands_deg), patterns, metrics, geom)
    if outdir is not None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        for c in commands_deg:
            (out / f"pattern_{c:+06.1f}.csv").write_text(patterns[c].to_csv(), newline="\n")
        (out / "metrics.csv").write_text(run.metrics_csv(), newline="\n")
        (out / "summary.json").write_text(json.dumps(run.summary(), indent=2) + "\n", newline="\n")
    return run


# --- algorithm comparison ------------------------------------------------------------

@dataclass
class ComparisonRow:
    algorithm: str
    mean_gain_db: float
    queries_per_point: float


@dataclass
class Comparison:
    scenario_id: str
    rows: list[ComparisonRow]
    per_point: dict
    seeds: list[int]

    def row(self, name: str) -> ComparisonRow:
        return next(r for r in self.rows if r.algorithm == name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("algorithm,mean_gain_db,queries_per_point\n")
        for r in self.rows:
            buf.write(f"{r.algorithm},{r.mean_gain_db:.4f},{r.queries_per_point:.1f}\n")
        return buf.getvalue()


COMPARED = (("dft", "dft"), ("angle2d", "exhaustive"), ("two-step", "two-step"))


def default_arc(scenario: Scenario) -> dict:
    """RX arc at the scenario's RX range, 30-60 degrees from the normal in 5 degree steps."""
    r = float(np.linalg.norm(np.asarray(scenario.rx.position) - np.asarray(scenario.ris.position)))
    return {"kind": "polar", "angles_deg": {"start": 30, "stop": 60, "step": 5}, "distances": [round(r, 6)]}


def compare_algorithms(scenario: Scenario, grid: AngleGrid | None = None, seeds: Sequence[int] = (0,),
                       sweep: dict | None = None, states: str = "scenario") -> Comparison:
    """DFT-exhaustive vs angle-grid exhaustive vs two-step, averaged over an RX arc and seeds.

    Gain is measured noiselessly against the all-state-0 (RIS-off) profile.
    """
    grid = grid or AngleGrid.default()
    points = sweep_points(sweep or default_arc(scenario), scenario)
    per_point: dict[str, list[float]] = {name: [] for name, _ in COMPARED}
    queries: dict[str, list[int]] = {name: [] for name, _ in COMPARED}
    for seed in seeds:
        for i, pt in enumerate(points):
            sc = scenario.with_rx(pt.position)
            lk = link(sc)
            spec = AlgorithmSpec("two-step", states, grid)
            off = lk.power_dbm(off_profile(sc, spec.resolve_states(sc)).coefficients)
            for name, algo in COMPARED:
                res = run_algorithm(spec, sc, SimulatedOracle(sc, derive_seed(seed, i + 1)), algo)
                per_point[name].append(lk.power_dbm(res.best_profile.coefficients) - off)
                queries[name].append(res.query_count)
    rows = [ComparisonRow(name, float(np.mean(per_point[name])), float(np.mean(queries[name])))
            for name, _ in COMPARED]
    return Comparison(scenario.name, rows, per_point, list(seeds))
