"""Feedback-driven configuration: exhaustive codebook scan, two-step scan, greedy descent.

Every search talks to a power oracle only through ``oracle.query(profile)``,
so the same code drives the simulator and the networked oracle.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .channel import OracleError, PowerOracle
from .codebook import AngleGrid, Codebook, build_y_codebook, build_z_codebook, compose_second_stage
from .geometry import PhaseProfile, PhaseStateSet, RisGeometry, quantize_profile


@dataclass(frozen=True)
class TraceEntry:
    query: int
    power_dbm: float
    label: str


@dataclass
class SearchResult:
    best_profile: PhaseProfile
    best_power_dbm: float
    query_count: int
    trace: list[TraceEntry]
    selected_angles: tuple[float, float | None] | None = None
    # greedy only: incumbent power after each group step
    accepted_powers: list[float] = field(default_factory=list)

    def trace_csv(self) -> str:
        return trace_to_csv(self.trace)


def trace_to_csv(trace: list[TraceEntry]) -> str:
    buf = io.StringIO()
    buf.write("query,power_dbm,label\n")
    for e in trace:
        buf.write(f"{e.query},{e.power_dbm:.4f},{e.label}\n")
    return buf.getvalue()


class _Recorder:
    """Runs queries, keeps the trace and reattaches it to oracle failures."""

    def __init__(self, oracle: PowerOracle, states: PhaseStateSet | None):
        self.oracle = oracle
        self.states = states
        self.trace: list[TraceEntry] = []

    def dispatch(self, profile: PhaseProfile) -> PhaseProfile:
        if self.states is not None and self.states.is_discrete:
            return quantize_profile(profile, self.states)
        return profile

    def query(self, profile: PhaseProfile, label: str) -> float:
        try:
            p = self.oracle.query(profile)
        except OracleError as exc:
            exc.partial_trace = list(self.trace)
            raise
        self.trace.append(TraceEntry(len(self.trace), p, label))
        return p


def exhaustive_search(oracle: PowerOracle, codebook: Codebook, states: PhaseStateSet | None = None) -> SearchResult:
    """Query every codeword once, in order; the first maximum wins."""
    if len(codebook) == 0:
        raise ValueError("empty codebook")
    rec = _Recorder(oracle, states)
    best_i, best_p, best_prof = -1, -np.inf, None
    for i in range(len(codebook)):
        prof = rec.dispatch(codebook.profile(i))
        p = rec.query(prof, codebook.label_text(i))
        if p > best_p:
            best_i, best_p, best_prof = i, p, prof
    sel = codebook.labels[best_i] if codebook.kind != "dft" else None
    return SearchResult(best_prof, best_p, len(rec.trace), rec.trace, sel)


def two_step_search(oracle: PowerOracle, geom: RisGeometry, grid: AngleGrid,
                    states: PhaseStateSet | None = None) -> SearchResult:
    """Zenith scan with column-uniform codewords, then azimuth scan of the composed codewords.

    Issues exactly ``1 + q + p`` queries. Comparisons are ``>=`` against the
    running maximum (including the initial all-state-0 feedback), so later
    ties replace earlier winners.
    """
    if grid.q == 0 or grid.p == 0:
        raise ValueError("empty angle grid")
    states = states or PhaseStateSet.continuous()
    rec = _Recorder(oracle, states)

    r0 = PhaseProfile.uniform(geom, states.state_zero(), states)
    p_best = rec.query(r0, "init")
    best_prof = r0

    f_z = build_z_codebook(geom, grid.zeniths)
    q_m = None
    zenith_powers = []
    for i in range(grid.q):
        prof = rec.dispatch(f_z.profile(i))
        p = rec.query(prof, "zenith:" + f_z.label_text(i))
        zenith_powers.append(p)
        if p >= p_best:
            q_m, p_best, best_prof = i, p, prof
    if q_m is None:
        # the initial profile beat every zenith codeword; steer the azimuth
        # scan from the strongest zenith (last one on ties, as with >=)
        q_m = len(zenith_powers) - 1 - int(np.argmax(zenith_powers[::-1]))
    theta_m = grid.zeniths[q_m]

    f_y = build_y_codebook(geom, theta_m, grid.azimuths)
    f_hat = compose_second_stage(f_y, f_z.codewords[q_m])
    p_m = None
    for j in range(grid.p):
        prof = rec.dispatch(f_hat.profile(j))
        p = rec.query(prof, "azimuth:" + f_hat.label_text(j))
        if p >= p_best:
            p_m, p_best, best_prof = j, p, prof
    phi_m = grid.azimuths[p_m] if p_m is not None else None
    return SearchResult(best_prof, p_best, len(rec.trace), rec.trace, (theta_m, phi_m))


def greedy_search(oracle: PowerOracle, geom: RisGeometry, states: PhaseStateSet, sweeps: int = 2,
                  group: str = "column") -> SearchResult:
    """Coordinate descent over element groups with exhaustive per-group state trial.

    Starting from all-state-0, each group (a column, or a single element in
    row-major order) is tried in every state; the best state is adopted only if
    it does not lower the incumbent power, so the accepted sequence is
    non-decreasing. Issues ``sweeps * groups * len(states)`` queries.
    """
    if not states.is_discrete:
        raise ValueError("greedy search needs a discrete state set")
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    if group == "column":
        groups = [(slice(None), n) for n in range(geom.cols_y)]
        names = [f"col{n}" for n in range(geom.cols_y)]
    elif group == "element":
        groups = [(m, n) for m in range(geom.rows_z) for n in range(geom.cols_y)]
        names = [f"el{m}.{n}" for m, n in groups]
    else:
        raise ValueError(f"unknown group granularity {group!r}")

    coeffs = states.coefficients()
    idx = np.zeros((geom.rows_z, geom.cols_y), dtype=int)
    rec = _Recorder(oracle, states)
    incumbent = None
    best_prof = None
    accepted: list[float] = []
    for sweep in range(sweeps):
        for sel, name in zip(groups, names):
            trial_powers = []
            trial_profiles = []
            for s in range(len(coeffs)):
                trial = idx.copy()
                trial[sel] = s
                prof = PhaseProfile(coeffs[trial], geom, states)
                trial_powers.append(rec.query(prof, f"sweep{sweep}:{name}:s{s}"))
                trial_profiles.append((trial, prof))
            s_best = int(np.argmax(trial_powers))
            if incumbent is None or trial_powers[s_best] >= incumbent:
                incumbent = trial_powers[s_best]
                idx, best_prof = trial_profiles[s_best]
            accepted.append(incumbent)
    # any trial above the incumbent is adopted, so the incumbent is the trace maximum
    return SearchResult(best_prof, incumbent, len(rec.trace), rec.trace, None, accepted)


def averaged_query(oracle: PowerOracle, profile: PhaseProfile, repeats: int) -> float:
    """Mean of ``repeats`` queries in the dB domain."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    return float(np.mean([oracle.query(profile) for _ in range(repeats)]))


class AveragingOracle:
    """Wraps an oracle so each query is the dB mean of ``repeats`` raw queries."""

    def __init__(self, inner: PowerOracle, repeats: int):
        if repeats < 1:
            raise ValueError("repeats must be >= 1")
        self.inner = inner
        self.repeats = repeats

    @property
    def count(self) -> int:
        return self.inner.count

    def query(self, profile: PhaseProfile) -> float:
        return averaged_query(self.inner, profile, self.repeats)
