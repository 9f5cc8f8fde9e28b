"""Print the scenario-level figures the shipped scatterer knobs were tuned against.

    python3 scripts/calibrate.py
    python3 scripts/calibrate.py --scan-outdoor   # the grid scan behind the outdoor bracket knobs
"""

import itertools
import json
import math
import sys
from dataclasses import replace
from importlib.resources import files

import numpy as np

from risbeam.channel import AntennaModel, Scatterer, SimulatedOracle, load_scenario
from risbeam.codebook import AngleGrid
from risbeam.geometry import PhaseStateSet
from risbeam.harness import algorithm_from_dict, compare_algorithms, run_scenario
from risbeam.search import greedy_search, two_step_search


def sweep(name):
    return json.loads(files("risbeam").joinpath("sweeps", f"{name}.json").read_text())


def report(name, seed=0):
    sc = load_scenario(name)
    sw = sweep(name)
    return run_scenario(sc, algorithm_from_dict(sw["algorithm"]), sw, seed)


def ordering(rep):
    return all(r.on_dbm > r.off_dbm > r.none_dbm for r in rep.records)


def corridor():
    rep = report("corridor")
    gains = [r.gain_db for r in rep.records]
    print(f"corridor: gain over RIS-off {min(gains):.2f}..{max(gains):.2f} dB over {len(gains)} points "
          f"(reference 6-20 dB); on>off>none at every point: {ordering(rep)}")
    sc = load_scenario("corridor")
    one_bit = PhaseStateSet.one_bit()
    ts = two_step_search(SimulatedOracle(sc), sc.geometry, AngleGrid.default(), one_bit)
    gr = greedy_search(SimulatedOracle(sc), sc.geometry, one_bit, sweeps=2)
    print(f"corridor far end: greedy {gr.best_power_dbm:.2f} dBm vs two-step {ts.best_power_dbm:.2f} dBm "
          f"(diff {gr.best_power_dbm - ts.best_power_dbm:+.2f} dB)")


def outdoor():
    rep = report("outdoor")
    by = {}
    for r in rep.records:
        ang, dist = r.label.split("deg@")
        by.setdefault(dist, {})[int(float(ang))] = r.gain_none_db
    worst = math.inf
    for dist, g in by.items():
        margin = g[45] - max(g[30], g[60])
        worst = min(worst, margin)
        print(f"outdoor {dist:>5}: gain over no-RIS 30/45/60 = {g[30]:.1f} / {g[45]:.1f} / {g[60]:.1f} dB"
              f"  margin {margin:+.2f}")
    means = {a: np.mean([g[a] for g in by.values()]) for a in (30, 45, 60)}
    print(f"outdoor: mean gain 30/45/60 = {means[30]:.1f} / {means[45]:.1f} / {means[60]:.1f} dB "
          f"(reference 37.3 / 41.2 / 37.3), worst margin {worst:+.2f} dB; on>off>none: {ordering(rep)}")


def nearfield():
    sc = load_scenario("nearfield26")
    cmp = compare_algorithms(sc)
    for row in cmp.rows:
        print(f"nearfield26 {row.algorithm:>8}: mean gain {row.mean_gain_db:.2f} dB, {row.queries_per_point:.0f} queries")


def commercial():
    sc = load_scenario("commercial26")
    sw = sweep("commercial26")
    algo = algorithm_from_dict(sw["algorithm"])
    omni = sc.with_antennas(AntennaModel.isotropic(), AntennaModel.isotropic())
    d = run_scenario(sc, algo, sw, 0).summary()["gain_db"]["mean"]
    o = run_scenario(omni, algo, sw, 0).summary()["gain_db"]["mean"]
    print(f"commercial26: mean gain directional {d:.2f} dB vs isotropic {o:.2f} dB (margin {d - o:+.2f}; "
          f"reference about 15 vs 4 dB)")


def outdoor_margins(rep):
    by = {}
    for r in rep.records:
        ang, dist = r.label.split("deg@")
        by.setdefault(dist, {})[int(float(ang))] = r.gain_none_db
    angle = min(g[45] - max(g[30], g[60]) for g in by.values())
    order = min(min(r.on_dbm - r.off_dbm, r.off_dbm - r.none_dbm) for r in rep.records)
    return angle, order


def scan_outdoor():
    """Four-point bracket: amplitude, stand-off, first-null angle and height, ranked by the worse margin."""
    base = load_scenario("outdoor")
    sw = sweep("outdoor")
    algo = algorithm_from_dict(sw["algorithm"])
    rows = []
    for amp, x, null, z in itertools.product((0.08, 0.1, 0.12, 0.15, 0.2), (0.08, 0.1, 0.12, 0.15),
                                             (40, 42, 44, 46), (0.65, 0.7, 0.75)):
        step = base.wavelength / (4 * math.sin(math.radians(null)))
        sc = replace(base, scatterers=tuple(Scatterer((x, (k - 1.5) * step, z), amp) for k in range(4)))
        angle, order = outdoor_margins(run_scenario(sc, algo, sw, 0))
        rows.append((min(angle, order), amp, x, null, z, angle, order))
    rows.sort(reverse=True)
    print("amp    x     null  z     angle_margin  order_margin")
    for _, amp, x, null, z, angle, order in rows[:10]:
        print(f"{amp:<6} {x:<5} {null:<5} {z:<5} {angle:+12.2f}  {order:+12.2f}")


if __name__ == "__main__":
    if "--scan-outdoor" in sys.argv:
        scan_outdoor()
        sys.exit()
    corridor()
    outdoor()
    nearfield()
    commercial()
