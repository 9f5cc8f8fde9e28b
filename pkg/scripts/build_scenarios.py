"""Regenerate the shipped scenario, sweep and geometry JSON files.

Scatterer positions and amplitudes are calibration knobs; ``calibrate.py``
prints the figures they were tuned against.

    python3 scripts/build_scenarios.py
"""

import json
import math
from pathlib import Path

C = 299_792_458.0
PKG = Path(__file__).resolve().parents[1] / "src" / "risbeam"

# 5.8 GHz panel: 20 rows along z, 55 columns along y, 205.4 mm x 786.5 mm aperture
F58 = 5.8e9
LAM58 = C / F58
DZ58, DY58 = 0.2054 / 20, 0.7865 / 55
# 2.6 GHz panel: four 8x8 tiles on a half-wavelength grid
F26 = 2.6e9
LAM26 = C / F26

ONE_BIT = {"mode": "discrete", "states": [[1.0, 0.0], [1.0, math.pi]]}


def element_gain_db(dz, dy, lam):
    # scales the point-element cascade to a tile of area dz*dy
    return round(20 * math.log10(dz * dy / lam), 4)


def horn(gain_dbi, boresight="ris"):
    # half-power width from the pencil-beam estimate G ~ 41253 / HPBW^2
    hpbw = round(math.sqrt(41253.0 / 10 ** (gain_dbi / 10)), 2)
    return {"kind": "directional", "boresight_gain_dbi": gain_dbi, "beamwidth_3db_deg": hpbw, "boresight": boresight}


def polar(center, deg, dist, z=None):
    r = math.radians(deg)
    return [round(center[0] + dist * math.cos(r), 6), round(center[1] + dist * math.sin(r), 6),
            center[2] if z is None else z]


def ris58(position, normal, physical=True):
    geom = {"rows_z": 20, "cols_y": 55}
    if physical:
        geom.update(spacing_z=DZ58, spacing_y=DY58)
    dz, dy = (DZ58, DY58) if physical else (LAM58 / 2, LAM58 / 2)
    return {"position": position, "normal": normal, "up": [0.0, 0.0, 1.0], "geometry": geom,
            "phase_states": ONE_BIT, "element_gain_db": element_gain_db(dz, dy, LAM58), "element_exponent": 0.5}


def ris26(position, normal):
    return {"position": position, "normal": normal, "up": [0.0, 0.0, 1.0], "geometry": {"rows_z": 16, "cols_y": 16},
            "phase_states": ONE_BIT, "element_gain_db": element_gain_db(LAM26 / 2, LAM26 / 2, LAM26),
            "element_exponent": 0.5}


def office():
    # 4 x 7 grid of 1.2 m squares; x across the short side, y along the long side.
    # RIS at the middle of the long wall (x = 0), TX at the room centre.
    ris = [0.0, 4.2, 1.2]
    walls = [
        {"position": [4.8, 2.0, 1.2], "amplitude_gain": 0.02},
        {"position": [4.8, 6.4, 1.2], "amplitude_gain": 0.02},
        {"position": [2.4, 0.0, 1.2], "amplitude_gain": 0.015},
        {"position": [2.4, 8.4, 1.2], "amplitude_gain": 0.015},
    ]
    return {
        "name": "office",
        "carrier_hz": F58,
        "tx": {"position": [2.4, 4.2, 1.2], "antenna": horn(17.1)},
        "rx": {"position": [4.2, 0.6, 1.2], "antenna": horn(17.1)},
        "ris": ris58(ris, [1.0, 0.0, 0.0]),
        "direct_path": {"present": True, "extra_attenuation_db": 0.0},
        "scatterers": walls,
        "noise_sigma_db": 0.0,
        "tx_power_dbm": 10.0,
        "rng_seed": 1,
    }


def corridor():
    # L-shaped corridor, RIS at the corner; TX arm at +30 deg from the normal, RX arm at -60 deg.
    c = [0.0, 0.0, 1.2]
    clutter = [
        {"position": [3.0, -8.0, 2.4], "amplitude_gain": 0.02},   # ceiling pipes
        {"position": [6.0, 10.0, 2.5], "amplitude_gain": 0.02},
        {"position": [1.0, -3.0, 2.6], "amplitude_gain": 0.01},   # iron door
    ]
    return {
        "name": "corridor",
        "carrier_hz": F58,
        "tx": {"position": polar(c, 30, 25.0), "antenna": horn(17.1)},
        "rx": {"position": polar(c, -60, 20.0), "antenna": horn(17.1)},
        "ris": ris58(c, [1.0, 0.0, 0.0]),
        "direct_path": {"present": True, "extra_attenuation_db": 30.0},
        "scatterers": clutter,
        "noise_sigma_db": 0.0,
        "tx_power_dbm": 0.0,
        "rng_seed": 2,
    }


def outdoor():
    # Normal incidence from 8 m; a small reflector (bracket and table) just below the surface
    # with a specular lobe around the mirror direction and its first null near 46 deg.
    # Position, null and amplitude come from the grid scan in calibrate.py.
    c = [0.0, 0.0, 1.0]
    step = LAM58 / (4 * math.sin(math.radians(46)))
    bracket = [{"position": [0.15, round((k - 1.5) * step, 6), 0.65], "amplitude_gain": 0.12} for k in range(4)]
    return {
        "name": "outdoor",
        "carrier_hz": F58,
        "tx": {"position": [8.0, 0.0, 1.0], "antenna": horn(17.1)},
        "rx": {"position": polar(c, 45, 3.0), "antenna": horn(17.1)},
        "ris": ris58(c, [1.0, 0.0, 0.0]),
        "direct_path": {"present": True, "extra_attenuation_db": 15.0},
        "scatterers": bracket,
        "noise_sigma_db": 0.0,
        "tx_power_dbm": 16.0,
        "rng_seed": 3,
    }


def nearfield26():
    c = [0.0, 0.0, 1.2]
    return {
        "name": "nearfield26",
        "carrier_hz": F26,
        "tx": {"position": [2.0, 0.0, 1.2], "antenna": horn(14.8)},
        "rx": {"position": polar(c, 45, 2.0), "antenna": horn(14.8)},
        "ris": ris26(c, [1.0, 0.0, 0.0]),
        "direct_path": {"present": True, "extra_attenuation_db": 0.0},
        "scatterers": [],
        "noise_sigma_db": 0.0,
        "tx_power_dbm": 0.0,
        "rng_seed": 4,
    }


def commercial26():
    # Passage entrance: RIS faces the transmitter, phone 1.5 m away at 45 deg, indoor clutter all around.
    c = [0.0, 0.0, 1.5]
    clutter = [
        {"position": [2.5, -2.0, 1.0], "amplitude_gain": 0.4},
        {"position": [3.5, 3.0, 2.5], "amplitude_gain": 0.5},
        {"position": [-1.0, 3.5, 1.5], "amplitude_gain": 0.5},
        {"position": [1.0, 4.0, 0.2], "amplitude_gain": 0.4},
        {"position": [6.0, -1.0, 3.0], "amplitude_gain": 0.3},
        {"position": [0.5, 2.5, 3.0], "amplitude_gain": 0.3},
    ]
    return {
        "name": "commercial26",
        "carrier_hz": F26,
        "tx": {"position": [10.0, 0.0, 1.5], "antenna": horn(14.8)},
        "rx": {"position": polar(c, 45, 1.5), "antenna": horn(14.8)},
        "ris": ris26(c, [1.0, 0.0, 0.0]),
        "direct_path": {"present": True, "extra_attenuation_db": 25.0},
        "scatterers": clutter,
        "noise_sigma_db": 1.0,
        "tx_power_dbm": 20.0,
        "rng_seed": 5,
    }


GRID = {"zenith_deg": [50, 130], "azimuth_deg": [-80, 80], "step_deg": 2}


def sweeps(scen):
    cor_c = scen["corridor"]["ris"]["position"]
    r = math.radians(-60)
    arm = [math.cos(r), math.sin(r), 0.0]
    return {
        "office": {
            "kind": "grid", "origin": [0.0, 0.0, 1.2], "u": [0, 1, 0], "v": [1, 0, 0], "nu": 7, "nv": 4,
            "cell": 1.2,
            "algorithm": {"name": "fixed", "target": [4.2, 0.6, 1.2], "configure_with": "two-step", "grid": GRID},
        },
        "corridor": {
            "kind": "line", "start": [round(cor_c[i] + arm[i], 6) for i in range(3)], "direction": arm,
            "offsets": {"start": 0, "stop": 20, "step": 1},
            "algorithm": {"name": "two-step", "grid": GRID},
        },
        "outdoor": {
            "kind": "polar", "angles_deg": [30, 45, 60], "distances": {"start": 1.0, "stop": 5.0, "step": 0.5},
            "algorithm": {"name": "two-step", "grid": GRID},
        },
        "nearfield26": {
            "kind": "polar", "angles_deg": {"start": 30, "stop": 60, "step": 5}, "distances": [2.0],
            "algorithm": {"name": "two-step", "grid": GRID},
        },
        "commercial26": {
            "kind": "polar", "angles_deg": {"start": 35, "stop": 55, "step": 5}, "distances": [1.5],
            "algorithm": {"name": "two-step", "grid": GRID, "repeats": 4},
        },
    }


def geometries():
    return {
        "ris58_halfwave": {"name": "ris58_halfwave", "rows_z": 20, "cols_y": 55, "carrier_hz": F58},
        "ris58_physical": {"name": "ris58_physical", "rows_z": 20, "cols_y": 55, "carrier_hz": F58,
                           "spacing_z": DZ58, "spacing_y": DY58},
        "ris26": {"name": "ris26", "rows_z": 16, "cols_y": 16, "carrier_hz": F26},
    }


def write(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print("wrote", path.relative_to(PKG.parents[1]))


def main():
    scen = {f.__name__: f() for f in (office, corridor, outdoor, nearfield26, commercial26)}
    for name, doc in scen.items():
        write(PKG / "scenarios" / f"{name}.json", doc)
    for name, doc in sweeps(scen).items():
        write(PKG / "sweeps" / f"{name}.json", {"name": name, **doc})
    for name, doc in geometries().items():
        write(PKG / "geometries" / f"{name}.json", doc)
    write(PKG / "grids" / "default.json", GRID)


if __name__ == "__main__":
    main()
